import sys

from macrocell.cli import main

sys.exit(main())
