from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from macrocell.errors import LexError
from macrocell.lang import TokenKind, tokenize


def kinds_and_lexemes(source):
    return [(t.kind, t.lexeme) for t in tokenize(source)]


def test_local_declaration():
    assert kinds_and_lexemes("local int8 i;") == [
        (TokenKind.KEYWORD, "local"),
        (TokenKind.KEYWORD, "int8"),
        (TokenKind.IDENT, "i"),
        (TokenKind.PUNCT, ";"),
    ]


def test_empty_source():
    assert tokenize("") == []


def test_comment_skipped():
    assert kinds_and_lexemes("// v1.0\nbool ground;") == [
        (TokenKind.KEYWORD, "bool"),
        (TokenKind.IDENT, "ground"),
        (TokenKind.PUNCT, ";"),
    ]


def test_positions_are_one_based():
    toks = tokenize("bool b;\n  b = true;")
    b = toks[3]
    assert (b.lexeme, b.line, b.column) == ("b", 2, 3)
    assert toks[5].kind is TokenKind.BOOL


def test_range_and_increment():
    lexemes = [t.lexeme for t in tokenize("x[1..10]; i++ <= &&")]
    assert lexemes == ["x", "[", "1", "..", "10", "]", ";", "i", "++", "<=", "&&"]


@pytest.mark.parametrize("source, column", [("int8 &p;", 6), ("a = b & c;", 7), ("a = 'x';", 5), ("a | b", 3), ("#x", 1)])
def test_rejects_characters_outside_alphabet(source, column):
    with pytest.raises(LexError) as exc:
        tokenize(source)
    assert (exc.value.line, exc.value.column) == (1, column)


def test_star_is_a_token_so_pointer_declarators_fail_later():
    assert [t.lexeme for t in tokenize("int8 *p;")] == ["int8", "*", "p", ";"]


_fragments = st.lists(
    st.sampled_from(["bool", "x1", "42", "..", "(", "<=", "++", " ", "\n", "\t", "// note\n", "true", "{", "=="]),
    max_size=30,
)


@given(_fragments)
def test_lexemes_and_gaps_reconstruct_source(parts):
    source = " ".join(parts)
    rebuilt = []
    pos = 0
    for t in tokenize(source):
        gap = source[pos:t.offset]
        assert gap.strip() == "" or gap.lstrip().startswith("//")
        assert source[t.offset:t.offset + len(t.lexeme)] == t.lexeme
        rebuilt.append(gap + t.lexeme)
        pos = t.offset + len(t.lexeme)
    rebuilt.append(source[pos:])
    assert "".join(rebuilt) == source
