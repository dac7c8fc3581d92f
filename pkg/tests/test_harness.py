from __future__ import annotations

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from macrocell import errors as E
from macrocell.container import ExecStatus, InitStatus
from macrocell.harness import (
    CallingApplication, ExternalBinding, RackInputs, format_value, parse_vars, rack_manager_scenario,
    read_var, resolve_path, scalar_paths, source_layout, write_var,
)


@pytest.fixture
def binding(rack_source):
    return ExternalBinding.allocate(source_layout(rack_source))


def test_write_ground(binding):
    write_var(binding, "ground", True)
    assert binding.region.read_bytes(0, 21) == b"\x01" + bytes(20)


def test_write_struct_member(binding):
    write_var(binding, "calculator[1].criticity", 7)
    assert binding.region.buffer[2] == 7
    write_var(binding, "calculator[10].powered", True)
    assert binding.region.buffer[19] == 1
    assert read_var(binding, "calculator[1].criticity") == 7


def test_negative_values_round_trip(binding):
    write_var(binding, "calculator[4].criticity", -128)
    assert read_var(binding, "calculator[4].criticity") == -128


@pytest.mark.parametrize("path", ["calculator[0].powered", "calculator[11].criticity"])
def test_index_out_of_declared_range(binding, path):
    with pytest.raises(E.IndexOutOfDeclaredRange):
        write_var(binding, path, 1)


@pytest.mark.parametrize("path", ["nothing", "calculator", "calculator[1]", "calculator[1].speed", "ground[1]",
                                  "ground.x", "9bad"])
def test_unknown_path(binding, path):
    with pytest.raises(E.UnknownPath):
        read_var(binding, path)


@pytest.mark.parametrize("path, value", [
    ("calculator[1].criticity", 128), ("calculator[1].criticity", -129), ("ground", 2),
    ("calculator[1].criticity", True), ("ground", "yes"),
])
def test_value_overflow(binding, path, value):
    with pytest.raises(E.ValueOverflow):
        write_var(binding, path, value)


def test_region_size_must_match(rack_source):
    from macrocell.memory import ExternalRegion
    with pytest.raises(ValueError):
        ExternalBinding(source_layout(rack_source), ExternalRegion(bytearray(20), 0, 20))


def test_scalar_paths_cover_region(rack_source):
    layout = source_layout(rack_source)
    paths = list(scalar_paths(layout.externals))
    assert len(paths) == 21
    offsets = sorted(resolve_path(layout.externals, p)[0] for p in paths)
    assert offsets == list(range(21))


# the fixtures used by property tests here are immutable
@settings(max_examples=200, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.data())
def test_write_touches_only_its_bytes(rack_source, data):
    layout = source_layout(rack_source)
    buf = bytearray(data.draw(st.binary(min_size=29, max_size=29)))
    b = ExternalBinding.allocate(layout, buf, start=4)
    path = data.draw(st.sampled_from(list(scalar_paths(layout.externals))))
    offset, t = resolve_path(layout.externals, path)
    value = data.draw(st.booleans() if t.is_bool else st.integers(*t.value_range()))
    before = bytes(buf)
    b.write(path, value)
    assert b.read(path) == value
    lo, hi = 4 + offset, 4 + offset + t.byte_size
    assert buf[:lo] == before[:lo] and buf[hi:] == before[hi:]


def test_parse_vars():
    text = "# inputs\nground = true\n\ncalculator[2].criticity = -3  # note\n"
    assert parse_vars(text) == [("ground", True), ("calculator[2].criticity", -3)]
    with pytest.raises(E.BindingError):
        parse_vars("ground true")
    with pytest.raises(E.BindingError):
        parse_vars("ground = maybe")
    assert [format_value(v) for v in (True, False, -3)] == ["true", "false", "-3"]


def test_trace_order(rack_container, binding):
    app = CallingApplication(rack_container, binding, 371)
    assert app.start_up("rack").ok
    app.run_adaptation()
    app.run_adaptation()
    assert [kind for kind, _ in app.trace] == [
        "init-request", "init-response", "exec-request", "exec-response", "exec-request", "exec-response",
    ]


def test_execute_before_init_is_refused(rack_container, binding):
    app = CallingApplication(rack_container, binding, 371)
    with pytest.raises(RuntimeError):
        app.run_adaptation()


def _inputs(ground=False, criticity=(9,) * 10):
    return RackInputs(ground, [True] * 10, list(criticity))


def test_scenario_ground(rack_container):
    report = rack_manager_scenario(rack_container, "rack", _inputs(ground=True), 371)
    assert report.execution.status is ExecStatus.OK
    assert report.stopped == {1}


def test_scenario_criticity(rack_container):
    report = rack_manager_scenario(rack_container, "rack", _inputs(criticity=(3, 7, 4, 9, 2, 5, 6, 1, 8, 4)), 371)
    assert report.stopped == {1, 3, 5, 8, 10}
    assert report.criticity == (3, 7, 4, 9, 2, 5, 6, 1, 8, 4)


def test_scenario_nothing_stops(rack_container):
    assert rack_manager_scenario(rack_container, "rack", _inputs(), 371).stopped == set()


def test_scenario_refused_init(rack_container):
    report = rack_manager_scenario(rack_container, "rack", _inputs(ground=True), 100)
    assert report.init.status is InitStatus.ERR_WCET_EXCEEDS_ALLOCATION
    assert report.execution is None
    assert report.stopped == set()
    assert [k for k, _ in report.trace] == ["init-request", "init-response"]


@settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.booleans(), st.lists(st.booleans(), min_size=10, max_size=10),
       st.lists(st.integers(-128, 127), min_size=10, max_size=10))
def test_scenario_matches_rule(rack_build, perf_a, ground, powered, criticity):
    from macrocell.binfmt import serialize
    from macrocell.container import Container, ContainerConfig, NonVolatileMemory
    nvm = NonVolatileMemory()
    nvm.store("rack", serialize(rack_build.compiled))
    c = Container(ContainerConfig(perf_a, 4096, 8), nvm)
    report = rack_manager_scenario(c, "rack", RackInputs(ground, powered, criticity), 371)
    expected = list(powered)
    if ground:
        expected[0] = False
    else:
        expected = [p and crit >= 5 for p, crit in zip(powered, criticity)]
    assert list(report.powered) == expected
