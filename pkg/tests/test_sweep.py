import math

import pytest

from fvcs.config import PhysicalParams
from fvcs.errors import ConfigError
from fvcs.free_particle import effective_mass
from fvcs.sweep import OBSERVABLES, get_observable, parse_sweep_spec, run_sweep


def test_parse_range_and_list():
    axes = parse_sweep_spec("lambda=0.1:0.3:3 alpha_im=0.25,0.5")

    assert list(axes) == ["lambda", "alpha_im"]
    assert axes["lambda"] == pytest.approx([0.1, 0.2, 0.3])
    assert axes["alpha_im"] == [0.25, 0.5]


@pytest.mark.parametrize(
    ("spec", "message"),
    [
        ("", "empty sweep spec"),
        ("   ", "empty sweep spec"),
        ("mass=1,2", "unknown sweep parameter 'mass'"),
        ("lambda=0.1 lambda=0.2", "given twice"),
        ("lambda", "not of the form name=values"),
        ("lambda=a,b", "cannot parse sweep values"),
        ("lambda=0.1:0.2", "cannot parse sweep values"),
        ("lambda=0.1:0.2:0", "must be >= 1"),
        ("lambda=,", "no sweep values"),
    ],
)
def test_parse_errors(spec, message):
    with pytest.raises(ConfigError, match=message):
        parse_sweep_spec(spec)


def test_unknown_observable_lists_registry():
    with pytest.raises(ConfigError, match="registry: v_bar, dq2") as info:
        get_observable("speed")

    assert info.value.field == "observable"


def test_registry_columns():
    assert OBSERVABLES["a_bar"].columns == ("a_bar_re", "a_bar_im")
    assert OBSERVABLES["wigner"].columns == ("w",)


def test_rows_follow_product_order():
    table = run_sweep("lambda=0.1,0.2 alpha_im=0.0,1.0", "dq2", PhysicalParams(), threads=2)

    assert table.columns == ["lambda", "alpha_im", "dq2"]
    assert [row[:2] for row in table.rows] == [(0.1, 0.0), (0.1, 1.0), (0.2, 0.0), (0.2, 1.0)]
    assert table.ok


def test_effective_mass_sweep():
    table = run_sweep("lambda=0.1:0.3:3", "effective_mass", PhysicalParams(), threads=1)

    assert table.column("m_star") == pytest.approx([effective_mass(lam) for lam in (0.1, 0.2, 0.3)])


def test_sweep_defaults_come_from_params():
    params = PhysicalParams(lambda_z=0.2, omega=0.0)

    table = run_sweep("p_z=1.0", "v_z", params, threads=1)

    assert table.column("v_z") == pytest.approx([1.0 / effective_mass(0.2)])


def test_amplitude_sweep_at_start_is_alpha():
    table = run_sweep("alpha_re=0.5 alpha_im=0.25", "a_bar", PhysicalParams(lambda_=1.0), threads=1)

    assert table.column("a_bar_re") == pytest.approx([0.5], abs=1e-12)
    assert table.column("a_bar_im") == pytest.approx([0.25], abs=1e-12)


def test_failing_rows_carry_nan_and_a_message():
    table = run_sweep("lambda=0.0,0.5 alpha_im=1.0", "v_bar", PhysicalParams(), threads=1)

    first, second = table.column("v_bar")
    assert math.isnan(first)
    assert 0.0 < second < 1.0
    assert not table.ok
    assert len(table.failures) == 1
    assert table.failures[0].startswith("lambda=0.0, alpha_im=1.0: ")
