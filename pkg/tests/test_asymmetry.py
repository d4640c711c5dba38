import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellasym.asymmetry import (
    CSV_COLUMNS,
    BoundCache,
    SweepConfig,
    check_symmetry,
    curve_to_csv,
    delta_one_param,
    delta_two_param,
    sweep_curve,
)
from bellasym.errors import ValidationError
from bellasym.game_model import GameTable, transpose_game

from conftest import games_2222


def test_config_validation(chsh):
    with pytest.raises(ValidationError):
        SweepConfig(chsh, steps=1)
    with pytest.raises(ValidationError):
        SweepConfig(chsh, mode="three")
    with pytest.raises(ValidationError):
        SweepConfig(chsh, heights=1)
    grid = SweepConfig(chsh, steps=7).grid()
    assert grid[0] == 0.0 and grid[-1] == 1.0 and len(grid) == 7


def test_i3322_full_knowledge_delta(i3322):
    p = delta_one_param(i3322, 1.0)
    assert p.delta == pytest.approx(0.125, abs=1e-9)
    assert p.r_xy == pytest.approx(0.6875, abs=1e-9) and p.r_yx == pytest.approx(0.5625, abs=1e-9)
    assert p.d_a == pytest.approx(0.3125, abs=1e-9) and p.d_b == pytest.approx(0.1875, abs=1e-9)


def test_zero_knowledge_point(i3322):
    p = delta_one_param(i3322, 0.0)
    assert (p.delta, p.d_a, p.d_b) == (0.0, 0.0, 0.0)


def test_range_checked(chsh):
    with pytest.raises(ValidationError):
        delta_one_param(chsh, 1.5)
    with pytest.raises(ValidationError):
        delta_two_param(chsh, 0.2, -0.1)


def test_two_param_reduces_to_one_param(i3322):
    cache = BoundCache(i3322)
    one = delta_one_param(i3322, 0.4, cache=cache)
    two = delta_two_param(i3322, 0.4, 0.0, cache=cache)
    assert two.delta == one.delta and two.r_xy == one.r_xy and two.r_yx == one.r_yx


def test_equal_budgets_zero_delta(i3322):
    assert delta_two_param(i3322, 0.6, 0.6).delta == 0.0


def test_chsh_sweep_flat(chsh):
    pts = sweep_curve(SweepConfig(chsh, steps=6))
    assert all(p.delta <= 1e-9 for p in pts)
    pts2 = sweep_curve(SweepConfig(chsh, steps=3, mode="two-param"))
    assert len(pts2) == 9 and all(p.delta <= 1e-9 for p in pts2)


def test_endpoint_only_sweep(i3322):
    pts = sweep_curve(SweepConfig(i3322, steps=2))
    assert [p.xi_x for p in pts] == [0.0, 1.0]


def test_two_param_order(chsh):
    pts = sweep_curve(SweepConfig(chsh, steps=3, mode="two-param"))
    keys = [(p.xi_x, p.xi_y) for p in pts]
    assert keys == sorted(keys)


def test_csv(chsh):
    text = curve_to_csv(sweep_curve(SweepConfig(chsh, steps=3)))
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[2] == "0.5,0.5,0.75,0.75,0,0.25,0.25"
    assert text == curve_to_csv(sweep_curve(SweepConfig(chsh, steps=3)))


def test_symmetry_reports(chsh, i3322):
    assert check_symmetry(chsh).transpose_invariant
    r = check_symmetry(i3322)
    assert not r.transpose_invariant
    x, a, y, b = r.first_differing_entry
    assert i3322.coeff[x, a, y, b] != i3322.coeff[y, b, x, a]
    g = GameTable(np.zeros((2, 2, 3, 2)))
    r = check_symmetry(g)
    assert not r.transpose_invariant and "shape" in r.reason


def test_symmetry_checks_marginals():
    g = GameTable(np.zeros((2, 2, 2, 2)), [0.25, 0.75], [0.5, 0.5])
    assert not check_symmetry(g).transpose_invariant


@settings(max_examples=10)
@given(games_2222(), st.sampled_from([0.25, 0.5, 1.0]))
def test_delta_transpose_invariant(g, xi):
    a = delta_one_param(g, xi, 4)
    b = delta_one_param(transpose_game(g), xi, 4)
    assert a.delta == pytest.approx(b.delta, abs=1e-9)
    assert a.d_a == pytest.approx(b.d_b, abs=1e-9)


@settings(max_examples=10)
@given(games_2222())
def test_sweep_monotone(g):
    pts = sweep_curve(SweepConfig(g, steps=5, heights=4))
    for p, q in zip(pts, pts[1:]):
        assert q.r_xy >= p.r_xy - 1e-9 and q.r_yx >= p.r_yx - 1e-9
        assert q.d_a >= p.d_a - 1e-9 and q.d_b >= p.d_b - 1e-9
    assert all(p.d_a >= -1e-9 and p.d_b >= -1e-9 for p in pts)


def test_symmetric_table_has_zero_delta():
    base = np.random.default_rng(1).integers(-2, 3, (2, 2, 2, 2)).astype(float)
    sym = base + base.transpose(2, 3, 0, 1)
    g = GameTable(sym)
    assert check_symmetry(g).transpose_invariant
    pts = sweep_curve(SweepConfig(g, steps=5))
    assert all(p.delta <= 1e-9 for p in pts)
