import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bellasym.errors import CapacityError, ShapeError, ValidationError
from bellasym.game_model import GameTable, transpose_game
from bellasym.lhv_core import (
    Box,
    DeterministicStrategy,
    check_no_signaling,
    classical_bound,
    classical_bound_bruteforce,
    enumerate_strategies,
    evaluate_box_value,
    n_strategies,
    response_table,
)

from conftest import small_games

V_I3322 = 0.375  # frozen from the brute-force enumeration over 256 pairs


def test_chsh_bound(chsh):
    res = classical_bound(chsh)
    assert res.value == 0.5
    assert res.strategy == DeterministicStrategy((0, 0), (0, 0))
    assert res.diagnostics["strategies"] == 16


def test_i3322_frozen(i3322):
    assert n_strategies(i3322) == 256
    brute, _ = classical_bound_bruteforce(i3322)
    assert brute == V_I3322
    assert abs(classical_bound(i3322).value - V_I3322) <= 1e-12


def test_witness_matches_value(i3322):
    res = classical_bound(i3322)
    assert res.witness.support_size() == 1
    assert res.strategy.value(i3322) == res.value


def test_response_table_is_lexicographic():
    t = response_table(2, 3)
    assert t.shape == (9, 2)
    assert t[0].tolist() == [0, 0] and t[1].tolist() == [0, 1] and t[-1].tolist() == [2, 2]


def test_enumeration_order_and_count(chsh):
    strategies = list(enumerate_strategies(chsh))
    assert len(strategies) == 16
    assert strategies[0] == DeterministicStrategy((0, 0), (0, 0))
    assert strategies[1] == DeterministicStrategy((0, 0), (0, 1))


def test_capacity_error():
    g = GameTable(np.zeros((7, 4, 7, 4)))
    with pytest.raises(CapacityError, match="enum-cap"):
        classical_bound(g)
    with pytest.raises(CapacityError):
        next(enumerate_strategies(g, cap=100))


def test_strategy_checks(chsh):
    with pytest.raises(ShapeError):
        DeterministicStrategy((0,), (0, 0)).check(chsh)
    with pytest.raises(ValidationError):
        DeterministicStrategy((0, 2), (0, 0)).check(chsh)


def test_box_validation():
    with pytest.raises(ShapeError):
        Box(np.ones((2, 2, 2)))
    with pytest.raises(ValidationError):
        Box(np.full((2, 2, 1, 1), 0.3))


def test_pr_box_reaches_one_and_is_no_signaling(chsh):
    p = np.zeros((2, 2, 2, 2))
    for a, b, x, y in np.ndindex(p.shape):
        if (a ^ b) == (x & y):
            p[a, b, x, y] = 0.5
    box = Box(p)
    assert evaluate_box_value(chsh, box) == pytest.approx(1.0)
    assert check_no_signaling(box).max_violation == 0.0


def test_signaling_box_flagged():
    # Bob outputs Alice's setting
    p = np.zeros((2, 2, 2, 2))
    for x, y in np.ndindex(2, 2):
        p[0, x, x, y] = 1.0
    rep = check_no_signaling(Box(p))
    assert not rep.is_no_signaling_a_to_b
    assert rep.is_no_signaling_b_to_a
    assert rep.violation_a_to_b == 1.0


def test_shape_mismatch(chsh, i3322):
    with pytest.raises(ShapeError):
        evaluate_box_value(i3322, Box.uniform(chsh))


@given(small_games(max_settings=2, uniform=False))
def test_vectorized_matches_bruteforce(g):
    brute, _ = classical_bound_bruteforce(g)
    assert classical_bound(g).value == pytest.approx(brute, abs=1e-12)


@given(small_games(max_settings=2), st.lists(st.floats(0, 1), min_size=3, max_size=3))
def test_mixtures_never_beat_bound(g, raw):
    strategies = list(enumerate_strategies(g))
    rng = np.random.default_rng(len(strategies))
    picks = rng.choice(len(strategies), size=3)
    w = np.array(raw) + 1e-3
    w /= w.sum()
    box = Box.mixture([strategies[i].to_box(g) for i in picks], w)
    assert evaluate_box_value(g, box) <= classical_bound(g).value + 1e-12
    assert check_no_signaling(box).max_violation <= 1e-9


@given(small_games(max_settings=2))
def test_bound_transpose_invariant(g):
    assert classical_bound(g).value == pytest.approx(classical_bound(transpose_game(g)).value, abs=1e-12)


@given(small_games(max_settings=2), st.floats(0.1, 10))
def test_bound_scales(g, k):
    assert classical_bound(g.scaled(k)).value == pytest.approx(k * classical_bound(g).value, abs=1e-9)
