import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from bellasym.game_model import GameTable, builtin_game

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def chsh():
    return builtin_game("chsh")


@pytest.fixture(scope="session")
def i3322():
    return builtin_game("i3322")


def random_games(n: int, seed: int = 2024, low: int = -2, high: int = 2) -> list[GameTable]:
    """2-setting, 2-outcome games with integer coefficients in [low, high]."""
    rng = np.random.default_rng(seed)
    return [GameTable(rng.integers(low, high + 1, size=(2, 2, 2, 2))) for _ in range(n)]


@st.composite
def small_games(draw, max_settings=3, max_outcomes=2, uniform=True):
    n_a = draw(st.integers(1, max_settings))
    n_b = draw(st.integers(1, max_settings))
    m_a = draw(st.integers(1, max_outcomes))
    m_b = draw(st.integers(1, max_outcomes))
    vals = draw(st.lists(st.integers(-3, 3), min_size=n_a * m_a * n_b * m_b, max_size=n_a * m_a * n_b * m_b))
    coeff = np.array(vals, dtype=float).reshape(n_a, m_a, n_b, m_b)
    if uniform:
        return GameTable(coeff)
    wa = np.array(draw(st.lists(st.integers(1, 5), min_size=n_a, max_size=n_a)), dtype=float)
    wb = np.array(draw(st.lists(st.integers(1, 5), min_size=n_b, max_size=n_b)), dtype=float)
    return GameTable(coeff, wa / wa.sum(), wb / wb.sum())


@st.composite
def games_2222(draw):
    vals = draw(st.lists(st.integers(-2, 2), min_size=16, max_size=16))
    return GameTable(np.array(vals, dtype=float).reshape(2, 2, 2, 2))
