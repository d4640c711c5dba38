"""Deterministic local strategies, Bell values of boxes and the classical bound."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterator

import numpy as np

from .errors import CapacityError, ShapeError, ValidationError
from .game_model import PROB_TOL, GameTable

if TYPE_CHECKING:
    from .adversary import EveStrategy, KnowledgeBudget

DEFAULT_ENUMERATION_CAP = 2**24
NO_SIGNALING_TOL = 1e-9
TIE_TOL = 1e-12


@dataclass(frozen=True)
class DeterministicStrategy:
    """Response functions ``a = alice[x]`` and ``b = bob[y]``."""

    alice: tuple[int, ...]
    bob: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "alice", tuple(int(v) for v in self.alice))
        object.__setattr__(self, "bob", tuple(int(v) for v in self.bob))

    def check(self, g: GameTable) -> None:
        if len(self.alice) != g.n_settings_a or len(self.bob) != g.n_settings_b:
            raise ShapeError("strategy length does not match the number of settings")
        if any(not 0 <= a < g.n_outcomes_a for a in self.alice) or any(
            not 0 <= b < g.n_outcomes_b for b in self.bob
        ):
            raise ValidationError("strategy response outside the outcome range")

    def to_box(self, g: GameTable) -> "Box":
        self.check(g)
        return Box(product_box_probs(_one_hot(self.alice, g.n_outcomes_a),
                                     _one_hot(self.bob, g.n_outcomes_b)))

    def value(self, g: GameTable) -> float:
        x = np.arange(g.n_settings_a)
        y = np.arange(g.n_settings_b)
        block = g.coeff[x[:, None], np.array(self.alice)[:, None], y[None, :], np.array(self.bob)[None, :]]
        return float(np.sum(g.setting_weights() * block))


def _one_hot(resp, m: int) -> np.ndarray:
    out = np.zeros((len(resp), m))
    out[np.arange(len(resp)), list(resp)] = 1.0
    return out


def product_box_probs(resp_a: np.ndarray, resp_b: np.ndarray) -> np.ndarray:
    """``p[a, b, x, y] = p(a|x) p(b|y)`` from ``resp_a[x, a]`` and ``resp_b[y, b]``."""
    return np.einsum("xa,yb->abxy", resp_a, resp_b)


@dataclass(frozen=True, eq=False)
class Box:
    """Conditional distributions ``probs[a, b, x, y] = p(ab|xy)``."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 4:
            raise ShapeError(f"box must be 4-dimensional [a,b,x,y], got {p.shape}")
        if np.any(p < -PROB_TOL) or not np.all(np.isfinite(p)):
            raise ValidationError("box has negative or non-finite entries")
        sums = p.sum(axis=(0, 1))
        if np.max(np.abs(sums - 1.0)) > PROB_TOL:
            raise ValidationError("box is not normalized for every (x, y)")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.probs.shape

    @classmethod
    def uniform(cls, g: GameTable) -> "Box":
        m = g.n_outcomes_a * g.n_outcomes_b
        return cls(np.full((g.n_outcomes_a, g.n_outcomes_b, g.n_settings_a, g.n_settings_b), 1.0 / m))

    @classmethod
    def mixture(cls, boxes, weights) -> "Box":
        weights = np.asarray(weights, dtype=float)
        return cls(np.tensordot(weights, np.stack([b.probs for b in boxes]), axes=1))


def evaluate_box_value(g: GameTable, box: Box) -> float:
    """Referee-averaged pay-off of ``box`` in game ``g``."""
    m_a, m_b, n_a, n_b = box.shape
    if (n_a, m_a, n_b, m_b) != g.shape:
        raise ShapeError(f"box shape {box.shape} does not match game shape {g.shape}")
    return float(np.einsum("abxy,xayb,x,y->", box.probs, g.coeff, g.marginal_a, g.marginal_b))


# --------------------------------------------------------------------------
# enumeration


def n_strategies(g: GameTable) -> int:
    return g.n_outcomes_a**g.n_settings_a * g.n_outcomes_b**g.n_settings_b


def _check_cap(g: GameTable, cap: int) -> None:
    total = n_strategies(g)
    if total > cap:
        raise CapacityError(
            f"{total} deterministic strategy pairs exceed the enumeration cap {cap}; "
            "raise it with --enum-cap (or the `cap` argument)"
        )


def response_table(n_settings: int, n_outcomes: int) -> np.ndarray:
    """All response functions as rows, lexicographic (row index = base-M encoding)."""
    return np.array(list(itertools.product(range(n_outcomes), repeat=n_settings)), dtype=np.int64).reshape(
        -1, n_settings
    )


def enumerate_strategies(g: GameTable, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[DeterministicStrategy]:
    """Stream every (f, g) pair once, lexicographic in f then g."""
    _check_cap(g, cap)
    for f in itertools.product(range(g.n_outcomes_a), repeat=g.n_settings_a):
        for h in itertools.product(range(g.n_outcomes_b), repeat=g.n_settings_b):
            yield DeterministicStrategy(f, h)


@dataclass
class BoundResult:
    """A bound value with the strategy that attains it.

    ``witness`` is an Eve strategy re-evaluating to ``value``; for the plain
    classical bound it is the singleton-alphabet strategy built from
    ``strategy``.
    """

    value: float
    witness: "EveStrategy | None" = None
    budget: "KnowledgeBudget | None" = None
    strategy: DeterministicStrategy | None = None
    diagnostics: dict = field(default_factory=dict)


def classical_bound(g: GameTable, cap: int = DEFAULT_ENUMERATION_CAP) -> BoundResult:
    """Maximum over deterministic strategy pairs.

    For fixed Alice response ``f`` the best Bob response is chosen per setting,
    so only Alice's ``M_A**N_A`` responses are scanned explicitly.  Ties go to
    the lexicographically smallest ``(f, g)``.
    """
    from .adversary import EveStrategy, KnowledgeBudget

    _check_cap(g, cap)
    fa = response_table(g.n_settings_a, g.n_outcomes_a)
    xs = np.arange(g.n_settings_a)
    # t[f, y, b] = sum_x p(x) c[x, f(x), y, b]
    t = np.einsum("x,fxyb->fyb", g.marginal_a, g.coeff[xs[None, :], fa])
    best_b = t.argmax(axis=2)  # first maximum -> smallest b
    per_f = np.einsum("y,fy->f", g.marginal_b, t.max(axis=2))
    top = per_f.max()
    f_idx = int(np.flatnonzero(per_f >= top - TIE_TOL)[0])
    strat = DeterministicStrategy(tuple(fa[f_idx]), tuple(best_b[f_idx]))
    value = strat.value(g)
    witness = EveStrategy.from_deterministic(g, strat)
    return BoundResult(
        value=value,
        witness=witness,
        budget=KnowledgeBudget.for_game(g, 0.0, 0.0),
        strategy=strat,
        diagnostics={"method": "enumeration", "strategies": n_strategies(g)},
    )


def classical_bound_bruteforce(g: GameTable, cap: int = DEFAULT_ENUMERATION_CAP) -> tuple[float, DeterministicStrategy]:
    """Reference path: evaluate every product box through :func:`evaluate_box_value`."""
    best, arg = -np.inf, None
    for s in enumerate_strategies(g, cap):
        v = evaluate_box_value(g, s.to_box(g))
        if v > best + TIE_TOL:
            best, arg = v, s
    return best, arg


# --------------------------------------------------------------------------
# no-signaling


@dataclass(frozen=True)
class SignalingReport:
    is_no_signaling_a_to_b: bool
    is_no_signaling_b_to_a: bool
    max_violation: float
    violation_a_to_b: float
    violation_b_to_a: float


def check_no_signaling(box: Box, tol: float = NO_SIGNALING_TOL) -> SignalingReport:
    """Compare each party's outcome marginals across the other party's settings."""
    bob_marg = box.probs.sum(axis=0)  # [b, x, y]
    alice_marg = box.probs.sum(axis=1)  # [a, x, y]
    a_to_b = float(np.max(bob_marg.max(axis=1) - bob_marg.min(axis=1)))
    b_to_a = float(np.max(alice_marg.max(axis=2) - alice_marg.min(axis=2)))
    return SignalingReport(
        is_no_signaling_a_to_b=a_to_b <= tol,
        is_no_signaling_b_to_a=b_to_a <= tol,
        max_violation=max(a_to_b, b_to_a),
        violation_a_to_b=a_to_b,
        violation_b_to_a=b_to_a,
    )
