"""Asymmetry indicators, budget sweeps and table symmetry checks.

Every indicator is computed from separate solver runs for the two budget
orders; nothing is inferred from the table's symmetry.  A sweep prepares the
atom space once and caches one solve per distinct budget.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .game_model import GameTable, transpose_game
from .solver import DEFAULT_HEIGHTS, AtomSpace, prepare, solve_adversarial_bound

SWEEP_MODES = ("one-param", "two-param")
CSV_COLUMNS = ("xi_x", "xi_y", "r_xy", "r_yx", "delta", "d_a", "d_b")


@dataclass(frozen=True)
class SweepConfig:
    """A uniform grid of ``steps`` knowledge values on ``[0, 1]``."""

    game: GameTable
    steps: int = 21
    heights: int = DEFAULT_HEIGHTS
    mode: str = "one-param"

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 2:
            raise ValidationError(f"steps must be an integer >= 2, got {self.steps}")
        if int(self.heights) != self.heights or self.heights < 2:
            raise ValidationError(f"heights must be an integer >= 2, got {self.heights}")
        if self.mode not in SWEEP_MODES:
            raise ValidationError(f"mode must be one of {SWEEP_MODES}, got {self.mode!r}")

    def grid(self) -> np.ndarray:
        g = np.linspace(0.0, 1.0, int(self.steps))
        g[0], g[-1] = 0.0, 1.0
        return g


@dataclass(frozen=True)
class CurvePoint:
    """One sweep row.

    ``r_xy`` and ``r_yx`` are the bounds at the two budget orders and
    ``delta`` their absolute gap.  ``d_a`` is the gain from knowledge
    ``xi_x`` of Alice's settings alone and ``d_b`` the gain from knowledge
    ``xi_y`` of Bob's settings alone.  In one-parameter rows
    ``xi_x == xi_y == xi``, ``r_xy`` is the bound at ``(xi, 0)`` and
    ``r_yx`` the bound at ``(0, xi)``.
    """

    xi_x: float
    xi_y: float
    r_xy: float
    r_yx: float
    delta: float
    d_a: float
    d_b: float

    def as_row(self) -> tuple[float, ...]:
        return tuple(getattr(self, c) for c in CSV_COLUMNS)


@dataclass
class BoundCache:
    """Solver values keyed by budget, sharing one prepared atom space."""

    game: GameTable
    heights: int = DEFAULT_HEIGHTS
    space: AtomSpace | None = None
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.space is None:
            self.space = prepare(self.game, self.heights)

    def __call__(self, xi_x: float, xi_y: float) -> float:
        key = (float(xi_x), float(xi_y))
        if key not in self.values:
            res = solve_adversarial_bound(self.game, key, self.heights, space=self.space)
            self.values[key] = res.value
        return self.values[key]


def _check_xi(*xis: float) -> None:
    for v in xis:
        if not 0.0 <= v <= 1.0:
            raise ValidationError(f"knowledge {v} outside [0, 1]")


def delta_one_param(g: GameTable, xi: float, heights: int = DEFAULT_HEIGHTS, *, cache: BoundCache | None = None) -> CurvePoint:
    """Gap between knowledge ``xi`` of Alice's settings only and of Bob's only."""
    _check_xi(xi)
    r = cache or BoundCache(g, heights)
    base = r(0.0, 0.0)
    ra, rb = r(xi, 0.0), r(0.0, xi)
    return CurvePoint(xi, xi, ra, rb, abs(ra - rb), ra - base, rb - base)


def delta_two_param(g: GameTable, xi_x: float, xi_y: float, heights: int = DEFAULT_HEIGHTS, *,
                    cache: BoundCache | None = None) -> CurvePoint:
    """Gap between the bounds at ``(xi_x, xi_y)`` and at ``(xi_y, xi_x)``."""
    _check_xi(xi_x, xi_y)
    r = cache or BoundCache(g, heights)
    base = r(0.0, 0.0)
    r_xy, r_yx = r(xi_x, xi_y), r(xi_y, xi_x)
    return CurvePoint(xi_x, xi_y, r_xy, r_yx, abs(r_xy - r_yx), r(xi_x, 0.0) - base, r(0.0, xi_y) - base)


def sweep_curve(cfg: SweepConfig) -> list[CurvePoint]:
    """All grid rows in ascending knowledge order.

    Two-parameter sweeps cover the full grid, ordered by ``xi_x`` then
    ``xi_y``.  Solver errors propagate and no partial curve is returned.
    """
    cache = BoundCache(cfg.game, cfg.heights)
    grid = cfg.grid()
    if cfg.mode == "one-param":
        return [delta_one_param(cfg.game, float(xi), cfg.heights, cache=cache) for xi in grid]
    return [
        delta_two_param(cfg.game, float(a), float(b), cfg.heights, cache=cache)
        for a in grid
        for b in grid
    ]


def format_number(v: float) -> str:
    return "%.12g" % v


def curve_to_csv(points: list[CurvePoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for p in points:
        w.writerow([format_number(v) for v in p.as_row()])
    return buf.getvalue()


@dataclass(frozen=True)
class SymmetryReport:
    transpose_invariant: bool
    first_differing_entry: tuple[int, int, int, int] | None
    reason: str

    def to_dict(self) -> dict:
        return {
            "transpose_invariant": self.transpose_invariant,
            "first_differing_entry": list(self.first_differing_entry) if self.first_differing_entry else None,
            "reason": self.reason,
        }


def check_symmetry(g: GameTable, tol: float = 0.0) -> SymmetryReport:
    """Compare ``g`` entry by entry with its party-swapped table.

    The differing index is ``(x, a, y, b)`` in the original table, first in
    lexicographic order.  Marginals are compared too.
    """
    n_a, m_a, n_b, m_b = g.shape
    if (n_a, m_a) != (n_b, m_b):
        return SymmetryReport(False, None, f"shape obstruction: ({n_a}, {m_a}) settings/outcomes vs ({n_b}, {m_b})")
    t = transpose_game(g)
    diff = np.argwhere(np.abs(g.coeff - t.coeff) > tol)
    if diff.size:
        return SymmetryReport(False, tuple(int(i) for i in diff[0]), "coefficients differ under transposition")
    if np.max(np.abs(g.marginal_a - g.marginal_b)) > tol:
        return SymmetryReport(False, None, "setting marginals differ between the parties")
    return SymmetryReport(True, None, "table is invariant under transposition")
