"""Knowledge-dependent local bound by linear programming.

Eve's hidden variable for each party is taken from a finite *expanded
alphabet*: every pair (deterministic response function, two-level setting
distribution).  A two-level distribution puts probability ``h`` on each
setting of a peak set ``S`` and the remainder evenly on the rest; heights
run over a geometric grid from ``1/N`` to ``1/|S|``.

With the alphabets fixed, the optimal joint weights solve an LP whose
variables are atom pairs and whose rows are: normalization, consistency
of the referee's setting statistics and one min-entropy budget row per
party.
The pair count grows quadratically with the alphabets (about 2.5 million
pairs for I3322 at ``K = 8``) while the row count stays tiny, so the LP is
solved by column generation: a restricted master problem is solved with
:func:`bellasym.lp.lp_solve` and columns with positive reduced cost are
priced in from the full payoff matrix until none remain.

Because the pay-off and the marginal rows are linear in a setting row and
``-log2 h`` is convex, every height strictly inside the grid is dominated by
a mixture of the grid endpoints ``1/N`` and ``1/|S|``; the flat
distributions "uniform on S" are enough to reach the supremum over all
setting rows.  The LP value therefore does not depend on ``K``.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np

from .adversary import EveStrategy, KnowledgeBudget
from .errors import SolverError, UnsupportedInputError, ValidationError
from .game_model import GameTable, algebraic_max
from .lhv_core import BoundResult, response_table
from .lp import DEFAULT_PIVOT_CAP, FEAS_TOL, OPT_TOL, lp_solve

DEFAULT_HEIGHTS = 8
PRICING_BATCH = 64
MAX_CG_ROUNDS = 10_000


@dataclass(frozen=True)
class TwoLevelDistribution:
    """Probability ``peak_prob`` on each setting in ``peak_set``, ``tail_prob`` elsewhere."""

    n_settings: int
    peak_set: frozenset
    peak_prob: float
    tail_prob: float

    def __post_init__(self):
        k = len(self.peak_set)
        if k == 0 or not all(0 <= s < self.n_settings for s in self.peak_set):
            raise ValidationError("peak set must be a non-empty subset of the settings")
        if not self.peak_prob >= self.tail_prob >= 0:
            raise ValidationError("need peak_prob >= tail_prob >= 0")
        total = k * self.peak_prob + (self.n_settings - k) * self.tail_prob
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"two-level distribution sums to {total}")

    @classmethod
    def from_height(cls, n: int, peak_set, h: float) -> "TwoLevelDistribution":
        peak_set = frozenset(peak_set)
        k = len(peak_set)
        tail = 0.0 if k == n else min(max((1.0 - k * h) / (n - k), 0.0), h)
        return cls(n, peak_set, h, tail)

    def row(self) -> np.ndarray:
        r = np.full(self.n_settings, self.tail_prob)
        r[list(self.peak_set)] = self.peak_prob
        return r

    @property
    def max_prob(self) -> float:
        return self.peak_prob


def height_grid(n: int, k_set: int, heights: int) -> np.ndarray:
    """``heights`` points geometric between ``1/n`` and ``1/k_set``, endpoints exact."""
    lo, hi = 1.0 / n, 1.0 / k_set
    grid = lo * (hi / lo) ** (np.arange(heights) / (heights - 1))
    grid[0], grid[-1] = lo, hi
    return grid


@dataclass(eq=False)
class ExpandedAlphabet:
    """All (response, setting-distribution) atoms of one party.

    ``responses[i]`` is the response function of atom ``i``, ``settings[i]``
    its setting row, ``log_peak[i] = log2`` of that row's maximum.
    """

    party: str
    distributions: list
    responses: np.ndarray
    settings: np.ndarray
    log_peak: np.ndarray
    dist_index: np.ndarray
    resp_index: np.ndarray

    def __len__(self) -> int:
        return self.responses.shape[0]

    @property
    def atoms(self) -> list[tuple[tuple[int, ...], TwoLevelDistribution]]:
        return [(tuple(self.responses[i]), self.distributions[d]) for i, d in enumerate(self.dist_index)]


def build_expanded_alphabet(g: GameTable, party: str, heights: int = DEFAULT_HEIGHTS) -> ExpandedAlphabet:
    """Enumerate atoms for ``party`` ('A' or 'B'), deduplicating repeated setting rows."""
    if heights < 2:
        raise ValidationError(f"heights must be >= 2, got {heights}")
    if party == "A":
        n, m, marginal = g.n_settings_a, g.n_outcomes_a, g.marginal_a
    elif party == "B":
        n, m, marginal = g.n_settings_b, g.n_outcomes_b, g.marginal_b
    else:
        raise ValidationError(f"party must be 'A' or 'B', got {party!r}")

    dists: list[TwoLevelDistribution] = []
    rows: list[np.ndarray] = []
    seen: set[bytes] = set()

    def add(d: TwoLevelDistribution):
        r = d.row()
        key = r.tobytes()
        if key not in seen:
            seen.add(key)
            dists.append(d)
            rows.append(r)

    add(TwoLevelDistribution.from_height(n, range(n), 1.0 / n))
    for size in range(1, n + 1):
        for peak in itertools.combinations(range(n), size):
            for h in height_grid(n, size, heights):
                add(TwoLevelDistribution.from_height(n, peak, float(h)))

    settings = np.array(rows)
    if not np.allclose(marginal, 1.0 / n, rtol=0, atol=1e-12):
        # keeps the zero-knowledge budget feasible for non-uniform references
        settings = np.vstack([settings, marginal])
        dists.append(None)

    resp = response_table(n, m)
    n_d, n_r = settings.shape[0], resp.shape[0]
    dist_index = np.repeat(np.arange(n_d), n_r)
    resp_index = np.tile(np.arange(n_r), n_d)
    return ExpandedAlphabet(
        party=party,
        distributions=dists,
        responses=resp[resp_index],
        settings=settings[dist_index],
        log_peak=np.log2(settings.max(axis=1))[dist_index],
        dist_index=dist_index,
        resp_index=resp_index,
    )


@dataclass(eq=False)
class AtomSpace:
    """Both expanded alphabets of a game and the pay-off of every atom pair."""

    game: GameTable
    heights: int
    alpha_a: ExpandedAlphabet
    alpha_b: ExpandedAlphabet
    payoff: np.ndarray  # [i, j] == factor_a @ factor_b.T
    factor_a: np.ndarray
    factor_b: np.ndarray


def prepare(g: GameTable, heights: int = DEFAULT_HEIGHTS) -> AtomSpace:
    """Build the alphabets and the pair pay-off matrix once; reuse across budgets."""
    alpha_a = build_expanded_alphabet(g, "A", heights)
    alpha_b = build_expanded_alphabet(g, "B", heights)
    xs = np.arange(g.n_settings_a)
    ys = np.arange(g.n_settings_b)
    # t[i, y, b] = sum_x p_i(x) c[x, f_i(x), y, b]
    t = np.einsum("ix,ixyb->iyb", alpha_a.settings, g.coeff[xs[None, :], alpha_a.responses])
    # q[j, y, b] = p_j(y) [b == g_j(y)]
    q = np.zeros((len(alpha_b), g.n_settings_b, g.n_outcomes_b))
    q[np.arange(len(alpha_b))[:, None], ys[None, :], alpha_b.responses] = alpha_b.settings
    fa = t.reshape(len(alpha_a), -1)
    fb = q.reshape(len(alpha_b), -1)
    return AtomSpace(g, heights, alpha_a, alpha_b, fa @ fb.T, fa, fb)


SETTING_CONSTRAINTS = ("joint", "marginal")


class _Master:
    """Constraint rows of the pair LP and their dual pricing.

    ``joint`` keeps the referee's joint setting distribution ``p(x) p(y)``
    intact; ``marginal`` only keeps each party's own setting frequencies,
    which lets correlated hidden variables skew which setting pairs occur.
    Rows: normalization, setting-statistics rows (one redundant row
    dropped), then the two budget rows.
    """

    def __init__(self, space: AtomSpace, budget: KnowledgeBudget, constraint: str):
        g = space.game
        self.space = space
        self.constraint = constraint
        pa, pb = space.alpha_a.settings, space.alpha_b.settings
        if constraint == "joint":
            target = np.outer(g.marginal_a, g.marginal_b).ravel()[:-1]
        elif constraint == "marginal":
            target = np.concatenate([g.marginal_a[:-1], g.marginal_b[:-1]])
        else:
            raise ValidationError(f"setting constraint must be one of {SETTING_CONSTRAINTS}")
        self.rhs_eq = np.concatenate([[1.0], target])
        self.rhs_budget = np.array(
            [-(1.0 - budget.xi_x) * budget.entropy_x, -(1.0 - budget.xi_y) * budget.entropy_y]
        )
        self.n_eq = self.rhs_eq.size
        self.n_rows = self.n_eq + 2
        self._pa, self._pb = pa, pb

    def columns(self, ii: np.ndarray, jj: np.ndarray) -> np.ndarray:
        pa, pb = self._pa[ii], self._pb[jj]
        if self.constraint == "joint":
            body = (pa[:, :, None] * pb[:, None, :]).reshape(ii.size, -1)[:, :-1]
        else:
            body = np.column_stack([pa[:, :-1], pb[:, :-1]])
        return np.column_stack(
            [np.ones(ii.size), body, self.space.alpha_a.log_peak[ii], self.space.alpha_b.log_peak[jj]]
        ).T

    def reduced_costs(self, y_eq: np.ndarray, y_ub: np.ndarray) -> np.ndarray:
        """``payoff - dual price`` for every atom pair, as one low-rank product."""
        g = self.space.game
        one_a = np.ones((self._pa.shape[0], 1))
        one_b = np.ones((self._pb.shape[0], 1))
        offset_a = (y_eq[0] + self.space.alpha_a.log_peak * y_ub[0])[:, None]
        offset_b = (self.space.alpha_b.log_peak * y_ub[1])[:, None]
        if self.constraint == "joint":
            ymat = np.append(y_eq[1:], 0.0).reshape(g.n_settings_a, g.n_settings_b)
            left = [self._pa @ ymat, offset_a, one_a]
            right = [self._pb, one_b, offset_b]
        else:
            na = g.n_settings_a - 1
            offset_a = offset_a + (self._pa[:, :-1] @ y_eq[1 : 1 + na])[:, None]
            offset_b = offset_b + (self._pb[:, :-1] @ y_eq[1 + na :])[:, None]
            left = [offset_a, one_a]
            right = [one_b, offset_b]
        lhs = np.hstack([self.space.factor_a] + [-m for m in left])
        rhs = np.hstack([self.space.factor_b] + right)
        return lhs @ rhs.T


def solve_adversarial_bound(
    g: GameTable,
    budget: KnowledgeBudget | tuple[float, float],
    heights: int = DEFAULT_HEIGHTS,
    *,
    space: AtomSpace | None = None,
    exact_budget: bool = False,
    setting_constraint: str = "joint",
    pivot_cap: int = DEFAULT_PIVOT_CAP,
) -> BoundResult:
    """Largest game value Eve reaches while leaking at most the given knowledge.

    ``budget`` caps the relative knowledge of each party's settings.  With
    ``exact_budget`` the entropy rows are equalities, i.e. Eve must use
    exactly the stated knowledge.  Pass a prepared ``space`` to amortize the
    pay-off matrix over many budgets.
    """
    t0 = time.perf_counter()
    if not isinstance(budget, KnowledgeBudget):
        budget = KnowledgeBudget.for_game(g, *budget)
    if space is None:
        space = prepare(g, heights)
    elif space.game is not g or space.heights != heights:
        raise ValidationError("prepared atom space belongs to a different game or height count")
    unvalidated = not g.has_uniform_marginals()
    master = _Master(space, budget, setting_constraint)

    # every pair of zero-knowledge atoms is feasible; add the best pair overall
    ref = 0 if not unvalidated else space.alpha_a.dist_index.max()
    ref_b = 0 if not unvalidated else space.alpha_b.dist_index.max()
    ii, jj = np.meshgrid(
        np.flatnonzero(space.alpha_a.dist_index == ref),
        np.flatnonzero(space.alpha_b.dist_index == ref_b),
        indexing="ij",
    )
    # reference and point-mass rows paired across parties; product mixtures
    # of these meet any budget with equality
    pa, pb = _anchor_atoms(space.alpha_a, ref), _anchor_atoms(space.alpha_b, ref_b)
    ai, aj = np.meshgrid(pa, pb, indexing="ij")
    best = np.unravel_index(int(np.argmax(space.payoff)), space.payoff.shape)
    ii, jj = _dedup(np.concatenate([ii.ravel(), ai.ravel(), [best[0]]]),
                    np.concatenate([jj.ravel(), aj.ravel(), [best[1]]]))
    in_master = np.zeros(space.payoff.shape, dtype=bool)
    in_master[ii, jj] = True

    pivots = 0
    rounds = 0
    while True:
        rounds += 1
        if rounds > MAX_CG_ROUNDS:
            raise SolverError("column generation did not converge", {"rounds": rounds, "pivots": pivots})
        cols = master.columns(ii, jj)
        obj = space.payoff[ii, jj]
        try:
            if exact_budget:
                res = lp_solve(obj, A_eq=cols, b_eq=np.concatenate([master.rhs_eq, master.rhs_budget]),
                               pivot_cap=pivot_cap - pivots)
                y_eq, y_ub = res.duals_eq[: master.n_eq], res.duals_eq[master.n_eq :]
            else:
                res = lp_solve(obj, A_eq=cols[: master.n_eq], b_eq=master.rhs_eq,
                               A_ub=cols[master.n_eq :], b_ub=master.rhs_budget,
                               pivot_cap=pivot_cap - pivots)
                y_eq, y_ub = res.duals_eq, res.duals_ub
        except SolverError as exc:
            exc.diagnostics.update({"rounds": rounds, "columns": int(ii.size)})
            raise
        pivots += res.pivots
        reduced = master.reduced_costs(y_eq, y_ub)
        # best partner of every Alice atom; the most attractive rows enter
        best_j = reduced.argmax(axis=1)
        best_rc = reduced[np.arange(best_j.size), best_j]
        rows = np.flatnonzero((best_rc > OPT_TOL) & ~in_master[np.arange(best_j.size), best_j])
        if rows.size == 0:
            break
        rows = rows[np.argsort(-best_rc[rows], kind="stable")[:PRICING_BATCH]]
        ni, nj = rows, best_j[rows]
        in_master[ni, nj] = True
        ii, jj = np.concatenate([ii, ni]), np.concatenate([jj, nj])

    witness = _assemble_witness(space, ii, jj, res.x)
    used_a = float(space.alpha_a.log_peak[ii] @ res.x)
    used_b = float(space.alpha_b.log_peak[jj] @ res.x)
    diagnostics = {
        "method": "column-generation LP",
        "setting_constraint": setting_constraint,
        "pivots": pivots,
        "rounds": rounds,
        "columns": int(ii.size),
        "atoms_a": len(space.alpha_a),
        "atoms_b": len(space.alpha_b),
        "rows": master.n_rows - len(res.dropped_rows),
        "support": int(np.count_nonzero(res.x > 0)),
        "residual": res.residual,
        "budget_tight_a": bool(abs(used_a - master.rhs_budget[0]) <= FEAS_TOL),
        "budget_tight_b": bool(abs(used_b - master.rhs_budget[1]) <= FEAS_TOL),
        "exact_budget": exact_budget,
        "unvalidated": unvalidated,
        "seconds": time.perf_counter() - t0,
    }
    return BoundResult(value=res.optimum, witness=witness, budget=budget, diagnostics=diagnostics)


def _anchor_atoms(alpha: ExpandedAlphabet, ref: int) -> np.ndarray:
    """First atom of the reference row and of every point-mass row."""
    dists = np.unique(alpha.dist_index[(alpha.dist_index == ref) | (alpha.log_peak == 0.0)])
    return np.array([np.flatnonzero(alpha.dist_index == d)[0] for d in dists], dtype=int)


def _dedup(ii: np.ndarray, jj: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    seen: set = set()
    keep = []
    for k, pair in enumerate(zip(ii.tolist(), jj.tolist())):
        if pair not in seen:
            seen.add(pair)
            keep.append(k)
    return ii[keep], jj[keep]


def _assemble_witness(space: AtomSpace, ii, jj, x) -> EveStrategy:
    g = space.game
    live = x > 0
    ii, jj, w = ii[live], jj[live], x[live]
    atoms_a, inv_a = np.unique(ii, return_inverse=True)
    atoms_b, inv_b = np.unique(jj, return_inverse=True)
    joint = np.zeros((atoms_a.size, atoms_b.size))
    np.add.at(joint, (inv_a, inv_b), w)
    joint /= joint.sum()
    ra = np.zeros((atoms_a.size, g.n_settings_a, g.n_outcomes_a))
    ra[np.arange(atoms_a.size)[:, None], np.arange(g.n_settings_a)[None, :], space.alpha_a.responses[atoms_a]] = 1.0
    rb = np.zeros((atoms_b.size, g.n_settings_b, g.n_outcomes_b))
    rb[np.arange(atoms_b.size)[:, None], np.arange(g.n_settings_b)[None, :], space.alpha_b.responses[atoms_b]] = 1.0
    return EveStrategy(joint, space.alpha_a.settings[atoms_a], space.alpha_b.settings[atoms_b], ra, rb)


def closed_form_full_knowledge(g: GameTable, side: str) -> float:
    """Bound when Eve knows one party's setting exactly (``side`` 'A' or 'B') or both ('both').

    Knowing Alice's setting lets Eve route it to Bob through the source, so
    Bob may answer as a function of ``(x, y)`` while Alice still answers
    from ``x`` alone.
    """
    if not g.has_uniform_marginals():
        raise UnsupportedInputError("closed form assumes uniform setting marginals")
    c = g.coeff
    norm = g.n_settings_a * g.n_settings_b
    if side == "A":
        return float(c.max(axis=3).sum(axis=2).max(axis=1).sum() / norm)
    if side == "B":
        return float(c.max(axis=1).sum(axis=0).max(axis=1).sum() / norm)
    if side == "both":
        return algebraic_max(g)
    raise ValidationError(f"side must be 'A', 'B' or 'both', got {side!r}")
