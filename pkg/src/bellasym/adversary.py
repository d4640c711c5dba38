"""Eve's partial-knowledge strategies and the min-entropy bookkeeping behind them.

An :class:`EveStrategy` holds a joint distribution over two hidden variables
``(l1, l2)``.  Given ``l1`` Alice's setting is drawn from ``settings_a[l1]``
and she answers from ``response_a[l1, x]``; Bob likewise with ``l2``.  The
averaged setting statistics must match the game's marginals, so neither
party can notice the manipulation from their own setting frequencies.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import GameFormatError, ShapeError, UnsupportedInputError, ValidationError
from .game_model import PROB_TOL, GameTable
from .lhv_core import Box, DeterministicStrategy

CONSISTENCY_TOL = 1e-9
BOUNDARY_TOL = 1e-9


# --------------------------------------------------------------------------
# entropies


def _as_distribution(p, what: str = "distribution") -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValidationError(f"{what} must be a non-empty vector")
    if np.any(p < -PROB_TOL) or not np.all(np.isfinite(p)) or abs(p.sum() - 1.0) > PROB_TOL:
        raise ValidationError(f"{what} is not a probability distribution")
    return p


def min_entropy(p) -> float:
    """``-log2 max_x p(x)`` in bits."""
    p = _as_distribution(p)
    return float(-math.log2(p.max()))


@dataclass(frozen=True, eq=False)
class ConditionalSettings:
    """Setting distributions ``dist[l, x]`` indexed by a hidden variable with weights ``weights[l]``."""

    dist: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        dist = np.atleast_2d(np.asarray(self.dist, dtype=float))
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if dist.shape[0] != weights.size:
            raise ShapeError("one weight per settings row is required")
        _check_rows(dist, "settings row")
        _as_distribution(weights, "hidden-variable weights")
        object.__setattr__(self, "dist", dist)
        object.__setattr__(self, "weights", weights)

    def mixture(self) -> np.ndarray:
        return self.weights @ self.dist


def _check_rows(rows: np.ndarray, what: str) -> None:
    if np.any(rows < -PROB_TOL) or not np.all(np.isfinite(rows)):
        raise ValidationError(f"{what} has negative or non-finite entries")
    if rows.size and np.max(np.abs(rows.sum(axis=-1) - 1.0)) > PROB_TOL:
        raise ValidationError(f"every {what} must sum to 1")


def conditional_min_entropy(cs: ConditionalSettings) -> float:
    """``-sum_l w[l] log2 max_x p(x|l)``; rows with zero weight contribute nothing."""
    live = cs.weights > 0
    return float(-np.sum(cs.weights[live] * np.log2(cs.dist[live].max(axis=1))))


def relative_knowledge(cs: ConditionalSettings, reference) -> float:
    """Fraction of the reference min-entropy removed by conditioning on the hidden variable."""
    reference = _as_distribution(reference, "reference distribution")
    if cs.dist.shape[1] != reference.size:
        raise ShapeError("settings rows and reference have different lengths")
    if np.max(np.abs(cs.mixture() - reference)) > CONSISTENCY_TOL:
        raise ValidationError("conditional settings do not average to the reference distribution")
    h = min_entropy(reference)
    if h <= 0:
        raise UnsupportedInputError("relative knowledge undefined: reference has zero min-entropy")
    xi = (h - conditional_min_entropy(cs)) / h
    if -BOUNDARY_TOL < xi < 0:
        xi = 0.0
    elif 1 < xi < 1 + BOUNDARY_TOL:
        xi = 1.0
    return float(xi)


@dataclass(frozen=True)
class KnowledgeBudget:
    """Upper limits on Eve's relative knowledge of each party's settings."""

    xi_x: float
    xi_y: float
    entropy_x: float
    entropy_y: float

    def __post_init__(self):
        for label, v in (("xi_x", self.xi_x), ("xi_y", self.xi_y)):
            if not (0.0 <= v <= 1.0) or math.isnan(v):
                raise ValidationError(f"{label}={v} outside [0, 1]")

    @classmethod
    def for_game(cls, g: GameTable, xi_x: float, xi_y: float) -> "KnowledgeBudget":
        return cls(float(xi_x), float(xi_y), min_entropy(g.marginal_a), min_entropy(g.marginal_b))

    def swapped(self) -> "KnowledgeBudget":
        return KnowledgeBudget(self.xi_y, self.xi_x, self.entropy_y, self.entropy_x)


# --------------------------------------------------------------------------
# strategies


@dataclass(frozen=True, eq=False)
class EveStrategy:
    """Correlated hidden variables, per-value setting rows and response tables.

    Shapes: ``joint_weights[l1, l2]``, ``settings_a[l1, x]``,
    ``settings_b[l2, y]``, ``response_a[l1, x, a]``, ``response_b[l2, y, b]``.
    """

    joint_weights: np.ndarray
    settings_a: np.ndarray
    settings_b: np.ndarray
    response_a: np.ndarray
    response_b: np.ndarray

    def __post_init__(self):
        for name in ("joint_weights", "settings_a", "settings_b", "response_a", "response_b"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        la, lb = self.joint_weights.shape
        if self.settings_a.shape[0] != la or self.response_a.shape[0] != la:
            raise ShapeError("Alice tables do not match the hidden alphabet size")
        if self.settings_b.shape[0] != lb or self.response_b.shape[0] != lb:
            raise ShapeError("Bob tables do not match the hidden alphabet size")
        if self.response_a.shape[1] != self.settings_a.shape[1] or self.response_b.shape[1] != self.settings_b.shape[1]:
            raise ShapeError("response tables need one row per setting")

    @property
    def alphabet_a(self) -> int:
        return self.joint_weights.shape[0]

    @property
    def alphabet_b(self) -> int:
        return self.joint_weights.shape[1]

    @property
    def weights_a(self) -> np.ndarray:
        return self.joint_weights.sum(axis=1)

    @property
    def weights_b(self) -> np.ndarray:
        return self.joint_weights.sum(axis=0)

    def conditional_a(self) -> ConditionalSettings:
        return ConditionalSettings(self.settings_a, self.weights_a)

    def conditional_b(self) -> ConditionalSettings:
        return ConditionalSettings(self.settings_b, self.weights_b)

    def knowledge(self, g: GameTable) -> tuple[float, float]:
        """Relative knowledge ``(xi_x, xi_y)`` leaked by this strategy."""
        return (
            relative_knowledge(self.conditional_a(), g.marginal_a),
            relative_knowledge(self.conditional_b(), g.marginal_b),
        )

    def support_size(self, tol: float = 0.0) -> int:
        return int(np.count_nonzero(self.joint_weights > tol))

    def joint_settings(self) -> np.ndarray:
        """Setting-pair distribution ``P(x, y)`` induced by the hidden variables."""
        return self.settings_a.T @ self.joint_weights @ self.settings_b

    def validate(self, g: GameTable, require_product: bool = True) -> None:
        """Check normalization and that the setting statistics are unchanged.

        Each party's setting frequencies must match the game marginals; with
        ``require_product`` (the default) the joint setting distribution must
        also stay ``p(x) p(y)``, which is what makes the effective box a
        proper box.
        """
        n_a, m_a, n_b, m_b = g.shape
        if self.settings_a.shape[1] != n_a or self.settings_b.shape[1] != n_b:
            raise ShapeError("settings rows do not match the game's setting counts")
        if self.response_a.shape[1:] != (n_a, m_a) or self.response_b.shape[1:] != (n_b, m_b):
            raise ShapeError("response tables do not match the game's shape")
        w = self.joint_weights
        if np.any(w < 0) or not np.all(np.isfinite(w)) or abs(w.sum() - 1.0) > PROB_TOL:
            raise ValidationError("joint weights must be nonnegative and sum to 1")
        _check_rows(self.settings_a, "Alice settings row")
        _check_rows(self.settings_b, "Bob settings row")
        _check_rows(self.response_a, "Alice response row")
        _check_rows(self.response_b, "Bob response row")
        da = np.max(np.abs(self.weights_a @ self.settings_a - g.marginal_a))
        db = np.max(np.abs(self.weights_b @ self.settings_b - g.marginal_b))
        if da > CONSISTENCY_TOL or db > CONSISTENCY_TOL:
            raise ValidationError(
                f"setting statistics are visibly altered (Alice dev {da:.3g}, Bob dev {db:.3g})"
            )
        if require_product:
            dj = np.max(np.abs(self.joint_settings() - g.setting_weights()))
            if dj > CONSISTENCY_TOL:
                raise ValidationError(f"joint setting distribution deviates from p(x)p(y) by {dj:.3g}")

    @classmethod
    def from_deterministic(cls, g: GameTable, s: DeterministicStrategy) -> "EveStrategy":
        """Singleton alphabets, reference setting rows, the given deterministic answers."""
        s.check(g)
        ra = np.zeros((1, g.n_settings_a, g.n_outcomes_a))
        ra[0, np.arange(g.n_settings_a), list(s.alice)] = 1.0
        rb = np.zeros((1, g.n_settings_b, g.n_outcomes_b))
        rb[0, np.arange(g.n_settings_b), list(s.bob)] = 1.0
        return cls(np.ones((1, 1)), g.marginal_a[None, :], g.marginal_b[None, :], ra, rb)

    def swapped(self) -> "EveStrategy":
        """The same strategy with the parties' roles exchanged."""
        return EveStrategy(self.joint_weights.T, self.settings_b, self.settings_a,
                           self.response_b, self.response_a)


def mix_strategies(e1: EveStrategy, e2: EveStrategy, t: float) -> EveStrategy:
    """Convex combination ``(1-t) e1 + t e2`` on the disjoint union of alphabets."""
    la1, lb1 = e1.joint_weights.shape
    la2, lb2 = e2.joint_weights.shape
    w = np.zeros((la1 + la2, lb1 + lb2))
    w[:la1, :lb1] = (1 - t) * e1.joint_weights
    w[la1:, lb1:] = t * e2.joint_weights
    return EveStrategy(
        w,
        np.vstack([e1.settings_a, e2.settings_a]),
        np.vstack([e1.settings_b, e2.settings_b]),
        np.concatenate([e1.response_a, e2.response_a]),
        np.concatenate([e1.response_b, e2.response_b]),
    )


def _check_shapes(g: GameTable, e: EveStrategy) -> None:
    n_a, m_a, n_b, m_b = g.shape
    if e.response_a.shape[1:] != (n_a, m_a) or e.response_b.shape[1:] != (n_b, m_b):
        raise ShapeError("strategy tables do not match the game's shape")


def evaluate_eve_value(g: GameTable, e: EveStrategy, validate: bool = True) -> float:
    """Pay-off averaged over Eve's hidden variables and the settings she induces."""
    _check_shapes(g, e)
    if validate:
        e.validate(g)
    ja = e.settings_a[:, :, None] * e.response_a  # [l1, x, a]
    jb = e.settings_b[:, :, None] * e.response_b  # [l2, y, b]
    return float(np.einsum("ij,ixa,jyb,xayb->", e.joint_weights, ja, jb, g.coeff, optimize=True))


def effective_box(g: GameTable, e: EveStrategy) -> Box:
    """Outcome statistics an experimenter sees once the hidden variables are averaged out."""
    _check_shapes(g, e)
    if np.any(g.marginal_a <= 0) or np.any(g.marginal_b <= 0):
        raise UnsupportedInputError("effective box needs strictly positive setting marginals")
    ja = e.settings_a[:, :, None] * e.response_a
    jb = e.settings_b[:, :, None] * e.response_b
    joint = np.einsum("ij,ixa,jyb->abxy", e.joint_weights, ja, jb, optimize=True)
    probs = joint / np.outer(g.marginal_a, g.marginal_b)[None, None, :, :]
    return Box(probs)


# --------------------------------------------------------------------------
# Monte Carlo

SHOTS_PER_BLOCK = 1 << 16


@dataclass(frozen=True)
class SimulationReport:
    shots: int
    seed: int
    empirical_value: float
    stderr_value: float
    freq_a: np.ndarray
    freq_b: np.ndarray

    def to_dict(self) -> dict:
        return {
            "shots": self.shots,
            "seed": self.seed,
            "empirical_value": self.empirical_value,
            "stderr_value": self.stderr_value,
            "freq_a": self.freq_a.tolist(),
            "freq_b": self.freq_b.tolist(),
        }


def _block_rng(seed: int, block: int) -> np.random.Generator:
    # Block k draws from Philox keyed by the seed sequence (seed, k); the
    # block layout depends only on `shots`, never on how blocks are scheduled.
    ss = np.random.SeedSequence(seed, spawn_key=(block,))
    return np.random.Generator(np.random.Philox(ss))


def _sample_rows(rng: np.random.Generator, cdf: np.ndarray, rows: np.ndarray) -> np.ndarray:
    u = rng.random(rows.size)
    return np.minimum((cdf[rows] <= u[:, None]).sum(axis=1), cdf.shape[1] - 1)


def _simulate_block(g, e, n, rng):
    cdf = np.cumsum(e.joint_weights.reshape(-1))
    lam = np.minimum(np.searchsorted(cdf, rng.random(n), side="right"), cdf.size - 1)
    l1, l2 = np.divmod(lam, e.alphabet_b)
    x = _sample_rows(rng, np.cumsum(e.settings_a, axis=1), l1)
    y = _sample_rows(rng, np.cumsum(e.settings_b, axis=1), l2)
    ca = np.cumsum(e.response_a, axis=2).reshape(-1, g.n_outcomes_a)
    cb = np.cumsum(e.response_b, axis=2).reshape(-1, g.n_outcomes_b)
    a = _sample_rows(rng, ca, l1 * g.n_settings_a + x)
    b = _sample_rows(rng, cb, l2 * g.n_settings_b + y)
    pay = g.coeff[x, a, y, b]
    return (
        pay.sum(),
        np.square(pay).sum(),
        np.bincount(x, minlength=g.n_settings_a),
        np.bincount(y, minlength=g.n_settings_b),
    )


def simulate(g: GameTable, e: EveStrategy, shots: int, seed: int, workers: int = 1) -> SimulationReport:
    """Play ``shots`` rounds of the game against Eve's strategy.

    Shots are split into fixed-size blocks with independent Philox streams;
    per-block sums are reduced in block order, so ``workers`` does not change
    the report.
    """
    if shots < 1:
        raise ValidationError("shots must be >= 1")
    e.validate(g)
    sizes = [SHOTS_PER_BLOCK] * (shots // SHOTS_PER_BLOCK)
    if shots % SHOTS_PER_BLOCK:
        sizes.append(shots % SHOTS_PER_BLOCK)
    jobs = [(g, e, n, _block_rng(seed, k)) for k, n in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda job: _simulate_block(*job), jobs))
    else:
        parts = [_simulate_block(*job) for job in jobs]
    total = sum(p[0] for p in parts)
    total_sq = sum(p[1] for p in parts)
    cnt_a = sum(p[2] for p in parts)
    cnt_b = sum(p[3] for p in parts)
    mean = total / shots
    if shots > 1:
        var = max(total_sq - shots * mean * mean, 0.0) / (shots - 1)
        stderr = math.sqrt(var / shots)
    else:
        stderr = 0.0
    return SimulationReport(shots, seed, float(mean), float(stderr), cnt_a / shots, cnt_b / shots)


# --------------------------------------------------------------------------
# text format


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def dump_strategy(e: EveStrategy, skip_zero_weights: bool = True) -> str:
    out = io.StringIO()
    out.write(f"alphabet A={e.alphabet_a} B={e.alphabet_b}\n")
    for (i, j), w in np.ndenumerate(e.joint_weights):
        if w != 0 or not skip_zero_weights:
            out.write(f"weight {i} {j} {_fmt(w)}\n")
    for party, sets, resp in (("A", e.settings_a, e.response_a), ("B", e.settings_b, e.response_b)):
        for lam, row in enumerate(sets):
            out.write(f"setdist {party} {lam} " + " ".join(_fmt(p) for p in row) + "\n")
        for lam in range(resp.shape[0]):
            for x, row in enumerate(resp[lam]):
                out.write(f"response {party} {lam} {x} " + " ".join(_fmt(p) for p in row) + "\n")
    return out.getvalue()


def parse_strategy(text: str) -> EveStrategy:
    """Inverse of :func:`dump_strategy`; omitted weights are 0."""
    sizes = None
    weights: dict[tuple[int, int], float] = {}
    setdist: dict[str, dict[int, list[float]]] = {"A": {}, "B": {}}
    resp: dict[str, dict[tuple[int, int], list[float]]] = {"A": {}, "B": {}}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tok = line.split()
        try:
            if tok[0] == "alphabet":
                sizes = (int(tok[1].removeprefix("A=")), int(tok[2].removeprefix("B=")))
            elif sizes is None:
                raise GameFormatError("'alphabet' line must come first", lineno)
            elif tok[0] == "weight":
                weights[int(tok[1]), int(tok[2])] = float(tok[3])
            elif tok[0] == "setdist" and tok[1] in "AB":
                setdist[tok[1]][int(tok[2])] = [float(t) for t in tok[3:]]
            elif tok[0] == "response" and tok[1] in "AB":
                resp[tok[1]][int(tok[2]), int(tok[3])] = [float(t) for t in tok[4:]]
            else:
                raise GameFormatError(f"unknown record '{tok[0]}'", lineno)
        except GameFormatError:
            raise
        except (IndexError, ValueError):
            raise GameFormatError("malformed record", lineno) from None
    if sizes is None:
        raise GameFormatError("missing 'alphabet' line")
    la, lb = sizes
    w = np.zeros((la, lb))
    for (i, j), v in weights.items():
        w[i, j] = v

    def collect(party: str, n_lam: int):
        rows = setdist[party]
        if sorted(rows) != list(range(n_lam)):
            raise GameFormatError(f"need one setdist row per hidden value for party {party}")
        s = np.array([rows[k] for k in range(n_lam)])
        n_set = s.shape[1]
        r = resp[party]
        if sorted(r) != [(k, x) for k in range(n_lam) for x in range(n_set)]:
            raise GameFormatError(f"incomplete response table for party {party}")
        return s, np.array([[r[k, x] for x in range(n_set)] for k in range(n_lam)])

    sa, ra = collect("A", la)
    sb, rb = collect("B", lb)
    return EveStrategy(w, sa, sb, ra, rb)
