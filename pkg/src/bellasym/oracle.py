"""Local search over general Eve strategies, used to cross-check the LP bound.

The search never discretizes setting rows.  Each sweep alternates three
blocks, each of which can only raise the game value:

* joint weights, by an LP with rows and responses fixed (HiGHS via scipy,
  so it shares no code with :mod:`bellasym.lp`);
* setting rows, by gradient steps projected onto the directions that keep
  every row normalized and the referee's setting statistics unchanged,
  pulled back toward the reference distribution when the knowledge budget
  is exceeded;
* responses, by a per ``(hidden value, setting)`` best response.

Hidden alphabets have ``2 * N_A * N_B`` letters per party, enough for Eve
to route the full setting pair to both sides.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from .adversary import CONSISTENCY_TOL, EveStrategy, KnowledgeBudget, evaluate_eve_value
from .game_model import GameTable
from .lhv_core import BoundResult, classical_bound

HIGHS_OPTIONS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}
STEP_SIZES = (4.0, 1.0, 0.25, 0.0625, 0.015625)


class _State:
    def __init__(self, g: GameTable, w, pa, pb, ra, rb):
        self.g = g
        self.w, self.pa, self.pb, self.ra, self.rb = w, pa, pb, ra, rb

    def copy(self) -> "_State":
        return _State(self.g, self.w.copy(), self.pa.copy(), self.pb.copy(), self.ra.copy(), self.rb.copy())

    def value(self) -> float:
        ja = self.pa[:, :, None] * self.ra
        jb = self.pb[:, :, None] * self.rb
        return float(np.einsum("ij,ixa,jyb,xayb->", self.w, ja, jb, self.g.coeff, optimize=True))

    def strategy(self) -> EveStrategy:
        w = np.maximum(self.w, 0.0)
        return EveStrategy(w / w.sum(), self.pa, self.pb, self.ra, self.rb)


def _used_entropy(weights: np.ndarray, rows: np.ndarray) -> float:
    return float(-weights @ np.log2(rows.max(axis=1)))


def _entropy_floor(xi: float, h: float) -> float:
    return (1.0 - xi) * h


def _one_hot(idx: np.ndarray, m: int) -> np.ndarray:
    out = np.zeros(idx.shape + (m,))
    np.put_along_axis(out, idx[..., None], 1.0, axis=-1)
    return out


def _initial_state(g: GameTable, budget: KnowledgeBudget, rng, mode: str, responses: str, base) -> _State:
    """Balanced starting point with hidden letters ``(x*, y*, kind)``.

    Letter ``(x*, y*, k)`` leans toward setting ``x*`` for Alice and ``y*``
    for Bob; all letters are weighted by ``p(x*) p(y*)`` so the referee's
    statistics are untouched.  ``mode='even'`` gives every letter the same
    lean, ``mode='split'`` makes kind 0 point masses and kind 1 reference
    rows, weighted to exhaust the budget.
    """
    n_a, m_a, n_b, m_b = g.shape
    letters = [(x, y, k) for x in range(n_a) for y in range(n_b) for k in range(2)]
    size = len(letters)

    def lean(n, marginal, xi, h_ref):
        if n == 1 or h_ref <= 0:
            return 0.0, 1.0
        if mode == "split":
            return 1.0, xi
        cap = 2.0 ** (-(1.0 - xi) * h_ref)
        s_max = max(0.0, (cap - marginal.max()) / (1.0 - marginal.max()))
        return (s_max if mode == "even" else s_max * rng.uniform(0.3, 1.0)), 1.0

    s_a, th_a = lean(n_a, g.marginal_a, budget.xi_x, budget.entropy_x)
    s_b, th_b = lean(n_b, g.marginal_b, budget.xi_y, budget.entropy_y)
    pa = np.array([g.marginal_a + (s_a if k == 0 or mode != "split" else 0.0) * (np.eye(n_a)[x] - g.marginal_a)
                   for x, _, k in letters])
    pb = np.array([g.marginal_b + (s_b if k == 0 or mode != "split" else 0.0) * (np.eye(n_b)[y] - g.marginal_b)
                   for _, y, k in letters])
    w = np.zeros((size, size))
    for i, (x, y, ka) in enumerate(letters):
        for j, (x2, y2, kb) in enumerate(letters):
            if (x, y) == (x2, y2):
                fa = th_a if ka == 0 else 1.0 - th_a
                fb = th_b if kb == 0 else 1.0 - th_b
                w[i, j] = g.marginal_a[x] * g.marginal_b[y] * fa * fb
    if responses == "classical":
        ra = np.tile(_one_hot(np.array(base.alice), m_a), (size, 1, 1))
        rb = np.tile(_one_hot(np.array(base.bob), m_b), (size, 1, 1))
    elif responses == "informed":
        # the best outcome pair of block (x*, y*); classical answers elsewhere
        fa = np.tile(np.array(base.alice), (size, 1))
        fb = np.tile(np.array(base.bob), (size, 1))
        for i, (x, y, _) in enumerate(letters):
            a, b = np.unravel_index(int(np.argmax(g.coeff[x, :, y, :])), (m_a, m_b))
            fa[i, x], fb[i, y] = a, b
        ra, rb = _one_hot(fa, m_a), _one_hot(fb, m_b)
    else:
        ra = _one_hot(rng.integers(0, m_a, (size, n_a)), m_a)
        rb = _one_hot(rng.integers(0, m_b, (size, n_b)), m_b)
    return _State(g, w, pa, pb, ra, rb)


_START_PLAN = [("even", "classical"), ("split", "informed"), ("split", "classical"), ("even", "informed")]


def _weights_step(st: _State, budget: KnowledgeBudget, constraint: str) -> bool:
    g = st.g
    la, lb = st.w.shape
    ja = st.pa[:, :, None] * st.ra
    jb = st.pb[:, :, None] * st.rb
    v = np.einsum("ixa,jyb,xayb->ij", ja, jb, g.coeff, optimize=True).ravel()
    ones = np.ones(la * lb)
    if constraint == "joint":
        body = np.einsum("ix,jy->xyij", st.pa, st.pb).reshape(g.n_settings_a * g.n_settings_b, -1)
        target = np.outer(g.marginal_a, g.marginal_b).ravel()
    else:
        body = np.vstack([
            np.einsum("ix,j->xij", st.pa, np.ones(lb)).reshape(g.n_settings_a, -1),
            np.einsum("i,jy->yij", np.ones(la), st.pb).reshape(g.n_settings_b, -1),
        ])
        target = np.concatenate([g.marginal_a, g.marginal_b])
    a_eq = np.vstack([ones, body])
    b_eq = np.concatenate([[1.0], target])
    log_a = np.repeat(np.log2(st.pa.max(axis=1)), lb)
    log_b = np.tile(np.log2(st.pb.max(axis=1)), la)
    a_ub = np.vstack([log_a, log_b])
    b_ub = np.array([-_entropy_floor(budget.xi_x, budget.entropy_x), -_entropy_floor(budget.xi_y, budget.entropy_y)])
    res = linprog(-v, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=(0, None),
                  method="highs", options=HIGHS_OPTIONS)
    if res.status != 0:
        return False
    w = np.maximum(res.x, 0.0)
    w /= w.sum()
    cand = st.copy()
    cand.w = w.reshape(la, lb)
    if _feasible(cand, budget, constraint) and cand.value() >= st.value() - 1e-12:
        st.w = cand.w
        return True
    return False


def _feasible(st: _State, budget: KnowledgeBudget, constraint: str) -> bool:
    g = st.g
    if constraint == "joint":
        dev = np.max(np.abs(st.pa.T @ st.w @ st.pb - np.outer(g.marginal_a, g.marginal_b)))
    else:
        dev = max(
            np.max(np.abs(st.w.sum(axis=1) @ st.pa - g.marginal_a)),
            np.max(np.abs(st.w.sum(axis=0) @ st.pb - g.marginal_b)),
        )
    if dev > CONSISTENCY_TOL or np.any(st.pa < 0) or np.any(st.pb < 0):
        return False
    ok_a = _used_entropy(st.w.sum(axis=1), st.pa) >= _entropy_floor(budget.xi_x, budget.entropy_x) - 1e-10
    ok_b = _used_entropy(st.w.sum(axis=0), st.pb) >= _entropy_floor(budget.xi_y, budget.entropy_y) - 1e-10
    return ok_a and ok_b


def _response_step(st: _State) -> None:
    c = st.g.coeff
    ja = st.pa[:, :, None] * st.ra
    jb = st.pb[:, :, None] * st.rb
    # gain[l1, x, a]: value contributed by Alice answering a at (l1, x)
    gain = st.pa[:, :, None] * np.einsum("ij,jyb,xayb->ixa", st.w, jb, c, optimize=True)
    st.ra = _best_response(gain, st.ra)
    ja = st.pa[:, :, None] * st.ra
    gain = st.pb[:, :, None] * np.einsum("ij,ixa,xayb->jyb", st.w, ja, c, optimize=True)
    st.rb = _best_response(gain, st.rb)


def _best_response(gain: np.ndarray, current: np.ndarray) -> np.ndarray:
    cur = np.sum(gain * current, axis=-1)
    best = gain.argmax(axis=-1)
    better = np.take_along_axis(gain, best[..., None], axis=-1)[..., 0] > cur + 1e-14
    out = current.copy()
    out[better] = _one_hot(best[better], gain.shape[-1])
    return out


def _rows_step(st: _State, budget: KnowledgeBudget, side: str, constraint: str) -> bool:
    g = st.g
    c = st.g.coeff
    if side == "A":
        rows, other, w = st.pa, st.pb, st.w
        jo = st.pb[:, :, None] * st.rb
        grad = np.einsum("ixa,ij,jyb,xayb->ix", st.ra, w, jo, c, optimize=True)
        ref, xi, h = g.marginal_a, budget.xi_x, budget.entropy_x
    else:
        rows, other, w = st.pb, st.pa, st.w.T
        jo = st.pa[:, :, None] * st.ra
        grad = np.einsum("jyb,ij,ixa,xayb->jy", st.rb, st.w, jo, c, optimize=True)
        ref, xi, h = g.marginal_b, budget.xi_y, budget.entropy_y
    n_l, n = rows.shape
    if n == 1:
        return False

    # linear conditions a row update d must satisfy: sum_x d[l, x] = 0 and the
    # setting statistics stay put
    cons = [np.kron(np.eye(n_l), np.ones((1, n)))]
    if constraint == "joint":
        beta = w @ other  # beta[l, y] = sum_l' w[l, l'] p(y | l')
        cons.append(np.einsum("ly,xz->xylz", beta, np.eye(n)).reshape(n * other.shape[1], n_l * n))
    else:
        cons.append(np.kron(w.sum(axis=1)[None, :], np.eye(n)))
    cmat = np.vstack(cons)
    d = grad.ravel()
    d = d - np.linalg.pinv(cmat) @ (cmat @ d)
    d = d.reshape(n_l, n)
    if np.max(np.abs(d)) < 1e-12:
        return False
    d /= np.max(np.abs(d))

    base_value = st.value()
    best_state, best_value = None, base_value
    neg = d < 0
    eta_max = np.min(rows[neg] / -d[neg]) if np.any(neg) else np.inf
    for eta in STEP_SIZES:
        eta = min(eta, eta_max)
        if eta <= 0:
            break
        new_rows = np.maximum(rows + eta * d, 0.0)
        new_rows /= new_rows.sum(axis=1, keepdims=True)
        new_rows = _restore_budget(new_rows, w.sum(axis=1), ref, xi, h)
        cand = st.copy()
        if side == "A":
            cand.pa = new_rows
        else:
            cand.pb = new_rows
        if not _feasible(cand, budget, constraint):
            continue
        val = cand.value()
        if val > best_value + 1e-13:
            best_state, best_value = cand, val
    if best_state is None:
        return False
    st.pa, st.pb = best_state.pa, best_state.pb
    return True


def _restore_budget(rows, weights, ref, xi, h):
    """Mix every row toward the reference until the entropy floor is met."""
    floor = _entropy_floor(xi, h)
    if _used_entropy(weights, rows) >= floor:
        return rows
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _used_entropy(weights, (1 - mid) * rows + mid * ref[None, :]) >= floor:
            hi = mid
        else:
            lo = mid
    return (1 - hi) * rows + hi * ref[None, :]


def coordinate_ascent_oracle(
    g: GameTable,
    budget: KnowledgeBudget | tuple[float, float],
    restarts: int = 4,
    seed: int = 0,
    *,
    max_sweeps: int = 200,
    setting_constraint: str = "joint",
) -> BoundResult:
    """Best value found by block-coordinate ascent over ``restarts`` starts.

    The first four starts are fixed (classical or block-optimal responses,
    even or split setting rows); further starts are drawn from ``seed``.
    Always returns a feasible strategy.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    if not isinstance(budget, KnowledgeBudget):
        budget = KnowledgeBudget.for_game(g, *budget)
    rng = np.random.default_rng(seed)
    base = classical_bound(g).strategy
    best, trace = None, []
    total_sweeps = 0
    stagnated = False
    for r in range(restarts):
        if r < len(_START_PLAN):
            mode, responses = _START_PLAN[r]
        else:
            mode = ("even", "split", "random")[rng.integers(3)]
            responses = ("classical", "informed", "random")[rng.integers(3)]
        st = _initial_state(g, budget, rng, mode, responses, base)
        value = st.value()
        history = [value]
        for sweep in range(max_sweeps):
            _weights_step(st, budget, setting_constraint)
            _response_step(st)
            _rows_step(st, budget, "A", setting_constraint)
            _rows_step(st, budget, "B", setting_constraint)
            _response_step(st)
            new = st.value()
            history.append(new)
            total_sweeps += 1
            if new < value - 1e-12:
                raise AssertionError("coordinate ascent decreased the value")
            if new - value < 1e-12:
                break
            value = new
        else:
            stagnated = True
        trace.append(value)
        if best is None or value > best[0] + 1e-12:
            best = (value, st.copy())
    value, st = best
    witness = st.strategy()
    return BoundResult(
        value=evaluate_eve_value(g, witness, validate=False),
        witness=witness,
        budget=budget,
        diagnostics={
            "method": "coordinate ascent",
            "restarts": restarts,
            "seed": seed,
            "restart_values": trace,
            "sweeps": total_sweeps,
            "hit_sweep_cap": stagnated,
        },
    )
