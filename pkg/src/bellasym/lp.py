"""Dense revised simplex for small-row linear programs.

Solves ``max c.x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  x >= 0`` with a
two-phase method.  Pivoting follows Bland's rule (smallest improving column
enters, smallest basic index leaves among ratio ties), which cannot cycle and
makes the returned basis a deterministic function of the input.

The problems solved here have a handful of rows and up to a few thousand
columns, so the basis is refactorized from scratch at every pivot.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError, SolverError

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PIVOT_TOL = 1e-11
DRIVE_OUT_TOL = 1e-7
DEFAULT_PIVOT_CAP = 10**6


@dataclass
class LPResult:
    optimum: float
    x: np.ndarray
    pivots: int
    basis: np.ndarray  # column indices in [x | slacks] numbering, redundant rows removed
    duals_eq: np.ndarray
    duals_ub: np.ndarray
    residual: float
    dropped_rows: list

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.x > 0)


def _as_matrix(a, n: int) -> np.ndarray:
    if a is None:
        return np.zeros((0, n))
    return np.atleast_2d(np.asarray(a, dtype=float)).reshape(-1, n)


class _Tableau:
    """Standard-form state: ``A x = b`` with ``b >= 0`` and an explicit basis."""

    def __init__(self, a: np.ndarray, b: np.ndarray, basis: list[int], pivot_cap: int):
        self.a = a
        self.b = b
        self.basis = list(basis)
        self.pivots = 0
        self.pivot_cap = pivot_cap

    def _solve(self, m: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        try:
            return np.linalg.solve(m, rhs)
        except np.linalg.LinAlgError:
            raise DegeneracyError(
                "basis matrix is singular; perturb the right-hand side slightly and retry",
                {"pivots": self.pivots, "basis": list(self.basis)},
            ) from None

    def primal(self) -> np.ndarray:
        return self._solve(self.a[:, self.basis], self.b)

    def duals(self, cost: np.ndarray) -> np.ndarray:
        return self._solve(self.a[:, self.basis].T, cost[self.basis])

    def run(self, cost: np.ndarray, allowed: np.ndarray) -> None:
        """Pivot to optimality over the columns flagged in ``allowed``."""
        while True:
            bmat = self.a[:, self.basis]
            xb = self._solve(bmat, self.b)
            y = self._solve(bmat.T, cost[self.basis])
            reduced = cost - y @ self.a
            reduced[self.basis] = 0.0
            cand = np.flatnonzero(allowed & (reduced > OPT_TOL))
            if cand.size == 0:
                return
            j = int(cand[0])
            u = self._solve(bmat, self.a[:, j])
            rows = np.flatnonzero(u > PIVOT_TOL)
            if rows.size == 0:
                raise SolverError("linear program is unbounded", {"pivots": self.pivots, "column": j})
            ratios = np.maximum(xb[rows], 0.0) / u[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * max(1.0, best)]
            leave = min(ties, key=lambda r: self.basis[r])
            self.basis[leave] = j
            self.pivots += 1
            if self.pivots > self.pivot_cap:
                raise SolverError(
                    f"pivot cap {self.pivot_cap} exceeded",
                    {"pivots": self.pivots, "basis": list(self.basis)},
                )


def lp_solve(c, A_eq=None, b_eq=None, A_ub=None, b_ub=None, *, pivot_cap: int = DEFAULT_PIVOT_CAP) -> LPResult:
    """Maximize ``c @ x`` over ``x >= 0`` subject to equality and ``<=`` rows.

    Returns an optimal basic feasible solution, so at most ``rows`` entries
    of ``x`` (plus slacks) are nonzero.  Raises :class:`SolverError` on
    infeasibility, unboundedness or when ``pivot_cap`` is exceeded.
    """
    c = np.asarray(c, dtype=float).reshape(-1)
    n = c.size
    a_eq = _as_matrix(A_eq, n)
    a_ub = _as_matrix(A_ub, n)
    b_eq = np.asarray(b_eq if b_eq is not None else [], dtype=float).reshape(-1)
    b_ub = np.asarray(b_ub if b_ub is not None else [], dtype=float).reshape(-1)
    if b_eq.size != a_eq.shape[0] or b_ub.size != a_ub.shape[0]:
        raise ValueError("right-hand side length does not match constraint rows")
    m_eq, m_ub = a_eq.shape[0], a_ub.shape[0]
    m = m_eq + m_ub
    if m == 0:
        if np.any(c > 0):
            raise SolverError("linear program is unbounded")
        return LPResult(0.0, np.zeros(n), 0, np.array([], dtype=int), b_eq.copy(), b_ub.copy(), 0.0, [])

    # standard form [x | slacks | artificials]
    a = np.zeros((m, n + m_ub))
    a[:m_eq, :n] = a_eq
    a[m_eq:, :n] = a_ub
    a[m_eq:, n:] = np.eye(m_ub)
    b = np.concatenate([b_eq, b_ub])
    sign = np.where(b < 0, -1.0, 1.0)
    a *= sign[:, None]
    b = b * sign

    n_std = n + m_ub
    basis, art_rows = [], []
    for r in range(m):
        if r >= m_eq and sign[r] > 0:
            basis.append(n + r - m_eq)
        else:
            art_rows.append(r)
            basis.append(n_std + len(art_rows) - 1)
    art = np.zeros((m, len(art_rows)))
    art[art_rows, np.arange(len(art_rows))] = 1.0
    full = np.hstack([a, art])
    tab = _Tableau(full, b, basis, pivot_cap)

    n_full = full.shape[1]
    dropped: list[int] = []
    if art_rows:
        cost1 = np.zeros(n_full)
        cost1[n_std:] = -1.0
        tab.run(cost1, np.ones(n_full, dtype=bool))
        xb = tab.primal()
        infeas = sum(xb[i] for i, j in enumerate(tab.basis) if j >= n_std)
        if infeas > FEAS_TOL:
            raise SolverError("linear program is infeasible", {"phase1_residual": float(infeas)})
        _drive_out_artificials(tab, n_std, dropped)

    cost = np.zeros(tab.a.shape[1])
    cost[:n] = c
    allowed = np.zeros(tab.a.shape[1], dtype=bool)
    allowed[:n_std] = True
    tab.run(cost, allowed)

    xb = tab.primal()
    x_std = np.zeros(tab.a.shape[1])
    x_std[tab.basis] = xb
    x_std[np.abs(x_std) < 1e-15] = 0.0
    x_std = np.maximum(x_std, 0.0)
    y = tab.duals(cost)

    kept = [r for r in range(m) if r not in dropped]
    y_full = np.zeros(m)
    y_full[kept] = y * sign[kept]
    x = x_std[:n]
    resid = 0.0
    if m_eq:
        resid = max(resid, float(np.max(np.abs(a_eq @ x - b_eq))))
    if m_ub:
        resid = max(resid, float(np.max(np.maximum(a_ub @ x - b_ub, 0.0))))
    return LPResult(
        optimum=float(c @ x),
        x=x,
        pivots=tab.pivots,
        basis=np.array(tab.basis, dtype=int),
        duals_eq=y_full[:m_eq],
        duals_ub=y_full[m_eq:],
        residual=resid,
        dropped_rows=dropped,
    )


def _drive_out_artificials(tab: _Tableau, n_std: int, dropped: list[int]) -> None:
    """Pivot zero-level artificials out of the basis; drop rows where that is impossible."""
    row_ids = list(range(tab.a.shape[0]))
    pos = 0
    while pos < len(tab.basis):
        if tab.basis[pos] < n_std:
            pos += 1
            continue
        bmat = tab.a[:, tab.basis]
        row = tab._solve(bmat.T, np.eye(len(tab.basis))[pos]) @ tab.a[:, :n_std]
        row[[j for j in tab.basis if j < n_std]] = 0.0
        mag = np.abs(row)
        j = int(np.argmax(mag)) if mag.size else -1
        # largest entry keeps the new basis well conditioned
        if j >= 0 and mag[j] > DRIVE_OUT_TOL:
            tab.basis[pos] = j
            tab.pivots += 1
            pos += 1
        else:
            # the artificial's own row is a combination of the others
            r = int(np.argmax(tab.a[:, tab.basis[pos]]))
            dropped.append(row_ids.pop(r))
            keep = [i for i in range(tab.a.shape[0]) if i != r]
            tab.a = tab.a[keep]
            tab.b = tab.b[keep]
            del tab.basis[pos]
    tab.a = tab.a[:, :n_std]
