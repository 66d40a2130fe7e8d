"""Deterministic dense two-phase simplex solver.

The solver is deliberately self-contained and auditable: a dense tableau,
Dantzig pricing with a switch to Bland's rule after repeated degenerate
pivots, and explicit tolerances.  Vertex optima matter to the callers
(degenerate boundary-point handling keys off them), which is why this is
a simplex and not an interior-point wrapper.

The pivot loop ``_simplex_core`` is written in scalar style so numba can
compile it; if numba is unavailable the very same Python function runs
uncompiled.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

# Feasibility tolerance used while pivoting (phase-1 acceptance, pricing).
FEAS_TOL = 1e-9
# Minimum acceptable pivot element in the ratio test.
PIVOT_TOL = 1e-9
# Pivot steps shorter than this count as degenerate.
DEGEN_TOL = 1e-12
# Degenerate pivots tolerated before Bland's rule takes over.
BLAND_AFTER = 500


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class NumericalFailure(RuntimeError):
    """Simplex hit its iteration cap or an internal anomaly; inputs are suspect."""


@dataclass(frozen=True)
class LpProblem:
    """min objective . z  s.t.  a_eq z = b_eq,  a_in z <= b_in,  lo <= z <= hi.

    Empty constraint blocks are allowed; ``bounds`` rows may use +-inf.
    """

    objective: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray
    a_in: np.ndarray
    b_in: np.ndarray
    bounds: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.objective, dtype=float))
        n = c.shape[0]
        a_eq = _block(self.a_eq, n)
        b_eq = _rhs(self.b_eq, a_eq.shape[0])
        a_in = _block(self.a_in, n)
        b_in = _rhs(self.b_in, a_in.shape[0])
        bounds = np.full((n, 2), (-np.inf, np.inf)) if self.bounds is None \
            else np.asarray(self.bounds, dtype=float).reshape(n, 2)
        for name, arr in (("objective", c), ("a_eq", a_eq), ("b_eq", b_eq),
                          ("a_in", a_in), ("b_in", b_in)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
        if np.any(np.isnan(bounds)):
            raise ValueError("bounds contain NaN")
        if np.any(bounds[:, 0] > bounds[:, 1]):
            raise ValueError("lower bound exceeds upper bound")
        for name, arr in (("objective", c), ("a_eq", a_eq), ("b_eq", b_eq),
                          ("a_in", a_in), ("b_in", b_in), ("bounds", bounds)):
            object.__setattr__(self, name, arr)

    @property
    def n_vars(self) -> int:
        return self.objective.shape[0]


def _block(a, n: int) -> np.ndarray:
    if a is None:
        return np.zeros((0, n))
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return a.reshape(0, n)
    a = np.atleast_2d(a)
    if a.shape[1] != n:
        raise ValueError(f"constraint block has {a.shape[1]} columns, expected {n}")
    return a


def _rhs(b, m: int) -> np.ndarray:
    b = np.zeros(0) if b is None else np.atleast_1d(np.asarray(b, dtype=float))
    if b.shape[0] != m:
        raise ValueError("right-hand side length does not match block")
    return b


@dataclass(frozen=True)
class LpResult:
    status: LpStatus
    z: np.ndarray | None = None
    objective_value: float | None = None


def _simplex_core(T, basis, is_basic, cost1, cost2, n_art, eps_feas, cap):
    """Two-phase pivot loop on tableau ``T`` = [A | b] with b >= 0.

    ``basis[i]`` holds the basic column of row i, or -1 for an implicit
    artificial.  ``cost1``/``cost2`` are the phase-1/phase-2 reduced-cost
    rows (length n_cols+1) and are updated in place alongside the tableau.

    Returns (code, iterations) with code 0 optimal, 1 infeasible,
    2 unbounded, 3 iteration cap, 4 internal anomaly.
    """
    m = T.shape[0]
    ncol = T.shape[1] - 1
    iters = 0
    degen = 0
    bland = False

    for phase in range(2):
        if phase == 0 and n_art == 0:
            continue
        cost = cost1 if phase == 0 else cost2
        while True:
            # --- pricing
            enter = -1
            if bland:
                for j in range(ncol):
                    if not is_basic[j] and cost[j] < -FEAS_TOL:
                        enter = j
                        break
            else:
                best = -FEAS_TOL
                for j in range(ncol):
                    if not is_basic[j] and cost[j] < best:
                        best = cost[j]
                        enter = j
            if enter < 0:
                break

            # --- ratio test; ties go to the smallest variable key (Bland-stable)
            leave = -1
            best_ratio = np.inf
            best_key = m + ncol + 1
            for i in range(m):
                a = T[i, enter]
                if a > PIVOT_TOL:
                    r = T[i, ncol] / a
                    if r < 0.0:
                        r = 0.0
                    key = basis[i] if basis[i] >= 0 else ncol + i
                    if r < best_ratio - 1e-9:
                        best_ratio = r
                        best_key = key
                        leave = i
                    elif r < best_ratio + 1e-9 and key < best_key:
                        best_key = key
                        leave = i
                        if r < best_ratio:
                            best_ratio = r
            if leave < 0:
                if phase == 0:
                    return 4, iters  # phase-1 objective is bounded below; anomaly
                return 2, iters

            # --- pivot
            piv = T[leave, enter]
            for j in range(ncol + 1):
                T[leave, j] /= piv
            T[leave, enter] = 1.0
            for i in range(m):
                if i != leave:
                    f = T[i, enter]
                    if f != 0.0:
                        for j in range(ncol + 1):
                            T[i, j] -= f * T[leave, j]
                        T[i, enter] = 0.0
                        if -1e-11 < T[i, ncol] < 0.0:
                            T[i, ncol] = 0.0
            f1 = cost1[enter]
            if f1 != 0.0:
                for j in range(ncol + 1):
                    cost1[j] -= f1 * T[leave, j]
                cost1[enter] = 0.0
            f2 = cost2[enter]
            if f2 != 0.0:
                for j in range(ncol + 1):
                    cost2[j] -= f2 * T[leave, j]
                cost2[enter] = 0.0

            if basis[leave] >= 0:
                is_basic[basis[leave]] = False
            is_basic[enter] = True
            basis[leave] = enter

            if best_ratio <= DEGEN_TOL:
                degen += 1
                if degen >= BLAND_AFTER:
                    bland = True
            iters += 1
            if iters > cap:
                return 3, iters

        if phase == 0:
            if -cost1[ncol] > eps_feas:
                return 1, iters
            # Drive leftover zero-level artificials out of the basis; rows
            # that cannot pivot are redundant and get zeroed.
            for i in range(m):
                if basis[i] == -1:
                    sel = -1
                    for j in range(ncol):
                        if not is_basic[j] and abs(T[i, j]) > 1e-9:
                            sel = j
                            break
                    if sel >= 0:
                        piv = T[i, sel]
                        for j in range(ncol + 1):
                            T[i, j] /= piv
                        T[i, sel] = 1.0
                        for k in range(m):
                            if k != i:
                                f = T[k, sel]
                                if f != 0.0:
                                    for j in range(ncol + 1):
                                        T[k, j] -= f * T[i, j]
                                    T[k, sel] = 0.0
                        f1 = cost1[sel]
                        if f1 != 0.0:
                            for j in range(ncol + 1):
                                cost1[j] -= f1 * T[i, j]
                            cost1[sel] = 0.0
                        f2 = cost2[sel]
                        if f2 != 0.0:
                            for j in range(ncol + 1):
                                cost2[j] -= f2 * T[i, j]
                            cost2[sel] = 0.0
                        is_basic[sel] = True
                        basis[i] = sel
                        iters += 1
                    else:
                        for j in range(ncol + 1):
                            T[i, j] = 0.0
    return 0, iters


try:  # pragma: no cover - exercised implicitly by every solve
    from numba import njit

    _simplex_core = njit(cache=True)(_simplex_core)
except ImportError:  # pragma: no cover
    pass


# Column transform modes for the standard-form mapping.
_SHIFT_LO = 0   # z = lo + u
_FLIP_HI = 1    # z = hi - u
_SPLIT = 2      # z = u_pos - u_neg


def _standardize(p: LpProblem, objective: np.ndarray):
    """Reduce to  min c.u  s.t.  A u {=,<=} b,  u >= 0  and report the mapping.

    Returns None when presolve fixes every variable (caller decides by
    direct substitution), otherwise a dict with the assembled pieces.
    """
    n = p.n_vars
    lo, hi = p.bounds[:, 0].copy(), p.bounds[:, 1].copy()
    fixed = lo == hi
    free_idx = np.flatnonzero(~fixed)
    z_fixed = np.zeros(n)
    z_fixed[fixed] = lo[fixed]

    b_eq = p.b_eq - p.a_eq[:, fixed] @ z_fixed[fixed]
    b_in = p.b_in - p.a_in[:, fixed] @ z_fixed[fixed]
    a_eq = p.a_eq[:, free_idx]
    a_in = p.a_in[:, free_idx]
    c = objective[free_idx]
    lo, hi = lo[free_idx], hi[free_idx]
    k = free_idx.shape[0]
    if k == 0:
        return None, z_fixed

    # Per-variable affine transform onto u >= 0.
    modes = np.empty(k, dtype=np.int64)
    shifts = np.zeros(k)
    n_split = 0
    upper_rows = []  # (var position, width) for finite [lo, hi]
    for j in range(k):
        if np.isfinite(lo[j]):
            modes[j] = _SHIFT_LO
            shifts[j] = lo[j]
            if np.isfinite(hi[j]):
                upper_rows.append((j, hi[j] - lo[j]))
        elif np.isfinite(hi[j]):
            modes[j] = _FLIP_HI
            shifts[j] = hi[j]
        else:
            modes[j] = _SPLIT
            n_split += 1

    n_std = k + n_split
    split_col = {}
    nxt = k
    for j in range(k):
        if modes[j] == _SPLIT:
            split_col[j] = nxt
            nxt += 1

    def expand(block):
        out = np.zeros((block.shape[0], n_std))
        for j in range(k):
            col = block[:, j]
            if modes[j] == _SHIFT_LO:
                out[:, j] = col
            elif modes[j] == _FLIP_HI:
                out[:, j] = -col
            else:
                out[:, j] = col
                out[:, split_col[j]] = -col
        return out

    eq_rows = expand(a_eq)
    eq_rhs = b_eq - a_eq @ np.where(modes == _FLIP_HI, shifts,
                                    np.where(modes == _SHIFT_LO, shifts, 0.0))
    in_rows = expand(a_in)
    in_rhs = b_in - a_in @ np.where(modes == _FLIP_HI, shifts,
                                    np.where(modes == _SHIFT_LO, shifts, 0.0))
    if upper_rows:
        ub = np.zeros((len(upper_rows), n_std))
        ub_rhs = np.empty(len(upper_rows))
        for r, (j, width) in enumerate(upper_rows):
            ub[r, j] = 1.0
            ub_rhs[r] = width
        in_rows = np.vstack([in_rows, ub])
        in_rhs = np.concatenate([in_rhs, ub_rhs])

    c_std = np.zeros(n_std)
    for j in range(k):
        if modes[j] == _SHIFT_LO:
            c_std[j] = c[j]
        elif modes[j] == _FLIP_HI:
            c_std[j] = -c[j]
        else:
            c_std[j] = c[j]
            c_std[split_col[j]] = -c[j]

    return {
        "eq_rows": eq_rows, "eq_rhs": eq_rhs,
        "in_rows": in_rows, "in_rhs": in_rhs,
        "c_std": c_std, "n_std": n_std,
        "free_idx": free_idx, "modes": modes, "shifts": shifts,
        "split_col": split_col, "k": k,
    }, z_fixed


def _recover(std, u: np.ndarray, z_fixed: np.ndarray) -> np.ndarray:
    z = z_fixed.copy()
    modes, shifts = std["modes"], std["shifts"]
    for pos, j in enumerate(std["free_idx"]):
        if modes[pos] == _SHIFT_LO:
            z[j] = shifts[pos] + u[pos]
        elif modes[pos] == _FLIP_HI:
            z[j] = shifts[pos] - u[pos]
        else:
            z[j] = u[pos] - u[std["split_col"][pos]]
    return z


def solve(p: LpProblem, dump_tableau=None) -> LpResult:
    """Solve the LP; deterministic (identical inputs yield identical z).

    Parameters
    ----------
    p : LpProblem
    dump_tableau : str | file-like, optional
        Debug hook: write the final tableau as tab-separated text.

    Raises
    ------
    NumericalFailure
        If the pivot count exceeds 100*(rows+cols) or the pivot loop hits
        an internal anomaly.
    """
    std, z_fixed = _standardize(p, p.objective)
    if std is None:
        ok = (np.all(np.abs(p.a_eq @ z_fixed - p.b_eq) <= 1e-8)
              and np.all(p.a_in @ z_fixed - p.b_in <= 1e-8))
        if not ok:
            return LpResult(LpStatus.INFEASIBLE)
        return LpResult(LpStatus.OPTIMAL, z_fixed, float(p.objective @ z_fixed))

    m_eq = std["eq_rows"].shape[0]
    m_in = std["in_rows"].shape[0]
    m = m_eq + m_in
    n_std = std["n_std"]
    n_slack = m_in
    ncol = n_std + n_slack

    T = np.zeros((m, ncol + 1))
    T[:m_eq, :n_std] = std["eq_rows"]
    T[:m_eq, ncol] = std["eq_rhs"]
    T[m_eq:, :n_std] = std["in_rows"]
    T[m_eq:, n_std:n_std + n_slack] = np.eye(n_slack)
    T[m_eq:, ncol] = std["in_rhs"]

    neg = T[:, ncol] < 0.0
    T[neg] *= -1.0

    basis = np.full(m, -1, dtype=np.int64)
    is_basic = np.zeros(ncol, dtype=np.bool_)
    for i in range(m_in):
        if not neg[m_eq + i]:
            basis[m_eq + i] = n_std + i
            is_basic[n_std + i] = True
    n_art = int(np.sum(basis == -1))

    # Phase-1 reduced costs: -sum of artificial rows.  Phase-2 reduced
    # costs start at the true costs (all-artificial basis has zero cost).
    cost1 = np.zeros(ncol + 1)
    for i in range(m):
        if basis[i] == -1:
            cost1 -= T[i]
    cost2 = np.concatenate([std["c_std"], np.zeros(n_slack + 1)])

    bmax = float(np.max(np.abs(T[:, ncol]), initial=0.0))
    eps_feas = FEAS_TOL * (1.0 + bmax)
    cap = 100 * (m + ncol)

    code, iters = _simplex_core(T, basis, is_basic, cost1, cost2,
                                n_art, eps_feas, cap)

    if dump_tableau is not None:
        _dump(dump_tableau, T, basis)

    if code == 3:
        raise NumericalFailure(f"simplex iteration cap {cap} exceeded after {iters} pivots")
    if code == 4:
        raise NumericalFailure("phase-1 pivot anomaly (unbounded artificial objective)")
    if code == 1:
        return LpResult(LpStatus.INFEASIBLE)
    if code == 2:
        return LpResult(LpStatus.UNBOUNDED)

    u = np.zeros(ncol)
    for i in range(m):
        if basis[i] >= 0:
            u[basis[i]] = T[i, ncol]
    np.maximum(u, 0.0, out=u)
    z = _recover(std, u[:n_std], z_fixed)
    return LpResult(LpStatus.OPTIMAL, z, float(p.objective @ z))


def feasible(p: LpProblem) -> bool:
    """True iff the constraint set admits a point (objective ignored)."""
    zero = LpProblem(np.zeros(p.n_vars), p.a_eq, p.b_eq, p.a_in, p.b_in, p.bounds)
    return solve(zero).status != LpStatus.INFEASIBLE


class FeasibilityTemplate:
    """Reusable phase-1 skeleton for feasibility queries that share their
    constraint matrices (free variables) and vary only in the right-hand
    side.  Produces exactly the same answers as ``feasible`` on the
    equivalent LpProblem, at a fraction of the setup cost.
    """

    def __init__(self, a_eq: np.ndarray, a_in: np.ndarray):
        a_eq = np.atleast_2d(np.asarray(a_eq, dtype=float))
        a_in = np.atleast_2d(np.asarray(a_in, dtype=float))
        if a_eq.size == 0:
            a_eq = a_eq.reshape(0, a_in.shape[1] if a_in.size else 0)
        if a_in.size == 0:
            a_in = a_in.reshape(0, a_eq.shape[1])
        self.n = a_eq.shape[1]
        self.m_eq = a_eq.shape[0]
        self.m_in = a_in.shape[0]
        m = self.m_eq + self.m_in
        self.ncol = 2 * self.n + self.m_in
        T = np.zeros((m, self.ncol + 1))
        T[:self.m_eq, :self.n] = a_eq
        T[:self.m_eq, self.n:2 * self.n] = -a_eq
        T[self.m_eq:, :self.n] = a_in
        T[self.m_eq:, self.n:2 * self.n] = -a_in
        T[self.m_eq:, 2 * self.n:2 * self.n + self.m_in] = np.eye(self.m_in)
        self._template = T
        self._cap = 100 * (m + self.ncol)

    def feasible(self, b_eq, b_in) -> bool:
        """Does {a_eq z = b_eq, a_in z <= b_in} admit a point (z free)?"""
        T = self._template.copy()
        m = T.shape[0]
        T[:self.m_eq, -1] = b_eq
        T[self.m_eq:, -1] = b_in
        neg = T[:, -1] < 0.0
        if neg.any():
            T[neg] *= -1.0

        basis = np.full(m, -1, dtype=np.int64)
        is_basic = np.zeros(self.ncol, dtype=np.bool_)
        for i in range(self.m_in):
            r = self.m_eq + i
            if not neg[r]:
                col = 2 * self.n + i
                basis[r] = col
                is_basic[col] = True
        n_art = int(np.sum(basis == -1))
        if n_art == 0:
            return True

        cost1 = -T[basis == -1].sum(axis=0)
        cost2 = np.zeros(self.ncol + 1)
        bmax = float(np.max(np.abs(T[:, -1]), initial=0.0))
        code, iters = _simplex_core(T, basis, is_basic, cost1, cost2,
                                    n_art, FEAS_TOL * (1.0 + bmax), self._cap)
        if code in (3, 4):
            raise NumericalFailure(f"feasibility pivots failed (code {code}, {iters} iters)")
        return code != 1


def _dump(target, T: np.ndarray, basis: np.ndarray) -> None:
    lines = ["\t".join(f"{v:.12g}" for v in row) for row in T]
    lines.append("basis\t" + "\t".join(str(int(b)) for b in basis))
    text = "\n".join(lines) + "\n"
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w", encoding="utf-8") as fh:
            fh.write(text)
