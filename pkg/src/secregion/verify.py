"""Independent certification of projection output.

Nothing here reuses the facet-search machinery: membership is decided by
fresh feasibility LPs on the region, the oracle projection is computed by
Fourier-Motzkin elimination, and equivalence/support checks are plain
support-function LPs.  That independence is the point - a projector bug
cannot hide from these checks.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass

import numpy as np

from .linalg import Hyperplane, SingularError, same_facet, solve_square
from .projector import PROVENANCE_DISCOVERED, Polytope
from .region import LinearRegion, membership, support_lp
from .simplex import LpProblem, LpStatus, solve

# Samples whose worst facet margin is within this band of zero are
# boundary samples: their classification is below LP resolution.
BOUNDARY_TOL = 1e-7
# Polytope membership test tolerance for sample classification.
SAMPLE_TOL = 1e-9

COLORS = ("green", "blue", "yellow", "red")


class SizeGuardExceeded(ValueError):
    """Region too large for Fourier-Motzkin elimination."""


class UnboundedRegion(ValueError):
    """A polytope handed to the equivalence check is unbounded."""


@dataclass(frozen=True)
class SampleClass:
    w: np.ndarray
    in_polytope: bool
    in_region: bool
    color: str


@dataclass(frozen=True)
class ErrorReport:
    """Monte-Carlo disagreement summary.

    ``n_in_polytope``/``n_agreeing`` exclude boundary-band samples (their
    count is reported separately); ``error_pct`` is
    (1 - n_agreeing/n_in_polytope) * 100, None when nothing landed inside.
    ``error_pct_unrestricted`` uses all agreeing samples (green + red) in
    the numerator instead of the inside-only restriction.
    """

    n_samples: int
    n_in_polytope: int
    n_agreeing: int
    error_pct: float | None
    color_counts: dict
    n_boundary_excluded: int
    n_agreeing_unrestricted: int
    error_pct_unrestricted: float | None

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "n_in_polytope": self.n_in_polytope,
            "n_agreeing": self.n_agreeing,
            "error_pct": self.error_pct,
            "color_counts": dict(self.color_counts),
            "n_boundary_excluded": self.n_boundary_excluded,
            "n_agreeing_unrestricted": self.n_agreeing_unrestricted,
            "error_pct_unrestricted": self.error_pct_unrestricted,
        }


def _color(in_polytope: bool, in_region: bool) -> str:
    if in_polytope:
        return "green" if in_region else "yellow"
    return "blue" if in_region else "red"


def classify_samples(region: LinearRegion, polytope: Polytope, n: int, seed: int):
    """Draw n uniform samples over the polytope's box and classify each
    against the polytope (facet margins) and the region (membership LP).

    Returns (samples, report); identical (seed, n) reproduce both exactly.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    if polytope.dim != region.n_w:
        raise ValueError("polytope/region dimension mismatch")
    rng = np.random.default_rng(seed)
    lo, hi = polytope.box[:, 0], polytope.box[:, 1]
    points = lo + rng.random((n, polytope.dim)) * (hi - lo)

    normals = np.array([f.normal for f in polytope.facets])
    offsets = np.array([f.offset for f in polytope.facets])
    margins = points @ normals.T + offsets
    worst = margins.max(axis=1)
    in_poly = worst <= SAMPLE_TOL
    on_boundary = np.abs(worst) <= BOUNDARY_TOL

    samples = []
    counts = {c: 0 for c in COLORS}
    n_in = n_agree = n_boundary = n_agree_all = 0
    for k in range(n):
        inside_r = membership(region, points[k])
        color = _color(bool(in_poly[k]), inside_r)
        counts[color] += 1
        samples.append(SampleClass(points[k], bool(in_poly[k]), inside_r, color))
        if on_boundary[k]:
            n_boundary += 1
            continue
        if color in ("green", "red"):
            n_agree_all += 1
        if in_poly[k]:
            n_in += 1
            if inside_r:
                n_agree += 1

    report = ErrorReport(
        n_samples=n,
        n_in_polytope=n_in,
        n_agreeing=n_agree,
        error_pct=None if n_in == 0 else (1.0 - n_agree / n_in) * 100.0,
        color_counts=counts,
        n_boundary_excluded=n_boundary,
        n_agreeing_unrestricted=n_agree_all,
        error_pct_unrestricted=None if n_in == 0 else (1.0 - n_agree_all / n_in) * 100.0,
    )
    return samples, report


def write_samples_csv(samples, path) -> None:
    """Classified samples as CSV: w_1..w_n,in_polytope,in_region,color."""
    dim = samples[0].w.shape[0] if samples else 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"w_{i + 1}" for i in range(dim)]
                        + ["in_polytope", "in_region", "color"])
        for s in samples:
            writer.writerow([repr(float(v)) for v in s.w]
                            + [str(s.in_polytope).lower(), str(s.in_region).lower(), s.color])


# ---------------------------------------------------------------------------
# Fourier-Motzkin oracle

_COEF_TOL = 1e-11


def _drop_trivial(rows: np.ndarray, consts: np.ndarray, active: np.ndarray):
    """Remove rows with no active coefficients; an unsatisfiable constant
    row means the region is empty."""
    keep = []
    for i in range(rows.shape[0]):
        if active.any() and np.max(np.abs(rows[i, active])) > _COEF_TOL:
            keep.append(i)
        elif consts[i] > 1e-9:
            raise ValueError("region is infeasible (constant row violated)")
    return rows[keep], consts[keep]


def _dedup_rows(rows: np.ndarray, consts: np.ndarray):
    seen = set()
    keep = []
    for i in range(rows.shape[0]):
        scale = np.max(np.abs(rows[i]))
        if scale <= _COEF_TOL:
            continue
        key = tuple(np.round(np.append(rows[i] / scale, consts[i] / scale), 9).tolist())
        if key in seen:
            continue
        seen.add(key)
        keep.append(i)
    return rows[keep], consts[keep]


def _remove_redundant(rows: np.ndarray, consts: np.ndarray, cols: np.ndarray):
    """Sequentially drop rows implied by the others (support LP per row)."""
    rows = rows.copy()
    consts = consts.copy()
    i = 0
    while i < rows.shape[0]:
        others = np.delete(rows, i, axis=0)
        oconsts = np.delete(consts, i)
        # The tested row itself re-enters with slack 1 to keep the LP bounded.
        a_in = np.vstack([others[:, cols], rows[i, cols][None, :]])
        b_in = np.concatenate([-oconsts, [-consts[i] + 1.0]])
        res = solve(LpProblem(objective=-rows[i, cols], a_eq=None, b_eq=None,
                              a_in=a_in, b_in=b_in, bounds=None))
        if res.status == LpStatus.OPTIMAL and -res.objective_value <= -consts[i] + 1e-9:
            rows = others
            consts = oconsts
        else:
            i += 1
    return rows, consts


def fme_project(region: LinearRegion, max_x: int = 10, max_ineq: int = 60) -> Polytope:
    """Exact projection onto the w-subspace by eliminating every x variable.

    Equalities are eliminated first by exact pivoting, then one
    Fourier-Motzkin round per remaining x column, removing redundant rows
    after every round to contain the blowup.

    Raises
    ------
    SizeGuardExceeded
        If the region exceeds the x-dimension/inequality-count guard.
    """
    if region.n_x > max_x or region.a_in.shape[0] > max_ineq:
        raise SizeGuardExceeded(
            f"region has n_x={region.n_x}, {region.a_in.shape[0]} inequalities; "
            f"guard is n_x<={max_x}, ineq<={max_ineq}")

    nw = region.n_w
    nv = region.n_vars
    eq_rows = region.a_eq.copy()
    eq_consts = region.f_eq.copy()
    in_rows = region.a_in.copy()
    in_consts = region.f_in.copy()
    x_active = np.zeros(nv, dtype=bool)
    x_active[nw:] = True

    # --- equality elimination by exact pivoting on x columns
    while eq_rows.shape[0]:
        row, const = eq_rows[0], eq_consts[0]
        eq_rows, eq_consts = eq_rows[1:], eq_consts[1:]
        xcoef = np.where(x_active, np.abs(row), 0.0)
        col = int(np.argmax(xcoef))
        if xcoef[col] <= _COEF_TOL:
            if np.max(np.abs(row[:nw]), initial=0.0) <= _COEF_TOL:
                if abs(const) > 1e-9:
                    raise ValueError("region is infeasible (inconsistent equality)")
                continue
            # Pure-w equality: carry as an inequality pair.
            in_rows = np.vstack([in_rows, row, -row])
            in_consts = np.concatenate([in_consts, [const, -const]])
            continue
        piv = row[col]
        for rows, consts in ((eq_rows, eq_consts), (in_rows, in_consts)):
            if rows.shape[0]:
                factor = rows[:, col] / piv
                rows -= np.outer(factor, row)
                consts -= factor * const
                rows[:, col] = 0.0
        x_active[col] = False

    in_rows, in_consts = _dedup_rows(in_rows, in_consts)

    # --- one Fourier-Motzkin round per remaining x column
    while x_active.any():
        cand = np.flatnonzero(x_active)
        costs = [(np.sum(in_rows[:, c] > _COEF_TOL) * np.sum(in_rows[:, c] < -_COEF_TOL), c)
                 for c in cand]
        _, col = min(costs)
        coef = in_rows[:, col]
        pos = np.flatnonzero(coef > _COEF_TOL)
        neg = np.flatnonzero(coef < -_COEF_TOL)
        zero = np.flatnonzero(np.abs(coef) <= _COEF_TOL)

        new_rows = [in_rows[zero]]
        new_consts = [in_consts[zero]]
        for i in pos:
            ri, ci = in_rows[i] / coef[i], in_consts[i] / coef[i]
            for j in neg:
                rj, cj = in_rows[j] / -coef[j], in_consts[j] / -coef[j]
                new_rows.append((ri + rj)[None, :])
                new_consts.append(np.atleast_1d(ci + cj))
        in_rows = np.vstack(new_rows) if new_rows else np.zeros((0, nv))
        in_consts = np.concatenate(new_consts) if new_consts else np.zeros(0)
        in_rows[:, col] = 0.0
        x_active[col] = False

        keep_cols = np.r_[np.arange(nw), np.flatnonzero(x_active)]
        meaningful = np.r_[np.ones(nw, dtype=bool), x_active[nw:]]
        in_rows, in_consts = _drop_trivial(in_rows, in_consts, meaningful)
        in_rows, in_consts = _dedup_rows(in_rows, in_consts)
        if in_rows.shape[0] > 2:
            in_rows, in_consts = _remove_redundant(in_rows, in_consts, keep_cols)

    facets = []
    for i in range(in_rows.shape[0]):
        a = in_rows[i, :nw]
        scale = float(np.linalg.norm(a))
        if scale <= _COEF_TOL:
            if in_consts[i] > 1e-9:
                raise ValueError("region is infeasible (constant row violated)")
            continue
        h = Hyperplane(a / scale, float(in_consts[i]) / scale)
        if not any(same_facet(h, f) for f in facets):
            facets.append(h)

    box = np.empty((nw, 2))
    for i in range(nw):
        e = np.zeros(nw)
        e[i] = 1.0
        box[i, 0] = -_support_over_facets(facets, -e)
        box[i, 1] = _support_over_facets(facets, e)
    return Polytope(facets, box, [PROVENANCE_DISCOVERED] * len(facets))


def _support_over_facets(facets, direction) -> float:
    if not facets:
        return np.inf
    res = solve(LpProblem(objective=-np.asarray(direction, dtype=float),
                          a_eq=None, b_eq=None,
                          a_in=np.array([f.normal for f in facets]),
                          b_in=np.array([-f.offset for f in facets]),
                          bounds=None))
    if res.status == LpStatus.UNBOUNDED:
        return np.inf
    if res.status != LpStatus.OPTIMAL:
        raise ValueError("facet system is infeasible")
    return -res.objective_value


# ---------------------------------------------------------------------------
# Equivalence and audits


def regions_equivalent(p: Polytope, q: Polytope, tol: float = 1e-6) -> dict:
    """Mutual-inclusion test between two H-representations.

    For every facet of one polytope, the support of the other polytope in
    that facet's normal direction must not exceed the facet by more than
    ``tol``.  Returns {'equal': bool, 'max_violation': float}.
    """
    if p.dim != q.dim:
        raise ValueError("polytope dimensions differ")
    worst = 0.0
    for outer, inner in ((p, q), (q, p)):
        a_in = np.array([f.normal for f in inner.facets])
        b_in = np.array([-f.offset for f in inner.facets])
        for f in outer.facets:
            res = solve(LpProblem(objective=-f.normal, a_eq=None, b_eq=None,
                                  a_in=a_in, b_in=b_in, bounds=None))
            if res.status == LpStatus.UNBOUNDED:
                raise UnboundedRegion("polytope is unbounded along a facet normal")
            if res.status != LpStatus.OPTIMAL:
                raise ValueError("polytope is empty")
            worst = max(worst, -res.objective_value + f.offset)
    return {"equal": worst <= tol, "max_violation": worst}


def facet_support_audit(region: LinearRegion, polytope: Polytope) -> list:
    """Per discovered facet: how far the region pokes past it
    (validity_gap, must be ~0) and how far it is from touching the region
    (support_gap, must be ~0).  Returns a list of dicts."""
    if region.n_w != polytope.dim:
        raise ValueError("region/polytope dimension mismatch")
    audit = []
    for idx in polytope.discovered_indices():
        f = polytope.facets[idx]
        res = solve(support_lp(region, f.normal))
        if res.status != LpStatus.OPTIMAL:
            raise ValueError("support LP failed (region empty or unbounded)")
        reach = -res.objective_value + f.offset  # max(normal.w) + offset
        audit.append({"facet": idx,
                      "validity_gap": max(0.0, reach),
                      "support_gap": abs(reach)})
    return audit


def enumerate_vertices(polytope: Polytope, tol: float = 1e-7) -> list:
    """All vertices of a 2-D or 3-D polytope by facet-pair/facet-triple
    intersection; 2-D vertices come back in counterclockwise order."""
    n = polytope.dim
    if n not in (2, 3):
        raise ValueError("vertex enumeration supports dimensions 2 and 3 only")
    vertices = []
    seen = set()
    for subset in itertools.combinations(range(len(polytope.facets)), n):
        rows = np.array([polytope.facets[k].normal for k in subset])
        rhs = np.array([-polytope.facets[k].offset for k in subset])
        try:
            point = solve_square(rows, rhs)
        except SingularError:
            continue
        if polytope.max_margin(point) > tol:
            continue
        key = tuple(np.round(point, 7).tolist())
        if key in seen:
            continue
        seen.add(key)
        vertices.append(point)
    if n == 2 and len(vertices) > 2:
        center = np.mean(vertices, axis=0)
        vertices.sort(key=lambda v: np.arctan2(v[1] - center[1], v[0] - center[0]))
    return vertices


def write_vertices_csv(vertices, path) -> None:
    dim = vertices[0].shape[0] if vertices else 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"w_{i + 1}" for i in range(dim)])
        for v in vertices:
            writer.writerow([repr(float(x)) for x in v])
