"""Exact facet-by-facet projection of a linear region onto its w-subspace.

The driver :func:`project_polytope` grows an outer approximation that
starts from the capacity box and is cut down one supporting facet at a
time.  Each facet comes from a boundary point (ray shot from the origin
toward an exterior point) plus n-1 additional boundary points whose
difference vectors are mutually orthogonal, which pins the facet down
uniquely.  Exterior points for later iterations are the corners the new
facet makes with its adjacent facets; corners inside the true projection
are discarded, so the loop terminates exactly when every corner of the
outer approximation is genuine.

Degenerate boundary points (vertices/edges of the projection) cannot span
a facet; they are escaped by re-aiming the exterior point at the midpoint
toward the previous boundary point, with a seeded jitter on the very
first facet search.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .linalg import (DegenerateError, Hyperplane, RankError, SingularError,
                     facet_cosine, nullspace_1d, orient_and_normalize,
                     same_facet, solve_square)
from .region import LinearRegion, membership, segment_lp
from .simplex import LpProblem, LpStatus, feasible, solve

# A queued candidate may sit this far outside any facet and still count
# as satisfying it (LP-tolerance slack).
QUEUE_TOL = 1e-7
# lambda* at least this close to 1 classifies the probe as interior.
INTERIOR_TOL = 1e-9
# Coordinates are rounded to this grid for point-identity bookkeeping.
POINT_GRID_DECIMALS = 7
# Midpoint reselections tried before falling back to jitter.
_MIDPOINT_TRIES = 3


class ProjectionError(RuntimeError):
    """Base class for projector failures."""


class InteriorPointInvalid(ProjectionError):
    """The designated interior point is not inside the region."""


class ModelInfeasible(ProjectionError):
    """A boundary-point LP came back infeasible (numerical trouble)."""


class UnboundedModel(ProjectionError):
    """An LP that is bounded by construction reported unbounded."""


class BadBoundaryPoint(ProjectionError):
    """Boundary point cannot span a facet (vertex/edge degeneracy)."""

    def __init__(self, point, axis):
        super().__init__(f"no nonzero displacement along axis {axis}")
        self.point = np.asarray(point, dtype=float)
        self.axis = axis


class DepaExhausted(ProjectionError):
    """Exterior-point reselection failed retry_cap times in a row."""


class IterationCapReached(ProjectionError):
    """Driver hit max_iterations (partial polytope available in .polytope)."""


@dataclass(frozen=True)
class RayOutcome:
    """Result of shooting a ray from the interior point toward a probe."""

    lambda_star: float
    boundary_point: np.ndarray | None
    interior: bool


@dataclass(frozen=True)
class ProjectionConfig:
    """Tunables for the projection driver.

    max_angle_deg
        Facets whose normal is within this angle of an accepted facet are
        dropped; 0 rejects exact duplicates only.
    eps
        Minimum displacement for a spanning point to count (point-identity
        tolerance).
    """

    max_angle_deg: float = 0.0
    eps: float = 1e-6
    max_iterations: int = 10000
    retry_cap: int = 50
    seed: int = 42

    def __post_init__(self):
        if self.max_angle_deg < 0:
            raise ValueError("max_angle_deg must be >= 0")
        if self.eps <= 0:
            raise ValueError("eps must be positive")


@dataclass
class ProjectionStats:
    """Run counters.  candidates_pruned totals every candidate discarded
    for any reason: singular/duplicate intersections, facet violations,
    membership hits, and retroactive queue prunes."""

    lp_solves: int = 0
    depa_invocations: int = 0
    discarded_by_angle: int = 0
    candidates_pruned: int = 0
    iterations: int = 0
    facets_initial: int = 0
    facets_discovered: int = 0
    hit_iteration_cap: bool = False

    def to_dict(self) -> dict:
        return dict(vars(self))


PROVENANCE_BOX = "initial_box"
PROVENANCE_DISCOVERED = "discovered"


@dataclass
class Polytope:
    """H-representation: unit-normal facets with normal.w + offset <= 0."""

    facets: list[Hyperplane]
    box: np.ndarray
    provenance: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.box = np.asarray(self.box, dtype=float).reshape(-1, 2)
        if not self.provenance:
            self.provenance = [PROVENANCE_DISCOVERED] * len(self.facets)
        if len(self.provenance) != len(self.facets):
            raise ValueError("provenance list does not match facet list")

    @classmethod
    def from_box(cls, box) -> "Polytope":
        """Axis-aligned box [lo_i, hi_i]; facets tagged as initial."""
        box = np.asarray(box, dtype=float).reshape(-1, 2)
        n = box.shape[0]
        facets = []
        for i in range(n):
            e = np.zeros(n)
            e[i] = 1.0
            facets.append(Hyperplane(e, -box[i, 1]))
            facets.append(Hyperplane(-e, box[i, 0]))
        return cls(facets, box, [PROVENANCE_BOX] * (2 * n))

    @property
    def dim(self) -> int:
        return self.box.shape[0]

    def margins(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        return np.array([f.value(w) for f in self.facets])

    def max_margin(self, w) -> float:
        return float(np.max(self.margins(w)))

    def contains(self, w, tol: float = 1e-9) -> bool:
        return self.max_margin(w) <= tol

    def add_facet(self, facet: Hyperplane, provenance: str = PROVENANCE_DISCOVERED) -> None:
        self.facets.append(facet)
        self.provenance.append(provenance)

    def has_duplicate(self, facet: Hyperplane) -> bool:
        return any(same_facet(facet, f) for f in self.facets)

    def discovered_indices(self) -> list[int]:
        return [i for i, p in enumerate(self.provenance) if p == PROVENANCE_DISCOVERED]

    def to_dict(self, stats: ProjectionStats | None = None) -> dict:
        doc = {
            "dimension": self.dim,
            "facets": [{"normal": f.normal.tolist(), "offset": f.offset,
                        "provenance": p}
                       for f, p in zip(self.facets, self.provenance)],
            "box": self.box.tolist(),
        }
        if stats is not None:
            doc["stats"] = stats.to_dict()
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "Polytope":
        facets = [Hyperplane(np.asarray(rec["normal"], dtype=float), rec["offset"])
                  for rec in doc["facets"]]
        prov = [rec.get("provenance", PROVENANCE_DISCOVERED) for rec in doc["facets"]]
        return cls(facets, np.asarray(doc["box"], dtype=float), prov)


def _count(stats: ProjectionStats | None, n: int = 1) -> None:
    if stats is not None:
        stats.lp_solves += n


def _point_key(w) -> tuple:
    return tuple(np.round(np.asarray(w, dtype=float), POINT_GRID_DECIMALS).tolist())


def solve_boundary_point(region: LinearRegion, interior, probe,
                         stats: ProjectionStats | None = None) -> RayOutcome:
    """Shoot a ray from ``interior`` toward ``probe`` and scale it onto the
    projection boundary (max lambda in [0, 1] keeping the point feasible).

    lambda* = 1 classifies the probe as interior; otherwise the returned
    boundary point is interior + lambda* (probe - interior).
    """
    interior = np.asarray(interior, dtype=float)
    probe = np.asarray(probe, dtype=float)
    res = solve(segment_lp(region, interior, probe))
    _count(stats)
    if res.status == LpStatus.INFEASIBLE:
        raise InteriorPointInvalid("ray origin is not a member of the region")
    if res.status != LpStatus.OPTIMAL:
        raise UnboundedModel("boundary ray LP reported unbounded")
    lam = float(res.z[0])
    if lam >= 1.0 - INTERIOR_TOL:
        return RayOutcome(lam, None, True)
    return RayOutcome(lam, interior + lam * (probe - interior), False)


def _spanning_lp(region: LinearRegion, base: np.ndarray, priors: list,
                 axis: int, maximize: bool) -> LpProblem:
    """LP for the next spanning point: variables (w_plus, x_plus, x_minus).

    w_plus and its mirror 2 base - w_plus must both complete into the
    region; difference vectors to previously accepted points must be
    orthogonal to the new one.
    """
    nw, nx = region.n_w, region.n_x
    nv = nw + 2 * nx
    aw, ax = region.a_eq[:, :nw], region.a_eq[:, nw:]
    bw, bx = region.a_in[:, :nw], region.a_in[:, nw:]
    zx = np.zeros((ax.shape[0], nx))
    zi = np.zeros((bx.shape[0], nx))

    eq_rows = [np.hstack([aw, ax, zx]),           # (w+, x+) in region
               np.hstack([-aw, zx, ax])]          # mirror with x-
    eq_rhs = [-region.f_eq, -region.f_eq - 2.0 * (aw @ base)]
    for p in priors:
        d = np.asarray(p, dtype=float) - base
        row = np.zeros(nv)
        row[:nw] = d
        eq_rows.append(row[None, :])
        eq_rhs.append(np.atleast_1d(d @ base))

    in_rows = np.vstack([np.hstack([bw, bx, zi]),
                         np.hstack([-bw, zi, bx])])
    in_rhs = np.concatenate([-region.f_in, -region.f_in - 2.0 * (bw @ base)])

    objective = np.zeros(nv)
    objective[axis] = -1.0 if maximize else 1.0
    return LpProblem(objective=objective,
                     a_eq=np.vstack(eq_rows), b_eq=np.concatenate(eq_rhs),
                     a_in=in_rows, b_in=in_rhs, bounds=None)


def next_spanning_point(region: LinearRegion, base, priors, axis: int,
                        maximize: bool = False,
                        stats: ProjectionStats | None = None) -> np.ndarray:
    """Extreme feasible point along coordinate ``axis`` whose mirror through
    ``base`` also stays feasible, orthogonal to all prior displacement
    vectors.  Minimizes the coordinate unless ``maximize`` is set."""
    base = np.asarray(base, dtype=float).reshape(region.n_w)
    res = solve(_spanning_lp(region, base, list(priors), axis, maximize))
    _count(stats)
    if res.status == LpStatus.INFEASIBLE:
        raise ModelInfeasible(f"spanning-point LP infeasible at axis {axis}")
    if res.status != LpStatus.OPTIMAL:
        raise UnboundedModel(f"spanning-point LP unbounded at axis {axis}")
    return res.z[:region.n_w].copy()


def spanning_points(region: LinearRegion, base, eps: float,
                    stats: ProjectionStats | None = None) -> list:
    """n-1 boundary points around ``base`` with orthogonal displacements.

    Each axis is tried with the minimizing objective first; a degenerate
    zero displacement is retried with the maximizing one before giving up.

    Raises
    ------
    BadBoundaryPoint
        If some axis admits no displacement larger than ``eps`` (the base
        point is a vertex/edge of the projection).
    """
    base = np.asarray(base, dtype=float).reshape(region.n_w)
    points: list[np.ndarray] = []
    for axis in range(region.n_w - 1):
        try:
            cand = next_spanning_point(region, base, points, axis, False, stats)
        except (ModelInfeasible, UnboundedModel):
            cand = None
        if cand is None or float(np.linalg.norm(cand - base)) <= eps:
            try:
                cand = next_spanning_point(region, base, points, axis, True, stats)
            except (ModelInfeasible, UnboundedModel):
                cand = None
            if cand is None or float(np.linalg.norm(cand - base)) <= eps:
                raise BadBoundaryPoint(base, axis)
        points.append(cand)
    return points


def facet_from_points(base, others, interior) -> Hyperplane:
    """Unique hyperplane through ``base`` and the spanning points, oriented
    so the interior point is on the non-positive side."""
    base = np.asarray(base, dtype=float)
    rows = [np.append(base, 1.0)] + [np.append(np.asarray(p, dtype=float), 1.0)
                                     for p in others]
    v = nullspace_1d(np.asarray(rows))
    return orient_and_normalize(v[:-1], float(v[-1]), interior)


def reselect_exterior(region: LinearRegion, bad_exterior, prev_boundary,
                      box, seed: int, attempt: int = 0,
                      stats: ProjectionStats | None = None,
                      jitter_scale: float = 1e-3) -> np.ndarray:
    """Replacement exterior point after a degenerate boundary point.

    With a previous boundary point available: find the segment point
    toward the bad exterior point that stays in the projection the
    longest, and aim midway between it and the bad exterior point.
    Otherwise apply a seeded jitter of ``jitter_scale`` of the per-axis
    capacity, clamped to the box (used on the first facet search and as
    the escape hatch when midpointing stalls inside a degenerate
    subspace).
    """
    bad_exterior = np.asarray(bad_exterior, dtype=float)
    box = np.asarray(box, dtype=float).reshape(-1, 2)
    if prev_boundary is None:
        rng = np.random.default_rng([seed, attempt])
        jitter = (2.0 * rng.random(bad_exterior.shape[0]) - 1.0) * jitter_scale * box[:, 1]
        return np.clip(bad_exterior + jitter, box[:, 0], box[:, 1])

    prev_boundary = np.asarray(prev_boundary, dtype=float)
    res = solve(segment_lp(region, prev_boundary, bad_exterior))
    _count(stats)
    if res.status != LpStatus.OPTIMAL:
        raise ModelInfeasible("previous boundary point is no longer feasible")
    lam = float(res.z[0])
    seg = prev_boundary + lam * (bad_exterior - prev_boundary)
    return 0.5 * (bad_exterior + seg)


def accepts_angle(facet: Hyperplane, polytope: Polytope, max_angle_deg: float) -> bool:
    """Angle filter: False when the candidate is too aligned with an
    existing facet.  At zero tolerance only true duplicates (same normal
    AND same offset) are rejected."""
    if max_angle_deg <= 0.0:
        return not polytope.has_duplicate(facet)
    cos_limit = math.cos(math.radians(max_angle_deg))
    return all(facet_cosine(facet, f) < cos_limit for f in polytope.facets)


def adjacent_facets(polytope: Polytope, facet: Hyperplane,
                    stats: ProjectionStats | None = None) -> list:
    """Indices of facets sharing boundary with ``facet``: the polytope
    inequalities stay feasible with both planes pinned to equality."""
    n = polytope.dim
    a_in = np.array([f.normal for f in polytope.facets])
    b_in = np.array([-f.offset for f in polytope.facets])
    own = next((i for i, f in enumerate(polytope.facets) if f is facet), -1)
    out = []
    for k, other in enumerate(polytope.facets):
        if k == own:
            continue
        p = LpProblem(objective=np.zeros(n),
                      a_eq=np.vstack([facet.normal, other.normal]),
                      b_eq=np.array([-facet.offset, -other.offset]),
                      a_in=a_in, b_in=b_in, bounds=None)
        _count(stats)
        if feasible(p):
            out.append(k)
    return out


def exterior_candidates(region: LinearRegion, polytope: Polytope,
                        facet: Hyperplane, adjacent: list,
                        stats: ProjectionStats | None = None) -> list:
    """Corner points the new facet makes with (n-1)-subsets of its adjacent
    facets, kept only when they satisfy the whole polytope and are NOT
    members of the region (genuine exterior corners to keep cutting)."""
    n = polytope.dim
    out: list[np.ndarray] = []
    seen: set[tuple] = set()
    for subset in itertools.combinations(adjacent, n - 1):
        rows = np.vstack([facet.normal] + [polytope.facets[k].normal for k in subset])
        rhs = np.array([-facet.offset] + [-polytope.facets[k].offset for k in subset])
        try:
            point = solve_square(rows, rhs)
        except SingularError:
            if stats is not None:
                stats.candidates_pruned += 1
            continue
        key = _point_key(point)
        if key in seen:
            if stats is not None:
                stats.candidates_pruned += 1
            continue
        seen.add(key)
        if polytope.max_margin(point) > QUEUE_TOL:
            if stats is not None:
                stats.candidates_pruned += 1
            continue
        _count(stats)
        if membership(region, point):
            if stats is not None:
                stats.candidates_pruned += 1
            continue
        out.append(point)
    return out


def _resolve_box(region: LinearRegion, w_max) -> np.ndarray:
    if w_max is None:
        w_max = region.w_max
    if w_max is None:
        raise ValueError("w_max not given and the region carries no capacity data")
    w_max = np.broadcast_to(np.asarray(w_max, dtype=float), (region.n_w,)).astype(float)
    if np.any(~np.isfinite(w_max)) or np.any(w_max <= 0):
        raise ValueError("w_max entries must be positive and finite")
    return np.column_stack([np.zeros(region.n_w), w_max])


def project_polytope(region: LinearRegion, w_max=None,
                     config: ProjectionConfig | None = None,
                     observer=None):
    """Compute the projection of the region onto its w-subspace as a
    polytope clipped to the capacity box [0, w_max].

    Parameters
    ----------
    region : LinearRegion
    w_max : scalar or array, optional
        Per-axis capacity; defaults to the region's own metadata.
    config : ProjectionConfig, optional
    observer : callable, optional
        Called as ``observer(polytope, queue, stats)`` after every
        accepted facet (testing/diagnostics hook).

    Returns
    -------
    (Polytope, ProjectionStats)
        ``stats.hit_iteration_cap`` flags a partial result.
    """
    cfg = config or ProjectionConfig()
    box = _resolve_box(region, w_max)
    n = region.n_w
    origin = np.zeros(n)

    polytope = Polytope.from_box(box)
    stats = ProjectionStats(facets_initial=len(polytope.facets))

    # Seed with every exterior corner of the box, farthest first.  The
    # box is the initial outer approximation, so its corners play the
    # same role as the facet-intersection candidates of later rounds;
    # a member corner contributes nothing (and if every corner is a
    # member the box itself is the exact projection).
    queue: deque[np.ndarray] = deque()
    seen: set[tuple] = set()
    corners = [box[:, 1].copy()]
    for bits in itertools.product((0, 1), repeat=n):
        if all(bits) or not any(bits):
            continue
        corners.append(np.array(bits, dtype=float) * box[:, 1])
    for corner in corners:
        key = _point_key(corner)
        if key in seen:
            continue
        seen.add(key)
        _count(stats)
        if not membership(region, corner):
            queue.append(corner)
    prev_boundary: np.ndarray | None = None
    depa_stream = 0

    while queue:
        if stats.iterations >= cfg.max_iterations:
            stats.hit_iteration_cap = True
            break
        stats.iterations += 1
        probe = queue.popleft()
        original = probe

        # Facet search with escape hatches for degenerate boundary points:
        # the midpoint rule first, then seeded jitter with escalating
        # magnitude once midpointing stops making progress (rays pinned
        # inside a vertex/edge subspace would otherwise never leave it).
        facet = None
        boundary = None
        attempts = 0
        midpoint_ok = prev_boundary is not None
        while True:
            ray = solve_boundary_point(region, origin, probe, stats)
            if ray.interior:
                if attempts == 0:
                    break  # queued point genuinely interior: nothing to cut
                midpoint_ok = False  # adjustment slid inside; switch to jitter
            else:
                try:
                    pts = spanning_points(region, ray.boundary_point, cfg.eps, stats)
                    facet = facet_from_points(ray.boundary_point, pts, origin)
                    boundary = ray.boundary_point
                    break
                except (BadBoundaryPoint, RankError, DegenerateError):
                    pass
            attempts += 1
            stats.depa_invocations += 1
            if attempts > cfg.retry_cap:
                raise DepaExhausted(
                    f"{attempts} consecutive exterior-point reselections "
                    f"failed near {np.round(original, 6).tolist()}")
            if midpoint_ok and attempts <= _MIDPOINT_TRIES:
                probe = reselect_exterior(region, probe, prev_boundary, box,
                                          cfg.seed, depa_stream, stats)
            else:
                scale = 1e-3 * min(2.0 ** max(attempts - _MIDPOINT_TRIES - 1, 0), 32.0)
                probe = reselect_exterior(region, original, None, box,
                                          cfg.seed, depa_stream, stats,
                                          jitter_scale=scale)
            depa_stream += 1

        if facet is None:
            continue
        if not accepts_angle(facet, polytope, cfg.max_angle_deg):
            stats.discarded_by_angle += 1
            continue

        polytope.add_facet(facet, PROVENANCE_DISCOVERED)
        stats.facets_discovered += 1
        prev_boundary = boundary

        adjacent = adjacent_facets(polytope, facet, stats)
        candidates = exterior_candidates(region, polytope, facet, adjacent, stats)

        kept = deque()
        for queued in queue:
            if facet.value(queued) <= QUEUE_TOL:
                kept.append(queued)
            else:
                stats.candidates_pruned += 1
        queue = kept
        for cand in candidates:
            key = _point_key(cand)
            if key not in seen:
                seen.add(key)
                queue.append(cand)

        if observer is not None:
            observer(polytope, queue, stats)

    return polytope, stats
