"""Dense linear algebra primitives and hyperplane algebra.

Everything here operates on small dense systems (projected dimensions of
a handful of axes), so plain Gaussian elimination with partial pivoting
is used throughout instead of SVD/QR.  All functions are pure and never
mutate their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Absolute pivot threshold below which elimination declares a system singular.
PIVOT_TOL = 1e-11
# Rank tolerance relative to the largest pivot encountered.
RANK_TOL = 1e-9
# |normal . interior + offset| below this makes the orientation ambiguous.
ORIENT_TOL = 1e-10

# Two facets are the same facet when their normals are this aligned AND
# their offsets agree; normals are unit length so both tests are meaningful.
DUP_COS_TOL = 1e-10
DUP_OFFSET_TOL = 1e-8


class SingularError(ValueError):
    """Square system has no unique solution (pivot collapsed)."""


class RankError(ValueError):
    """Nullspace is not one-dimensional (points fail the independence condition)."""


class DegenerateError(ValueError):
    """Hyperplane orientation is ambiguous for the supplied interior point."""


def _as_float_array(a, name: str) -> np.ndarray:
    out = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains non-finite entries")
    return out


@dataclass(frozen=True)
class Hyperplane:
    """Inward-oriented halfspace ``normal . w + offset <= 0`` with unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        normal = _as_float_array(self.normal, "normal")
        if abs(np.linalg.norm(normal) - 1.0) > 1e-12:
            raise ValueError("hyperplane normal must have unit 2-norm")
        normal.setflags(write=False)
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self) -> int:
        return self.normal.shape[0]

    def value(self, w) -> float:
        """Signed margin of ``w``; negative strictly inside, zero on the plane."""
        return float(self.normal @ np.asarray(w, dtype=float)) + self.offset

    def values(self, points: np.ndarray) -> np.ndarray:
        """Signed margins for a batch of points (rows)."""
        return np.asarray(points, dtype=float) @ self.normal + self.offset


def solve_square(a, b) -> np.ndarray:
    """Solve ``A x = b`` for square A by Gaussian elimination with partial pivoting.

    Raises
    ------
    SingularError
        If any pivot falls below ``PIVOT_TOL`` in absolute value, or the
        residual check fails afterwards.
    """
    a = _as_float_array(a, "a")
    b = _as_float_array(b, "b")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("a must be a square matrix")
    n = a.shape[0]
    if b.shape != (n,):
        raise ValueError("b dimension does not match a")

    aug = np.hstack([a, b[:, None]])
    for k in range(n):
        p = k + int(np.argmax(np.abs(aug[k:, k])))
        if abs(aug[p, k]) < PIVOT_TOL:
            raise SingularError(f"pivot {abs(aug[p, k]):.3e} below {PIVOT_TOL:.0e} at column {k}")
        if p != k:
            aug[[k, p]] = aug[[p, k]]
        aug[k + 1:] -= np.outer(aug[k + 1:, k] / aug[k, k], aug[k])

    x = np.empty(n)
    for k in range(n - 1, -1, -1):
        x[k] = (aug[k, n] - aug[k, k + 1:n] @ x[k + 1:]) / aug[k, k]

    if np.max(np.abs(a @ x - b), initial=0.0) > 1e-9 * (1.0 + np.max(np.abs(b), initial=0.0)):
        raise SingularError("solution residual exceeds tolerance; system is ill-conditioned")
    return x


def nullspace_1d(m) -> np.ndarray:
    """Unit-norm spanning vector of the nullspace of an ``n x (n+1)`` matrix.

    The input must have numerical rank n so the nullspace is exactly
    one-dimensional; rank is judged against ``RANK_TOL`` relative to the
    largest pivot seen during elimination.

    Raises
    ------
    RankError
        If the numerical rank is below n (nullspace dimension > 1) or the
        residual check fails.
    """
    m = _as_float_array(m, "m")
    if m.ndim != 2 or m.shape[1] != m.shape[0] + 1:
        raise ValueError("m must have shape (n, n+1)")
    n = m.shape[0]

    red = m.copy()
    pivots = []  # (row, col, magnitude) in elimination order
    row = 0
    for col in range(n + 1):
        if row >= n:
            break
        p = row + int(np.argmax(np.abs(red[row:, col])))
        mag = abs(red[p, col])
        if mag <= PIVOT_TOL:
            continue
        if p != row:
            red[[row, p]] = red[[p, row]]
        red[row + 1:] -= np.outer(red[row + 1:, col] / red[row, col], red[row])
        pivots.append((row, col, mag))
        row += 1

    largest = max(mag for _, _, mag in pivots) if pivots else 0.0
    effective = [(r, c) for r, c, mag in pivots if mag > RANK_TOL * largest]
    if len(effective) < n:
        raise RankError(f"numerical rank {len(effective)} < {n}; nullspace is not one-dimensional")

    pivot_cols = [c for _, c in effective]
    free_col = next(c for c in range(n + 1) if c not in pivot_cols)

    v = np.zeros(n + 1)
    v[free_col] = 1.0
    for r, c in reversed(effective):
        v[c] = -(red[r] @ v - red[r, c] * v[c]) / red[r, c]

    v /= np.linalg.norm(v)
    # Deterministic sign: largest-magnitude component made positive.
    lead = int(np.argmax(np.abs(v)))
    if v[lead] < 0:
        v = -v

    if np.max(np.abs(m @ v)) > 1e-8 * (1.0 + np.max(np.abs(m))):
        raise RankError("nullspace residual exceeds tolerance")
    return v


def orient_and_normalize(c, d: float, interior) -> Hyperplane:
    """Build a unit-normal hyperplane from ``c . w + d <= 0`` oriented against ``interior``.

    The sign is flipped if needed so the interior point ends up on the
    non-positive side.

    Raises
    ------
    DegenerateError
        If ``c`` is (near) zero or the interior point lies on the plane.
    """
    c = _as_float_array(c, "c")
    interior = _as_float_array(interior, "interior")
    scale = np.linalg.norm(c)
    if scale <= 1e-10:
        raise DegenerateError("normal vector is numerically zero")
    normal = c / scale
    offset = float(d) / scale
    margin = float(normal @ interior) + offset
    if abs(margin) <= ORIENT_TOL:
        raise DegenerateError("interior point lies on the hyperplane; orientation ambiguous")
    if margin > 0:
        normal = -normal
        offset = -offset
    return Hyperplane(normal, offset)


def facet_cosine(h1: Hyperplane, h2: Hyperplane) -> float:
    """Cosine of the angle between two facet normals, clamped to [-1, 1]."""
    if h1.dim != h2.dim:
        raise ValueError("hyperplane dimensions differ")
    return float(np.clip(h1.normal @ h2.normal, -1.0, 1.0))


def same_facet(h1: Hyperplane, h2: Hyperplane) -> bool:
    """Duplicate test on the normalized representation (dedup rule)."""
    return (facet_cosine(h1, h2) >= 1.0 - DUP_COS_TOL
            and abs(h1.offset - h2.offset) <= DUP_OFFSET_TOL)
