"""Exact lattice-point sets: balls, lenses, sumsets, boxes and convex hulls.

Membership is decided with integer arithmetic throughout.  A point n lies
in the ball of squared radius q iff ||n||^2 <= floor(q), so irrational
radii such as sqrt(2) are handled exactly.  Every set keeps its points as
a lexicographically sorted tuple; all matrix layouts downstream index
lattice points in this order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd, isqrt

import numpy as np

__all__ = [
    "Radius",
    "LatticeSet",
    "ConvexHullData",
    "enumerate_ball",
    "count_ball",
    "enumerate_lense",
    "count_lense",
    "sumset",
    "convex_hull",
    "enumerate_box",
]

Point = tuple


def _as_lambda_sq(value) -> Fraction:
    """Coerce a squared-radius argument to an exact Fraction."""
    if isinstance(value, Radius):
        return value.lambda_sq
    if isinstance(value, float):
        raise TypeError(
            "pass the squared radius as int, Fraction or 'a/b' string; "
            "floats would silently change lattice membership"
        )
    return Fraction(value)


@dataclass(frozen=True)
class Radius:
    """Truncation radius, stored as the exact squared value."""

    lambda_sq: Fraction

    def __post_init__(self):
        q = _as_lambda_sq(self.lambda_sq) if not isinstance(self.lambda_sq, Fraction) else self.lambda_sq
        if q < 0:
            raise ValueError("squared radius must be nonnegative")
        object.__setattr__(self, "lambda_sq", q)

    @classmethod
    def from_lambda(cls, lam) -> "Radius":
        lam = Fraction(lam)
        if lam < 0:
            raise ValueError("radius must be nonnegative")
        return cls(lam * lam)

    @property
    def norm_sq_cutoff(self) -> int:
        """Largest integer norm-square admitted by the ball."""
        return self.lambda_sq.numerator // self.lambda_sq.denominator

    @property
    def floor_lambda(self) -> int:
        return isqrt(self.norm_sq_cutoff)

    @property
    def ceil_lambda(self) -> int:
        m = self.floor_lambda
        return m if Fraction(m * m) == self.lambda_sq else m + 1

    def float_lambda(self) -> float:
        return float(self.lambda_sq) ** 0.5

    def contains_norm_sq(self, norm_sq: int) -> bool:
        return norm_sq <= self.norm_sq_cutoff


def _radius(r) -> Radius:
    return r if isinstance(r, Radius) else Radius(_as_lambda_sq(r))


def _check_dim(d) -> int:
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    return d


def _check_vector(n, d) -> Point:
    n = tuple(n)
    if len(n) != d:
        raise ValueError(f"expected a vector with {d} coordinates, got {len(n)}")
    if not all(isinstance(c, (int, np.integer)) for c in n):
        raise ValueError("lattice vectors must have integer coordinates")
    return tuple(int(c) for c in n)


@dataclass(frozen=True)
class LatticeSet:
    """Finite set of integer vectors in canonical (lexicographic) order."""

    dim: int
    points: tuple
    kind: str = "generic"

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, point) -> bool:
        return tuple(point) in self._point_set

    @cached_property
    def _point_set(self) -> frozenset:
        return frozenset(self.points)

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.array(self.points, dtype=np.int64).reshape(len(self.points), self.dim)
        arr.flags.writeable = False
        return arr

    @cached_property
    def max_abs_coord(self) -> int:
        if not self.points:
            return 0
        return int(np.abs(self.array).max())

    def to_json(self) -> list:
        return [list(p) for p in self.points]


def _lattice_set_from_array(dim: int, arr: np.ndarray, kind: str) -> LatticeSet:
    pts = tuple(tuple(row) for row in arr.tolist())
    return LatticeSet(dim, pts, kind)


def _box_grid(d: int, m: int) -> np.ndarray:
    """All integer points of [-m, m]^d in lexicographic order."""
    rng = np.arange(-m, m + 1, dtype=np.int64)
    grids = np.meshgrid(*([rng] * d), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def enumerate_ball(d, r) -> LatticeSet:
    """All integer points with squared norm at most the squared radius."""
    d = _check_dim(d)
    rad = _radius(r)
    cutoff = rad.norm_sq_cutoff
    pts = _box_grid(d, rad.floor_lambda)
    keep = (pts * pts).sum(axis=1) <= cutoff
    return _lattice_set_from_array(d, pts[keep], "ball")


def count_ball(d, r) -> int:
    return len(enumerate_ball(d, r))


def enumerate_lense(d, r, n) -> LatticeSet:
    """Integer points lying in the ball and in its translate by n."""
    d = _check_dim(d)
    rad = _radius(r)
    n = _check_vector(n, d)
    cutoff = rad.norm_sq_cutoff
    pts = _box_grid(d, rad.floor_lambda)
    nsq = (pts * pts).sum(axis=1)
    shifted = pts - np.array(n, dtype=np.int64)
    keep = (nsq <= cutoff) & ((shifted * shifted).sum(axis=1) <= cutoff)
    return _lattice_set_from_array(d, pts[keep], "lense")


def count_lense(d, r, n) -> int:
    return len(enumerate_lense(d, r, n))


def sumset(a: LatticeSet, b: LatticeSet) -> LatticeSet:
    """Pointwise sums {x + y}, deduplicated, in lexicographic order."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if len(a) == 0 or len(b) == 0:
        return LatticeSet(a.dim, (), "sumset")
    sums = (a.array[:, None, :] + b.array[None, :, :]).reshape(-1, a.dim)
    sums = np.unique(sums, axis=0)
    return _lattice_set_from_array(a.dim, sums, "sumset")


def enumerate_box(d, half_width) -> LatticeSet:
    """All integer points with each coordinate bounded by half_width in absolute value."""
    d = _check_dim(d)
    if not isinstance(half_width, (int, np.integer)) or half_width < 0:
        raise ValueError(f"box half-width must be a nonnegative integer, got {half_width!r}")
    pts = _box_grid(d, int(half_width))
    return _lattice_set_from_array(d, pts, "box")


# ---------------------------------------------------------------------------
# Convex hulls with exact rational arithmetic (d <= 3)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvexHullData:
    """Extreme points and, for full-dimensional hulls, facet halfspaces.

    Facets are pairs (normal, offset) of integers describing normal . x <= offset;
    facets is None when the hull is not full-dimensional in its ambient space.
    """

    vertices: LatticeSet
    facets: tuple | None

    @property
    def dim(self) -> int:
        return self.vertices.dim

    def contains(self, point) -> bool:
        point = _check_vector(point, self.dim)
        if self.facets is not None:
            return all(sum(nc * xc for nc, xc in zip(normal, point)) <= off
                       for normal, off in self.facets)
        if point in self.vertices:
            return True
        return _point_in_hull_lp(point, [p for p in self.vertices.points if p != point])

    def lattice_points(self) -> LatticeSet:
        """All integer points inside the hull (bounding-box scan)."""
        arr = self.vertices.array
        lo = arr.min(axis=0)
        hi = arr.max(axis=0)
        rngs = [np.arange(lo[i], hi[i] + 1, dtype=np.int64) for i in range(self.dim)]
        grids = np.meshgrid(*rngs, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=-1)
        if self.facets is not None:
            normals = np.array([f[0] for f in self.facets], dtype=np.int64)
            offsets = np.array([f[1] for f in self.facets], dtype=np.int64)
            keep = (pts @ normals.T <= offsets).all(axis=1)
            pts = pts[keep]
            return _lattice_set_from_array(self.dim, pts, "generic")
        inside = [tuple(p) for p in pts.tolist() if self.contains(tuple(p))]
        return LatticeSet(self.dim, tuple(inside), "generic")


def _point_in_hull_lp(target, generators) -> bool:
    """Exact feasibility test: is target a convex combination of generators?

    Phase-1 simplex over Fractions with Bland's rule; artificial variables
    never re-enter, which keeps the iteration finite.
    """
    generators = list(generators)
    if not generators:
        return False
    d = len(target)
    n = len(generators)
    m = d + 1
    rows = [[Fraction(g[i]) for g in generators] for i in range(d)]
    rows.append([Fraction(1)] * n)
    rhs = [Fraction(target[i]) for i in range(d)] + [Fraction(1)]
    for i in range(m):
        if rhs[i] < 0:
            rows[i] = [-a for a in rows[i]]
            rhs[i] = -rhs[i]
    # tableau columns: n structural, m artificial, then the right-hand side
    tab = [rows[i] + [Fraction(int(i == j)) for j in range(m)] + [rhs[i]] for i in range(m)]
    basis = [n + i for i in range(m)]
    while True:
        art_rows = [i for i in range(m) if basis[i] >= n]
        if all(tab[i][-1] == 0 for i in art_rows):
            return True
        entering = None
        for j in range(n):
            if sum(tab[i][j] for i in art_rows) > 0:
                entering = j
                break
        if entering is None:
            return False
        best = None
        for i in range(m):
            a = tab[i][entering]
            if a > 0:
                ratio = tab[i][-1] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return False
        piv = best[1]
        pa = tab[piv][entering]
        tab[piv] = [v / pa for v in tab[piv]]
        for i in range(m):
            if i != piv and tab[i][entering] != 0:
                f = tab[i][entering]
                tab[i] = [v - f * w for v, w in zip(tab[i], tab[piv])]
        basis[piv] = entering


def _midpoint_candidates(points) -> list:
    """Drop points that are midpoints of two distinct members of the set.

    Extreme points survive, so the convex hull of the survivors is unchanged.
    """
    pts = list(points)
    if len(pts) <= 2:
        return pts
    arr = np.array(pts, dtype=np.int64)
    d = arr.shape[1]
    lo = arr.min(axis=0)
    span = arr.max(axis=0) - lo + 1
    sums = (arr[:, None, :] + arr[None, :, :]).reshape(-1, d)
    key_base = np.concatenate(([1], np.cumprod(2 * span[::-1])[:-1]))[::-1].astype(np.int64)
    sum_keys = ((sums - 2 * lo) * key_base).sum(axis=1)
    uniq, counts = np.unique(sum_keys, return_counts=True)
    heavy = set(uniq[counts > 1].tolist())
    doubled_keys = ((2 * arr - 2 * lo) * key_base).sum(axis=1)
    return [p for p, k in zip(pts, doubled_keys.tolist()) if k not in heavy]


def _extreme_points_lp(points) -> list:
    candidates = _midpoint_candidates(points)
    extremes = []
    for p in candidates:
        others = [c for c in candidates if c != p]
        if not _point_in_hull_lp(p, others):
            extremes.append(p)
    return sorted(extremes)


def _cross2(o, a, b) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _hull_2d_cycle(points) -> list:
    """Monotone chain; strict turns, so only extreme points are kept (CCW)."""
    pts = sorted(points)
    if len(pts) <= 2:
        return pts
    lower = []
    for p in pts:
        while len(lower) >= 2 and _cross2(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross2(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _gcd_reduce(vec):
    g = 0
    for c in vec:
        g = gcd(g, abs(c))
    if g == 0:
        return vec
    return tuple(c // g for c in vec)


def _affine_rank(points) -> int:
    """Exact affine rank of a finite integer point set."""
    pts = list(points)
    if len(pts) <= 1:
        return 0
    base = pts[0]
    rows = [[Fraction(p[i] - base[i]) for i in range(len(base))] for p in pts[1:]]
    rank = 0
    ncols = len(base)
    for col in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        pr = rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                f = rows[i][col] / pr[col]
                rows[i] = [a - f * b for a, b in zip(rows[i], pr)]
        rank += 1
        if rank == ncols:
            break
    return rank


def _cross3(u, v):
    return (
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    )


def _facets_3d(vertices) -> tuple:
    """Facet planes of a full-dimensional hull from supporting planes through vertex triples."""
    verts = list(vertices)
    arr = np.array(verts, dtype=np.int64)
    planes = set()
    nv = len(verts)
    for i in range(nv):
        vi = verts[i]
        for j in range(i + 1, nv):
            u = tuple(verts[j][t] - vi[t] for t in range(3))
            for k in range(j + 1, nv):
                w = tuple(verts[k][t] - vi[t] for t in range(3))
                normal = _cross3(u, w)
                if normal == (0, 0, 0):
                    continue
                normal = _gcd_reduce(normal)
                dots = arr @ np.array(normal, dtype=np.int64)
                off = int(sum(nc * xc for nc, xc in zip(normal, vi)))
                if int(dots.max()) == off:
                    planes.add((normal, off))
                elif int(dots.min()) == off:
                    planes.add((tuple(-c for c in normal), -off))
    return tuple(sorted(planes))


def convex_hull(s: LatticeSet) -> ConvexHullData:
    """Extreme points and facets of the convex hull, exact for d <= 3."""
    if len(s) == 0:
        raise ValueError("convex hull of an empty set")
    if s.dim > 3:
        raise ValueError("convex hull operations are limited to d <= 3")
    d = s.dim
    pts = list(s.points)

    if d == 1:
        lo = min(pts)[0]
        hi = max(pts)[0]
        verts = sorted({(lo,), (hi,)})
        facets = (((-1,), -lo), ((1,), hi))
        return ConvexHullData(LatticeSet(1, tuple(verts), "hull-extremes"), facets)

    if d == 2:
        cycle = _hull_2d_cycle(pts)
        verts = tuple(sorted(set(cycle)))
        facets = None
        if len(cycle) >= 3:
            facet_list = []
            for a, b in zip(cycle, cycle[1:] + cycle[:1]):
                dx, dy = b[0] - a[0], b[1] - a[1]
                normal = _gcd_reduce((dy, -dx))
                off = normal[0] * a[0] + normal[1] * a[1]
                facet_list.append((normal, off))
            facets = tuple(sorted(facet_list))
        return ConvexHullData(LatticeSet(2, verts, "hull-extremes"), facets)

    verts = _extreme_points_lp(pts)
    facets = _facets_3d(verts) if _affine_rank(verts) == 3 else None
    return ConvexHullData(LatticeSet(3, tuple(verts), "hull-extremes"), facets)
