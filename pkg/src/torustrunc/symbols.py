"""Truncation symbols: overlap fractions of a projection set with its translates.

The central object is the table n -> N_overlap(n) / N_total built from a
finite symmetric projection set (ball or box).  Values are exact rationals;
floating point enters only at kernel-evaluation boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from .lattice import (
    LatticeSet,
    Radius,
    _as_lambda_sq,
    _check_dim,
    _check_vector,
    _radius,
    enumerate_ball,
    enumerate_box,
)

__all__ = [
    "SymbolTable",
    "Truncation",
    "ball_truncation",
    "box_truncation",
    "as_truncation",
    "fejer_symbol",
    "w_symbol",
    "w_from_symbol",
    "box_symbol",
    "symbol_convergence_bound",
    "BoundNotApplicableError",
]

# pair-enumeration tables above this many point pairs are refused; use
# per-shift lense counts instead
_PAIR_CAP = 60_000_000


class BoundNotApplicableError(ValueError):
    """The explicit convergence bound requires lambda > sqrt(d)."""


@dataclass(frozen=True)
class SymbolTable:
    """Map from lattice vectors to exact rational values on a finite support."""

    dim: int
    support: LatticeSet
    values: dict

    def value(self, n) -> Fraction:
        return self.values.get(tuple(n), Fraction(0))

    @cached_property
    def float_values(self) -> dict:
        return {p: float(v) for p, v in self.values.items()}

    def float_value(self, n) -> float:
        return self.float_values.get(tuple(n), 0.0)

    def __len__(self) -> int:
        return len(self.values)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "support": self.support.to_json(),
            "values": [str(self.values[p]) for p in self.support.points],
        }


def _encode_rows(arr: np.ndarray, lo: np.ndarray, span: np.ndarray) -> np.ndarray:
    """Lex-monotone integer key per row; assumes coordinates in [lo, lo+span)."""
    base = np.concatenate(([1], np.cumprod(span[::-1])[:-1]))[::-1].astype(np.int64)
    return ((arr - lo) * base).sum(axis=1)


def _autocorrelation_symbol(proj: LatticeSet) -> SymbolTable:
    """Overlap counts of a projection set with all its translates, over the set size.

    Counts pairs (k, k') with k - k' = n, which is exactly the number of
    points in the intersection of the set with its translate by n.
    """
    npts = len(proj)
    if npts == 0:
        raise ValueError("projection set is empty")
    if npts * npts > _PAIR_CAP:
        raise ValueError(
            f"symbol table would enumerate {npts * npts} point pairs; "
            "query individual shifts with count_lense instead"
        )
    arr = proj.array
    d = proj.dim
    diffs = (arr[:, None, :] - arr[None, :, :]).reshape(-1, d)
    lo = diffs.min(axis=0)
    span = diffs.max(axis=0) - lo + 1
    keys = _encode_rows(diffs, lo, span)
    uniq, counts = np.unique(keys, return_counts=True)
    # decode keys back to points; key order is lexicographic point order
    base = np.concatenate(([1], np.cumprod(span[::-1])[:-1]))[::-1].astype(np.int64)
    decoded = np.empty((len(uniq), d), dtype=np.int64)
    rem = uniq.copy()
    for i in range(d):
        decoded[:, i] = rem // base[i] + lo[i]
        rem = rem % base[i]
    pts = tuple(tuple(row) for row in decoded.tolist())
    support = LatticeSet(d, pts, "sumset")
    values = {p: Fraction(int(c), npts) for p, c in zip(pts, counts.tolist())}
    return SymbolTable(d, support, values)


def fejer_symbol(d, r) -> SymbolTable:
    """Lense count over ball count for every shift in the difference set."""
    d = _check_dim(d)
    return _autocorrelation_symbol(enumerate_ball(d, _radius(r)))


def box_symbol(d, half_width) -> SymbolTable:
    """Product-form overlap fraction of a box with its translates."""
    d = _check_dim(d)
    if not isinstance(half_width, (int, np.integer)) or half_width < 0:
        raise ValueError(f"box half-width must be a nonnegative integer, got {half_width!r}")
    n_side = 2 * int(half_width) + 1
    support = enumerate_box(d, 2 * int(half_width))
    values = {}
    for p in support.points:
        num = 1
        for c in p:
            num *= n_side - abs(c)
        values[p] = Fraction(num, n_side**d)
    return SymbolTable(d, support, values)


def w_from_symbol(sym: SymbolTable, mu: int) -> SymbolTable:
    """Antiderivative symbol (1 - m(n)) n_mu / |n|^2 on the same support."""
    if not 1 <= mu <= sym.dim:
        raise ValueError(f"axis index must be in 1..{sym.dim}, got {mu}")
    values = {}
    for p, m in sym.values.items():
        if all(c == 0 for c in p):
            values[p] = Fraction(0)
        else:
            nsq = sum(c * c for c in p)
            values[p] = (1 - m) * Fraction(p[mu - 1], nsq)
    return SymbolTable(sym.dim, sym.support, values)


def w_symbol(d, r, mu: int) -> SymbolTable:
    return w_from_symbol(fejer_symbol(d, r), mu)


def symbol_convergence_bound(d, r, n) -> float:
    """Explicit upper bound for |1 - m(n)| via volume and surface estimates.

    Valid only for lambda > sqrt(d); raises BoundNotApplicableError otherwise.
    """
    d = _check_dim(d)
    rad = _radius(r)
    n = _check_vector(n, d)
    if rad.lambda_sq <= d:
        raise BoundNotApplicableError(
            f"bound requires lambda_sq > d, got {rad.lambda_sq} <= {d}"
        )
    lam = rad.float_lambda()
    rd = math.sqrt(d)
    nn = math.sqrt(sum(c * c for c in n))
    inner = max(lam - rd - nn, 0.0)
    return ((lam + rd) ** d - inner**d) / (lam - rd) ** d


# ---------------------------------------------------------------------------
# Truncation geometry: a projection set together with its symbol
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Truncation:
    """Spectral truncation geometry: ball (squared radius) or box (half-width)."""

    kind: str
    dim: int
    lambda_sq: Fraction | None = None
    half_width: int | None = None

    @property
    def proj(self) -> LatticeSet:
        return _proj(self)

    @property
    def count(self) -> int:
        return len(self.proj)

    @property
    def symbol(self) -> SymbolTable:
        return _symbol(self)

    @property
    def support(self) -> LatticeSet:
        return self.symbol.support

    def w(self, mu: int) -> SymbolTable:
        return _w(self, mu)

    @property
    def radius(self) -> Radius:
        if self.kind != "ball":
            raise ValueError("radius is only defined for ball truncations")
        return Radius(self.lambda_sq)

    @property
    def max_abs_coord(self) -> int:
        return self.proj.max_abs_coord

    @property
    def max_norm_sq(self) -> int:
        return _max_norm_sq(self)

    def label(self) -> str:
        if self.kind == "ball":
            return f"ball(d={self.dim}, lambda_sq={self.lambda_sq})"
        return f"box(d={self.dim}, half_width={self.half_width})"


@lru_cache(maxsize=None)
def _ball_truncation_cached(d: int, lambda_sq: Fraction) -> Truncation:
    return Truncation("ball", d, lambda_sq=lambda_sq)


def ball_truncation(d, r) -> Truncation:
    d = _check_dim(d)
    return _ball_truncation_cached(d, _radius(r).lambda_sq)


@lru_cache(maxsize=None)
def _box_truncation_cached(d: int, half_width: int) -> Truncation:
    return Truncation("box", d, half_width=half_width)


def box_truncation(d, half_width) -> Truncation:
    d = _check_dim(d)
    if not isinstance(half_width, (int, np.integer)) or half_width < 0:
        raise ValueError(f"box half-width must be a nonnegative integer, got {half_width!r}")
    return _box_truncation_cached(d, int(half_width))


def as_truncation(dim: int, r) -> Truncation:
    """Resolve a radius-or-truncation argument against an expected dimension."""
    if isinstance(r, Truncation):
        if r.dim != dim:
            raise ValueError(f"dimension mismatch: truncation has d={r.dim}, expected {dim}")
        return r
    return ball_truncation(dim, r)


@lru_cache(maxsize=None)
def _proj(trunc: Truncation) -> LatticeSet:
    if trunc.kind == "ball":
        return enumerate_ball(trunc.dim, Radius(trunc.lambda_sq))
    if trunc.kind == "box":
        return enumerate_box(trunc.dim, trunc.half_width)
    raise ValueError(f"unknown truncation kind {trunc.kind!r}")


@lru_cache(maxsize=None)
def _symbol(trunc: Truncation) -> SymbolTable:
    if trunc.kind == "ball":
        return _autocorrelation_symbol(_proj(trunc))
    return box_symbol(trunc.dim, trunc.half_width)


@lru_cache(maxsize=None)
def _w(trunc: Truncation, mu: int) -> SymbolTable:
    return w_from_symbol(_symbol(trunc), mu)


@lru_cache(maxsize=None)
def _max_norm_sq(trunc: Truncation) -> int:
    arr = _proj(trunc).array
    if len(arr) == 0:
        return 0
    return int((arr * arr).sum(axis=1).max())
