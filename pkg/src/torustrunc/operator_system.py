"""Multi-level Toeplitz operators, trig polynomials and Dirac commutators.

A truncated operator is stored by its Toeplitz coefficients t_p on the
difference set of the projection lattice; the dense matrix (t_{k-l}) is
realized on demand with rows and columns indexed by lattice points in
lexicographic order (times a spinor index for commutators).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from .lattice import _check_dim, _check_vector
from .symbols import SymbolTable, Truncation, as_truncation

__all__ = [
    "GammaRep",
    "TrigPolynomial",
    "TruncatedOperator",
    "DenseOperator",
    "MatrixTrigPolynomial",
    "clifford_generators",
    "compress",
    "expectation",
    "fourier_multiply",
    "schur_multiply",
    "dirac_commutator_fn",
    "dirac_commutator_op",
    "lipschitz_fn",
    "lipschitz_fn_bounds",
    "lipschitz_op",
    "spectral_norm",
    "function_grid",
    "save_dense",
    "load_dense",
]

_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


@dataclass(frozen=True, eq=False)
class GammaRep:
    """Self-adjoint matrices with gamma_mu gamma_nu + gamma_nu gamma_mu = 2 delta identity."""

    dim: int
    spinor_dim: int
    matrices: tuple

    def __post_init__(self):
        eye = np.eye(self.spinor_dim, dtype=complex)
        for mu, g in enumerate(self.matrices):
            if not np.array_equal(g, g.conj().T):
                raise AssertionError(f"gamma_{mu + 1} is not self-adjoint")
        for mu, g in enumerate(self.matrices):
            for nu, h in enumerate(self.matrices):
                anti = g @ h + h @ g
                expected = 2.0 * eye if mu == nu else np.zeros_like(eye)
                if not np.array_equal(anti, expected):
                    raise AssertionError(f"anticommutation fails for ({mu + 1}, {nu + 1})")


def _gamma_matrices(d: int) -> list:
    if d == 1:
        return [np.array([[1.0 + 0.0j]])]
    if d == 2:
        return [_SIGMA_X.copy(), _SIGMA_Y.copy()]
    if d % 2 == 1:
        base = _gamma_matrices(d - 1)
        k = (d - 1) // 2
        chirality = np.eye(base[0].shape[0], dtype=complex)
        for g in base:
            chirality = chirality @ g
        chirality = ((-1.0j) ** k) * chirality
        return base + [chirality]
    base = _gamma_matrices(d - 2)
    s = base[0].shape[0]
    eye = np.eye(s, dtype=complex)
    out = [np.kron(g, _SIGMA_Z) for g in base]
    out.append(np.kron(eye, _SIGMA_X))
    out.append(np.kron(eye, _SIGMA_Y))
    return out


@lru_cache(maxsize=None)
def clifford_generators(d: int) -> GammaRep:
    """Standard recursive construction; relations are verified exactly on build."""
    _check_dim(d)
    mats = _gamma_matrices(d)
    for m in mats:
        m.flags.writeable = False
    return GammaRep(d, mats[0].shape[0], tuple(mats))


# ---------------------------------------------------------------------------
# Trigonometric polynomials
# ---------------------------------------------------------------------------


def _normalize_coeffs(dim: int, coeffs) -> dict:
    out = {}
    for k, v in dict(coeffs).items():
        kk = _check_vector(k, dim)
        v = complex(v)
        if v != 0:
            out[kk] = v
    return out


@dataclass(frozen=True)
class TrigPolynomial:
    """Finitely supported Fourier coefficient map on the d-torus."""

    dim: int
    coeffs: dict

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _normalize_coeffs(self.dim, self.coeffs))

    @classmethod
    def constant(cls, dim: int, value=1.0) -> "TrigPolynomial":
        return cls(dim, {(0,) * dim: value})

    @classmethod
    def basis(cls, dim: int, n, value=1.0) -> "TrigPolynomial":
        return cls(dim, {tuple(n): value})

    def coeff(self, n) -> complex:
        return self.coeffs.get(tuple(n), 0.0 + 0.0j)

    @property
    def support(self) -> tuple:
        return tuple(sorted(self.coeffs))

    def __add__(self, other: "TrigPolynomial") -> "TrigPolynomial":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0.0) + v
        return TrigPolynomial(self.dim, out)

    def __neg__(self) -> "TrigPolynomial":
        return TrigPolynomial(self.dim, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: "TrigPolynomial") -> "TrigPolynomial":
        return self + (-other)

    def __mul__(self, scalar) -> "TrigPolynomial":
        return TrigPolynomial(self.dim, {k: scalar * v for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def multiply(self, other: "TrigPolynomial") -> "TrigPolynomial":
        """Pointwise product (convolution of coefficients)."""
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        out = {}
        for p, a in self.coeffs.items():
            for q, b in other.coeffs.items():
                k = tuple(pi + qi for pi, qi in zip(p, q))
                out[k] = out.get(k, 0.0) + a * b
        return TrigPolynomial(self.dim, out)

    def adjoint(self) -> "TrigPolynomial":
        return TrigPolynomial(
            self.dim, {tuple(-c for c in k): v.conjugate() for k, v in self.coeffs.items()}
        )

    def is_self_adjoint(self, tol: float = 0.0) -> bool:
        for k, v in self.coeffs.items():
            w = self.coeffs.get(tuple(-c for c in k))
            if w is None or abs(w - v.conjugate()) > tol:
                return False
        return True

    def evaluate(self, x) -> complex | np.ndarray:
        pts = np.asarray(x, dtype=float)
        single = pts.ndim == 1
        pts = pts.reshape(-1, self.dim)
        if not self.coeffs:
            vals = np.zeros(len(pts), dtype=complex)
        else:
            support = np.array(list(self.coeffs.keys()), dtype=float)
            cvec = np.array(list(self.coeffs.values()))
            vals = np.exp(1j * (pts @ support.T)) @ cvec
        return complex(vals[0]) if single else vals

    def coefficient_sup_bound(self) -> float:
        return float(sum(abs(v) for v in self.coeffs.values()))

    def coefficient_lipschitz_bound(self) -> float:
        """Upper bound on the Lipschitz constant: sum of |n| |c_n|."""
        return float(
            sum(math.sqrt(sum(c * c for c in k)) * abs(v) for k, v in self.coeffs.items())
        )

    def gradient_lipschitz_bound(self) -> float:
        """Upper bound on the Lipschitz constant of the gradient field."""
        return float(sum(sum(c * c for c in k) * abs(v) for k, v in self.coeffs.items()))

    def sup_bounds(self, grid) -> tuple:
        """Certified (lower, upper) bracket for the sup norm from grid values."""
        vals = np.abs(self.evaluate(grid.nodes))
        lower = float(vals.max())
        cover = math.pi * math.sqrt(self.dim) / grid.resolution
        return lower, lower + cover * self.coefficient_lipschitz_bound()


def function_grid(f: TrigPolynomial, minimum: int = 33) -> "TorusGrid":
    """Default evaluation grid sized from the coefficient support of f."""
    from .kernels import TorusGrid

    deg = max((max(abs(c) for c in k) for k in f.coeffs), default=0)
    return TorusGrid(f.dim, max(minimum, 4 * deg + 9))


# ---------------------------------------------------------------------------
# Truncated operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruncatedOperator:
    """Element of the truncated operator system, stored by Toeplitz coefficients."""

    trunc: Truncation
    coeffs: dict

    def __post_init__(self):
        coeffs = _normalize_coeffs(self.trunc.dim, self.coeffs)
        support = self.trunc.support
        for p in coeffs:
            if p not in support:
                raise ValueError(f"coefficient index {p} lies outside the difference set")
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def dim(self) -> int:
        return self.trunc.dim

    @classmethod
    def identity(cls, trunc: Truncation) -> "TruncatedOperator":
        return cls(trunc, {(0,) * trunc.dim: 1.0})

    @classmethod
    def basis_element(cls, trunc: Truncation, p, value=1.0) -> "TruncatedOperator":
        return cls(trunc, {tuple(p): value})

    def coeff(self, p) -> complex:
        return self.coeffs.get(tuple(p), 0.0 + 0.0j)

    def __add__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        if self.trunc != other.trunc:
            raise ValueError("operators live on different truncations")
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0.0) + v
        return TruncatedOperator(self.trunc, out)

    def __neg__(self) -> "TruncatedOperator":
        return TruncatedOperator(self.trunc, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        return self + (-other)

    def __mul__(self, scalar) -> "TruncatedOperator":
        return TruncatedOperator(self.trunc, {k: scalar * v for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def adjoint(self) -> "TruncatedOperator":
        return TruncatedOperator(
            self.trunc, {tuple(-c for c in k): v.conjugate() for k, v in self.coeffs.items()}
        )

    def is_self_adjoint(self, tol: float = 0.0) -> bool:
        for k, v in self.coeffs.items():
            w = self.coeffs.get(tuple(-c for c in k))
            if w is None or abs(w - v.conjugate()) > tol:
                return False
        return True

    def dense(self) -> np.ndarray:
        """Dense matrix (t_{k-l}) over projection points in canonical order."""
        layout = _layout(self.trunc)
        vec = np.zeros(len(layout.support_points), dtype=complex)
        for p, v in self.coeffs.items():
            vec[layout.support_index[p]] = v
        return vec[layout.diff_index]

    def to_json(self) -> dict:
        out = {
            "dim": self.dim,
            "kind": self.trunc.kind,
            "entries": [
                [list(p), v.real, v.imag] for p, v in sorted(self.coeffs.items())
            ],
        }
        if self.trunc.kind == "ball":
            out["lambda_sq"] = str(self.trunc.lambda_sq)
        else:
            out["half_width"] = self.trunc.half_width
        return out

    @classmethod
    def from_json(cls, data: dict) -> "TruncatedOperator":
        from .symbols import ball_truncation, box_truncation

        if data.get("kind", "ball") == "ball":
            trunc = ball_truncation(data["dim"], Fraction(data["lambda_sq"]))
        else:
            trunc = box_truncation(data["dim"], data["half_width"])
        coeffs = {tuple(p): complex(re, im) for p, re, im in data["entries"]}
        return cls(trunc, coeffs)


@dataclass(frozen=True, eq=False)
class _Layout:
    points: tuple
    support_points: tuple
    support_index: dict
    diff_index: np.ndarray
    axis_diffs: np.ndarray


@lru_cache(maxsize=None)
def _layout(trunc: Truncation) -> _Layout:
    pts = trunc.proj.array
    support = trunc.support.points
    support_index = {p: i for i, p in enumerate(support)}
    n = len(pts)
    d = trunc.dim
    diff = pts[:, None, :] - pts[None, :, :]
    diff_index = np.empty((n, n), dtype=np.int64)
    flat = diff.reshape(-1, d)
    keys = [tuple(row) for row in flat.tolist()]
    diff_index = np.array([support_index[k] for k in keys], dtype=np.int64).reshape(n, n)
    axis_diffs = np.moveaxis(diff, -1, 0).astype(float)
    axis_diffs.flags.writeable = False
    diff_index.flags.writeable = False
    return _Layout(tuple(map(tuple, pts.tolist())), support, support_index, diff_index, axis_diffs)


@dataclass(frozen=True, eq=False)
class DenseOperator:
    """Dense matrix indexed by (lattice point, spinor index) pairs, lattice-major."""

    matrix: np.ndarray
    points: tuple
    spinor_dim: int


def spectral_norm(a) -> float:
    """Largest singular value; accepts arrays and DenseOperator wrappers."""
    mat = a.matrix if isinstance(a, DenseOperator) else np.asarray(a)
    if mat.size == 0:
        return 0.0
    if not np.isfinite(mat).all():
        raise ValueError("matrix has non-finite entries")
    return float(np.linalg.norm(mat, 2))


# ---------------------------------------------------------------------------
# Compression and expectation
# ---------------------------------------------------------------------------


def compress(f: TrigPolynomial, r) -> TruncatedOperator:
    """Keep the coefficients of f supported on the difference set; drop the rest."""
    trunc = as_truncation(f.dim, r)
    support = trunc.support
    kept = {p: v for p, v in f.coeffs.items() if p in support}
    return TruncatedOperator(trunc, kept)


def expectation(t: TruncatedOperator) -> TrigPolynomial:
    """Closed form of the state-averaged symbol: coefficient p maps to m(p) t_p."""
    return fourier_multiply(t.trunc.symbol, TrigPolynomial(t.dim, t.coeffs))


def fourier_multiply(sym: SymbolTable, f: TrigPolynomial) -> TrigPolynomial:
    """Scale Fourier coefficients by the symbol, extended by zero off support."""
    if sym.dim != f.dim:
        raise ValueError(f"dimension mismatch: symbol d={sym.dim}, function d={f.dim}")
    vals = sym.float_values
    return TrigPolynomial(f.dim, {n: vals.get(n, 0.0) * c for n, c in f.coeffs.items()})


def schur_multiply(sym: SymbolTable, t: TruncatedOperator) -> TruncatedOperator:
    """Entrywise multiplier: coefficient p maps to symbol(p) t_p."""
    if sym.dim != t.dim:
        raise ValueError(f"dimension mismatch: symbol d={sym.dim}, operator d={t.dim}")
    vals = sym.float_values
    return TruncatedOperator(t.trunc, {p: vals.get(p, 0.0) * c for p, c in t.coeffs.items()})


# ---------------------------------------------------------------------------
# Dirac commutators and Lipschitz seminorms
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MatrixTrigPolynomial:
    """Trig polynomial with square-matrix coefficients (spinor-valued multiplier)."""

    dim: int
    spinor_dim: int
    coeffs: dict

    def evaluate(self, x) -> np.ndarray:
        pts = np.asarray(x, dtype=float).reshape(-1, self.dim)
        s = self.spinor_dim
        if not self.coeffs:
            return np.zeros((len(pts), s, s), dtype=complex)
        support = np.array(list(self.coeffs.keys()), dtype=float)
        stack = np.array(list(self.coeffs.values())).reshape(len(self.coeffs), s * s)
        vals = np.exp(1j * (pts @ support.T)) @ stack
        return vals.reshape(len(pts), s, s)

    def scale_coeffs(self, lookup: dict) -> "MatrixTrigPolynomial":
        out = {}
        for n, mat in self.coeffs.items():
            w = lookup.get(n, 0.0)
            if w != 0.0:
                out[n] = w * mat
        return MatrixTrigPolynomial(self.dim, self.spinor_dim, out)

    def sup_spectral_norm(self, grid) -> float:
        vals = self.evaluate(grid.nodes)
        if self.spinor_dim == 1:
            return float(np.abs(vals).max()) if vals.size else 0.0
        svals = np.linalg.svd(vals, compute_uv=False)
        return float(svals.max()) if svals.size else 0.0


def dirac_commutator_fn(f: TrigPolynomial, gamma: GammaRep | None = None) -> MatrixTrigPolynomial:
    """Commutator of the Dirac operator with multiplication by f.

    Acts as multiplication by the matrix field sum_mu (sum_n n_mu c_n e_n) gamma_mu.
    """
    gamma = gamma or clifford_generators(f.dim)
    if gamma.dim != f.dim:
        raise ValueError("gamma representation dimension mismatch")
    coeffs = {}
    for n, c in f.coeffs.items():
        mat = sum(n[mu] * gamma.matrices[mu] for mu in range(f.dim)) * c
        if np.any(mat):
            coeffs[n] = mat
    return MatrixTrigPolynomial(f.dim, gamma.spinor_dim, coeffs)


def lipschitz_fn(f: TrigPolynomial, grid=None, gamma: GammaRep | None = None) -> float:
    """Grid supremum of the commutator field norm (a certified lower estimate).

    For real-valued f this is the grid supremum of the Euclidean gradient norm.
    """
    grid = grid or function_grid(f)
    return dirac_commutator_fn(f, gamma).sup_spectral_norm(grid)


def lipschitz_fn_bounds(f: TrigPolynomial, grid=None, gamma: GammaRep | None = None) -> tuple:
    """(lower, upper) bracket: grid sup plus a cover-radius inflation term."""
    grid = grid or function_grid(f)
    lower = lipschitz_fn(f, grid, gamma)
    cover = math.pi * math.sqrt(f.dim) / grid.resolution
    inflation = math.sqrt(2.0) * f.gradient_lipschitz_bound()
    return lower, lower + cover * inflation


def dirac_commutator_op(t: TruncatedOperator, gamma: GammaRep | None = None) -> DenseOperator:
    """Dense compressed commutator: coordinate-difference scaling tensor gamma."""
    gamma = gamma or clifford_generators(t.dim)
    if gamma.dim != t.dim:
        raise ValueError("gamma representation dimension mismatch")
    layout = _layout(t.trunc)
    dense = t.dense()
    s = gamma.spinor_dim
    n = dense.shape[0]
    out = np.zeros((n * s, n * s), dtype=complex)
    for mu in range(t.dim):
        out += np.kron(layout.axis_diffs[mu] * dense, gamma.matrices[mu])
    return DenseOperator(out, layout.points, s)


def lipschitz_op(t: TruncatedOperator, gamma: GammaRep | None = None) -> float:
    return spectral_norm(dirac_commutator_op(t, gamma))


# ---------------------------------------------------------------------------
# Dense export: one-line JSON header followed by raw row-major bytes
# ---------------------------------------------------------------------------


def save_dense(op: DenseOperator, path) -> None:
    mat = np.ascontiguousarray(op.matrix.astype("<c16"))
    header = {
        "format": "dense-complex128-row-major",
        "shape": list(mat.shape),
        "spinor_dim": op.spinor_dim,
        "points": [list(p) for p in op.points],
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, separators=(",", ":")).encode())
        fh.write(b"\n")
        fh.write(mat.tobytes())


def load_dense(path) -> DenseOperator:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode())
        raw = fh.read()
    shape = tuple(header["shape"])
    mat = np.frombuffer(raw, dtype="<c16").reshape(shape).astype(complex)
    points = tuple(tuple(p) for p in header["points"])
    return DenseOperator(mat, points, header["spinor_dim"])
