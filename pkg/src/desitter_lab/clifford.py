"""Clifford algebra of a real quadratic space of dimension 4 or 5.

Multivectors are dense arrays of ``2**dim`` coefficients indexed by blade
bitmask.  Bit ``i`` set means generator ``g_i`` is a factor; blades are the
exterior products of generators in ascending order, so a non-orthonormal
metric (for example a coordinate cobasis with ``g^{mu nu}``) is handled by
converting to an orthonormal internal frame and back.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np

from . import kernels

DEFAULT_TOL = 1e-12


class CliffordError(ValueError):
    """Rejected input (signature mismatch, degenerate metric, bad grade)."""


def grade_of(mask: int) -> int:
    return bin(mask).count("1")


def reorder_sign(a: int, b: int) -> int:
    """Sign from sorting the generator list of blade ``a`` followed by ``b``."""
    a >>= 1
    swaps = 0
    while a:
        swaps += grade_of(a & b)
        a >>= 1
    return -1 if swaps & 1 else 1


@lru_cache(maxsize=None)
def blade_indices(dim: int) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(i for i in range(dim) if m >> i & 1) for m in range(1 << dim))


@lru_cache(maxsize=None)
def grades(dim: int) -> np.ndarray:
    g = np.array([grade_of(m) for m in range(1 << dim)], dtype=np.int64)
    g.setflags(write=False)
    return g


@lru_cache(maxsize=None)
def masks_of_grade(dim: int, k: int) -> tuple[int, ...]:
    return tuple(sum(1 << i for i in c) for c in combinations(range(dim), k))


@lru_cache(maxsize=None)
def _product_tables(dim: int, squares: tuple[int, ...], kind: str) -> tuple[np.ndarray, np.ndarray]:
    """Sign and target tables for products of orthonormal blades.

    ``squares[i]`` is e_i e_i (+1 or -1).  ``kind`` selects the geometric
    product or one of its graded pieces.
    """
    n = 1 << dim
    signs = np.zeros((n, n))
    target = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            if kind == "outer" and i & j:
                continue
            if kind == "left" and i & ~j:
                continue
            s = reorder_sign(i, j)
            common = i & j
            for k in range(dim):
                if common >> k & 1:
                    s *= squares[k]
            signs[i, j] = s
            target[i, j] = i ^ j
    signs.setflags(write=False)
    target.setflags(write=False)
    return signs, target


def _compound(c: np.ndarray) -> np.ndarray:
    """Matrix of the outermorphism induced by ``c`` on the blade basis.

    Row i of ``c`` expresses user generator i in the internal frame, so
    result[T, S] is the minor det(c[S, T]).
    """
    dim = c.shape[0]
    n = 1 << dim
    out = np.zeros((n, n))
    out[0, 0] = 1.0
    idx = blade_indices(dim)
    for k in range(1, dim + 1):
        ms = masks_of_grade(dim, k)
        for s in ms:
            rows = list(idx[s])
            for t in ms:
                out[t, s] = np.linalg.det(c[np.ix_(rows, list(idx[t]))])
    return out


@dataclass(frozen=True, eq=False)
class Signature:
    """Bilinear form on grade-1 elements plus an orientation flag."""

    metric: np.ndarray
    orientation: int = 1
    _squares: tuple = field(init=False, repr=False)
    _to_internal: np.ndarray | None = field(init=False, repr=False)
    _from_internal: np.ndarray | None = field(init=False, repr=False)

    def __post_init__(self):
        m = np.array(self.metric, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (4, 5):
            raise CliffordError(f"metric must be 4x4 or 5x5, got shape {m.shape}")
        if not np.array_equal(m, m.T):
            raise CliffordError("metric must be exactly symmetric")
        if abs(np.linalg.det(m)) <= 1e-12:
            raise CliffordError("metric is degenerate")
        if self.orientation not in (1, -1):
            raise CliffordError("orientation must be +1 or -1")
        m.setflags(write=False)
        object.__setattr__(self, "metric", m)

        diag = np.diag(m)
        if np.count_nonzero(m - np.diag(diag)) == 0:
            squares = tuple(int(v) for v in np.sign(diag))
            scale = np.sqrt(np.abs(diag))
            if np.all(scale == 1.0):
                to_int = from_int = None
            else:
                lam = _compound(np.diag(scale))
                to_int, from_int = lam, np.diag(1.0 / np.diag(lam))
        else:
            w, v = np.linalg.eigh(m)
            squares = tuple(int(x) for x in np.sign(w))
            c = v * np.sqrt(np.abs(w))
            to_int = _compound(c)
            from_int = np.linalg.inv(to_int)
        object.__setattr__(self, "_squares", squares)
        object.__setattr__(self, "_to_internal", to_int)
        object.__setattr__(self, "_from_internal", from_int)

    @classmethod
    def lorentzian(cls, dim: int = 4, orientation: int = 1) -> "Signature":
        return cls(np.diag([1.0] + [-1.0] * (dim - 1)), orientation)

    @property
    def dim(self) -> int:
        return self.metric.shape[0]

    @property
    def size(self) -> int:
        return 1 << self.dim

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.metric))

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Signature):
            return NotImplemented
        return self.orientation == other.orientation and np.array_equal(self.metric, other.metric)

    def __hash__(self) -> int:
        return hash((self.orientation, self.metric.tobytes()))

    # conversions between the user blade basis and the orthonormal frame
    def to_internal(self, coeffs: np.ndarray) -> np.ndarray:
        if self._to_internal is None:
            return coeffs
        return coeffs @ self._to_internal.T

    def from_internal(self, coeffs: np.ndarray) -> np.ndarray:
        if self._from_internal is None:
            return coeffs
        return coeffs @ self._from_internal.T

    def product(self, a: np.ndarray, b: np.ndarray, kind: str = "geometric") -> np.ndarray:
        """Batched product of coefficient arrays of shape (n, 2**dim)."""
        signs, target = _product_tables(self.dim, self._squares, kind)
        ai = self.to_internal(np.atleast_2d(a))
        bi = self.to_internal(np.atleast_2d(b))
        return self.from_internal(kernels.blade_products(ai, bi, signs, target))


@dataclass(frozen=True, eq=False)
class Multivector:
    signature: Signature
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.float64).reshape(-1)
        if c.shape[0] != self.signature.size:
            raise CliffordError(f"expected {self.signature.size} coefficients, got {c.shape[0]}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # construction helpers
    @classmethod
    def scalar(cls, sig: Signature, value: float) -> "Multivector":
        c = np.zeros(sig.size)
        c[0] = value
        return cls(sig, c)

    @classmethod
    def blade(cls, sig: Signature, *indices: int, coeff: float = 1.0) -> "Multivector":
        """Exterior product of the listed generators (any order, with sign)."""
        out = cls.scalar(sig, coeff)
        for i in indices:
            out = outer_product(out, cls.basis_vector(sig, i))
        return out

    @classmethod
    def basis_vector(cls, sig: Signature, i: int) -> "Multivector":
        if not 0 <= i < sig.dim:
            raise CliffordError(f"generator index {i} out of range")
        c = np.zeros(sig.size)
        c[1 << i] = 1.0
        return cls(sig, c)

    @classmethod
    def from_grade(cls, sig: Signature, k: int, values) -> "Multivector":
        """Homogeneous element from coefficients listed in ascending mask order."""
        c = np.zeros(sig.size)
        c[list(masks_of_grade(sig.dim, k))] = values
        return cls(sig, c)

    # arithmetic
    def _check(self, other: "Multivector"):
        if not isinstance(other, Multivector):
            raise CliffordError("operand is not a Multivector")
        if self.signature != other.signature:
            raise CliffordError("signature mismatch")

    def __add__(self, other):
        if isinstance(other, (int, float)):
            return self + Multivector.scalar(self.signature, other)
        self._check(other)
        return Multivector(self.signature, self.coeffs + other.coeffs)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Multivector(self.signature, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return Multivector(self.signature, self.coeffs * other)
        return geometric_product(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, float, np.floating)):
            return Multivector(self.signature, self.coeffs * other)
        return NotImplemented

    def __truediv__(self, other: float):
        return Multivector(self.signature, self.coeffs / other)

    def __xor__(self, other):
        return outer_product(self, other)

    def grade(self, k: int) -> "Multivector":
        return grade_project(self, k)

    def present_grades(self, tol: float = 0.0) -> list[int]:
        g = grades(self.signature.dim)
        return sorted({int(g[i]) for i in np.nonzero(np.abs(self.coeffs) > tol)[0]})

    def scalar_part(self) -> float:
        return float(self.coeffs[0])

    def norm_inf(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def approx_equal(self, other: "Multivector", tol: float = DEFAULT_TOL) -> bool:
        self._check(other)
        return bool(np.max(np.abs(self.coeffs - other.coeffs)) <= tol)

    def __str__(self) -> str:
        return render(self)

    def __repr__(self) -> str:
        return f"Multivector({render(self)})"


def _same(a: Multivector, b: Multivector) -> Signature:
    if not isinstance(a, Multivector) or not isinstance(b, Multivector):
        raise CliffordError("operands must be Multivectors")
    if a.signature != b.signature:
        raise CliffordError("signature mismatch")
    return a.signature


def geometric_product(a: Multivector, b: Multivector) -> Multivector:
    sig = _same(a, b)
    return Multivector(sig, sig.product(a.coeffs, b.coeffs, "geometric")[0])


def outer_product(a: Multivector, b: Multivector) -> Multivector:
    sig = _same(a, b)
    return Multivector(sig, sig.product(a.coeffs, b.coeffs, "outer")[0])


def left_contraction(a: Multivector, b: Multivector) -> Multivector:
    """a ⌟ b; zero whenever a grade of ``a`` exceeds a grade of ``b``."""
    sig = _same(a, b)
    return Multivector(sig, sig.product(a.coeffs, b.coeffs, "left")[0])


def right_contraction(b: Multivector, a: Multivector) -> Multivector:
    """b ⌞ a, defined through A_r ⌟ B_s = (-1)^{r(s-r)} B_s ⌞ A_r."""
    sig = _same(a, b)
    out = np.zeros(sig.size)
    for r in a.present_grades():
        ar = grade_project(a, r)
        for s in b.present_grades():
            if s < r:
                continue
            sign = -1.0 if (r * (s - r)) % 2 else 1.0
            out += sign * left_contraction(ar, grade_project(b, s)).coeffs
    return Multivector(sig, out)


def grade_project(a: Multivector, k: int) -> Multivector:
    mask = grades(a.signature.dim) == k
    return Multivector(a.signature, np.where(mask, a.coeffs, 0.0))


def reversion(a: Multivector) -> Multivector:
    g = grades(a.signature.dim)
    sign = np.where((g * (g - 1) // 2) % 2 == 1, -1.0, 1.0)
    return Multivector(a.signature, a.coeffs * sign)


def scalar_product(a: Multivector, b: Multivector) -> float:
    """Sum over blade pairs of equal grade of the Gram determinant of generators."""
    sig = _same(a, b)
    idx = blade_indices(sig.dim)
    total = a.coeffs[0] * b.coeffs[0]
    for k in range(1, sig.dim + 1):
        ms = masks_of_grade(sig.dim, k)
        for s in ms:
            if a.coeffs[s] == 0.0:
                continue
            for t in ms:
                if b.coeffs[t] == 0.0:
                    continue
                gram = sig.metric[np.ix_(idx[s], idx[t])]
                total += a.coeffs[s] * b.coeffs[t] * np.linalg.det(gram)
    return float(total)


def pseudoscalar(sig: Signature) -> Multivector:
    """Volume element τ_g: unit-magnitude top blade with the signature's orientation."""
    c = np.zeros(sig.size)
    c[-1] = sig.orientation / np.sqrt(abs(sig.det))
    return Multivector(sig, c)


def hodge_star(a: Multivector) -> Multivector:
    """⋆A = reversion(A) ⌟ τ_g."""
    return left_contraction(reversion(a), pseudoscalar(a.signature))


def hodge_star_inverse(a: Multivector) -> Multivector:
    sig = a.signature
    n = sig.dim
    sgn = float(np.sign(sig.det))
    out = np.zeros(sig.size)
    for r in a.present_grades():
        sign = (-1.0 if (r * (n - r)) % 2 else 1.0) * sgn
        out += sign * hodge_star(grade_project(a, r)).coeffs
    return Multivector(sig, out)


# component formulas (second, independent Hodge route; batched over points)

@lru_cache(maxsize=None)
def _complement_data(dim: int):
    full = (1 << dim) - 1
    data = []
    for k in range(dim + 1):
        ms = np.array(masks_of_grade(dim, k), dtype=np.int64)
        idx = np.array([blade_indices(dim)[m] for m in ms], dtype=np.int64).reshape(len(ms), k)
        comp = full ^ ms
        eps = np.array([reorder_sign(int(m), int(full ^ m)) for m in ms], dtype=np.float64)
        data.append((ms, idx, comp, eps))
    return data


def compound_batch(metric: np.ndarray, k: int) -> np.ndarray:
    """k-th compound (all k×k minors) of a batch of matrices, shape (..., nk, nk)."""
    dim = metric.shape[-1]
    _, idx, _, _ = _complement_data(dim)[k]
    if k == 0:
        return np.ones(metric.shape[:-2] + (1, 1))
    if k == 1:
        return metric
    sub = metric[..., idx[:, None, :, None], idx[None, :, None, :]]
    return _small_det(sub) if k <= 3 else np.linalg.det(sub)


def _small_det(m: np.ndarray) -> np.ndarray:
    """Closed-form determinant for trailing 2×2 or 3×3 blocks."""
    if m.shape[-1] == 2:
        return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    return (
        m[..., 0, 0] * (m[..., 1, 1] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 1])
        - m[..., 0, 1] * (m[..., 1, 0] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 0])
        + m[..., 0, 2] * (m[..., 1, 0] * m[..., 2, 1] - m[..., 1, 1] * m[..., 2, 0])
    )


def hodge_star_components(coeffs: np.ndarray, metric: np.ndarray, orientation: int = 1) -> np.ndarray:
    """Hodge dual from (⋆A)_{ν..} = (1/k!) |det|^{-1/2} A^{μ..} ε_{μ..ν..}.

    ``coeffs`` has shape (..., 2**dim) in the blade basis, ``metric`` is the
    bilinear form on grade-1 elements with shape (..., dim, dim).
    """
    dim = metric.shape[-1]
    vol = orientation / np.sqrt(np.abs(np.linalg.det(metric)))
    out = np.zeros(np.broadcast_shapes(coeffs.shape, metric.shape[:-2] + (1 << dim,)))
    for k, (ms, _, comp, eps) in enumerate(_complement_data(dim)):
        if not np.any(coeffs[..., ms]):
            continue
        raised = np.einsum("...st,...t->...s", compound_batch(metric, k), coeffs[..., ms])
        out[..., comp] = (vol[..., None] * eps) * raised
    return out


def hodge_star_inverse_components(coeffs: np.ndarray, metric: np.ndarray, orientation: int = 1) -> np.ndarray:
    dim = metric.shape[-1]
    sgn = np.sign(np.linalg.det(metric))
    g = grades(dim)
    sign_by_blade = np.where((g * (dim - g)) % 2 == 1, -1.0, 1.0)
    return hodge_star_components(coeffs * sign_by_blade, metric, orientation) * sgn[..., None]


def render(a: Multivector) -> str:
    """Debug text such as ``1.0 g0^g1``; terms sorted by blade bitmask."""
    idx = blade_indices(a.signature.dim)
    terms = []
    for m in range(a.signature.size):
        c = float(a.coeffs[m])
        if c == 0.0:
            continue
        name = "^".join(f"g{i}" for i in idx[m])
        terms.append(repr(c) if m == 0 else f"{c!r} {name}")
    return " + ".join(terms) if terms else "0.0"


def random_multivector(sig: Signature, rng: np.random.Generator, grade: int | None = None) -> Multivector:
    """Coefficients uniform in [-1, 1]; optionally restricted to one grade."""
    c = rng.uniform(-1.0, 1.0, sig.size)
    if grade is not None:
        c = np.where(grades(sig.dim) == grade, c, 0.0)
    return Multivector(sig, c)
