"""Chart-based tensor calculus in coordinate cobases.

Forms are stored as blade coefficients on dx^{i1}∧…∧dx^{ik} (bitmask
index, ascending order), so a 4-dimensional chart field value is an array
of 16 numbers.  Everything here is vectorized over leading point axes:
metric functions take points of shape (..., 4).

Curvature convention: ``riemann[r, s, m, v]`` is
R^r_{smv} = ∂_m Γ^r_{vs} − ∂_v Γ^r_{ms} + Γ^r_{mλ}Γ^λ_{vs} − Γ^r_{vλ}Γ^λ_{ms}
and the Ricci tensor contracts the first and last slots,
R_{νσ} = R^μ_{νσμ}.  With this pairing the Ricci operator ∂∧∂ acting on
dx^μ returns R^μ_ν dx^ν.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable

import numpy as np

from . import kernels
from .clifford import (
    Multivector,
    Signature,
    grades,
    hodge_star_components,
    hodge_star_inverse_components,
    outer_product,
    reorder_sign,
)

DIM = 4
NBLADES = 1 << DIM
TOP = NBLADES - 1


class DomainError(ValueError):
    """A point (or finite-difference stencil point) lies outside the chart."""


class SingularMetricError(ValueError):
    pass


# ---------------------------------------------------------------- blade tables

@lru_cache(maxsize=None)
def _tables() -> tuple[np.ndarray, np.ndarray]:
    """WEDGE[j] @ c = dx^j ∧ c and INTERIOR[j] @ c = i_{∂_j} c on blade arrays."""
    wedge = np.zeros((DIM, NBLADES, NBLADES))
    interior = np.zeros((DIM, NBLADES, NBLADES))
    for j in range(DIM):
        bit = 1 << j
        for n in range(NBLADES):
            if n & bit:
                continue
            s = reorder_sign(bit, n)
            wedge[j, n | bit, n] = s
            interior[j, n, n | bit] = s
    wedge.setflags(write=False)
    interior.setflags(write=False)
    return wedge, interior


def wedge_dx(c: np.ndarray, j: int) -> np.ndarray:
    return c @ _tables()[0][j].T


def interior(vec: np.ndarray, c: np.ndarray) -> np.ndarray:
    """i_V c for vector components ``vec`` (..., 4) and forms ``c`` (..., 16)."""
    return np.einsum("...j,jab,...b->...a", vec, _tables()[1], c)


@lru_cache(maxsize=None)
def _derivation_table() -> np.ndarray:
    wedge, inter = _tables()
    table = np.einsum("rab,nbc->nrac", wedge, inter).reshape(DIM * DIM, NBLADES * NBLADES)
    table.setflags(write=False)
    return table


def derivation(mat: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Σ M^ν_ρ dx^ρ ∧ i_{∂_ν} c, the algebraic action of dx^ν ↦ M^ν_ρ dx^ρ."""
    mat = np.asarray(mat, dtype=np.float64)
    op = (mat.reshape(mat.shape[:-2] + (DIM * DIM,)) @ _derivation_table()).reshape(
        mat.shape[:-2] + (NBLADES, NBLADES)
    )
    return np.matmul(op, np.asarray(c, dtype=np.float64)[..., None])[..., 0]


def exterior_from_partials(dc: np.ndarray) -> np.ndarray:
    """dA from partials dc[..., j, blade] = ∂_j A."""
    return np.einsum("jab,...jb->...a", _tables()[0], dc)


def grade_sign() -> np.ndarray:
    """(−1)^p on each blade of grade p."""
    g = grades(DIM)
    return np.where(g % 2 == 1, -1.0, 1.0)


# ---------------------------------------------------------------- differences

def _stencil(x: np.ndarray, h: float) -> np.ndarray:
    """Points x ± h e_k stacked as (..., 2, 4, 4): [sign, k, coord]."""
    off = h * np.eye(DIM)
    return np.stack([x[..., None, :] + off, x[..., None, :] - off], axis=-3)


def fd_partials(fn: Callable, x: np.ndarray, h: float) -> np.ndarray:
    """Central-difference partials; result[..., k, *out] = ∂_k fn."""
    x = np.asarray(x, dtype=np.float64)
    vals = fn(_stencil(x, h))
    lead = x.ndim - 1
    plus = vals[(slice(None),) * lead + (0,)]
    minus = vals[(slice(None),) * lead + (1,)]
    return (plus - minus) / (2.0 * h)


def fd_second_partials(fn: Callable, x: np.ndarray, h: float) -> np.ndarray:
    """result[..., k, l, *out] = ∂_k ∂_l fn from the four-point mixed stencil."""
    x = np.asarray(x, dtype=np.float64)
    off = h * np.eye(DIM)
    pts = []
    for sk in (1.0, -1.0):
        for sl in (1.0, -1.0):
            pts.append(x[..., None, None, :] + sk * off[:, None, :] + sl * off[None, :, :])
    vals = fn(np.stack(pts, axis=-4))
    lead = x.ndim - 1
    pick = lambda i: vals[(slice(None),) * lead + (i,)]
    return (pick(0) - pick(1) - pick(2) + pick(3)) / (4.0 * h * h)


# ---------------------------------------------------------------- charts

@dataclass(frozen=True)
class Chart:
    """Coordinate patch: vectorized metric, domain predicate, optional analytic partials.

    ``metric_d1(x)[..., k, a, b]`` = ∂_k g_ab and ``metric_d2(x)[..., k, l, a, b]``
    = ∂_k ∂_l g_ab.  Missing partials fall back to central differences with
    step ``h`` (first order) or ``h2`` (second order and nested stencils).
    """

    metric_fn: Callable[[np.ndarray], np.ndarray]
    domain_fn: Callable[[np.ndarray], np.ndarray]
    metric_d1: Callable[[np.ndarray], np.ndarray] | None = None
    metric_d2: Callable[[np.ndarray], np.ndarray] | None = None
    h: float = 1e-5
    h2: float = 1e-4
    name: str = "chart"
    params: dict = field(default_factory=dict)
    dim: int = DIM

    def __post_init__(self):
        if self.h <= 0 or self.h2 <= 0:
            raise ValueError("finite-difference steps must be positive")

    def check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != DIM:
            raise ValueError(f"points must have {DIM} coordinates")
        ok = np.asarray(self.domain_fn(x), dtype=bool)
        if not np.all(ok):
            bad = x.reshape(-1, DIM)[np.argmin(ok.reshape(-1))]
            raise DomainError(f"point {bad.tolist()} outside chart '{self.name}'")
        return x

    def metric(self, x) -> np.ndarray:
        x = self.check(x)
        return self.metric_fn(x)

    def metric_inverse(self, x) -> np.ndarray:
        g = self.metric(x)
        det = np.linalg.det(g)
        if np.any(np.abs(det) <= 1e-12):
            raise SingularMetricError("metric determinant vanishes")
        gi = np.linalg.inv(g)
        return 0.5 * (gi + np.swapaxes(gi, -1, -2))

    def metric_partials(self, x) -> np.ndarray:
        x = self.check(x)
        if self.metric_d1 is not None:
            return self.metric_d1(x)
        return fd_partials(self.metric, x, self.h)

    def metric_second_partials(self, x) -> np.ndarray:
        x = self.check(x)
        if self.metric_d2 is not None:
            return self.metric_d2(x)
        if self.metric_d1 is not None:
            return fd_partials(self.metric_partials, x, self.h)
        return fd_second_partials(self.metric, x, self.h2)

    def christoffel(self, x) -> np.ndarray:
        """Γ^r_{mv} with shape (..., 4, 4, 4)."""
        x = np.asarray(x, dtype=np.float64)
        lead = x.shape[:-1]
        gi = self.metric_inverse(x).reshape(-1, DIM, DIM)
        dg = self.metric_partials(x).reshape(-1, DIM, DIM, DIM)
        return kernels.christoffel(gi, dg).reshape(lead + (DIM,) * 3)

    def christoffel_partials(self, x) -> np.ndarray:
        """∂_k Γ^r_{mv} as (..., k, r, m, v)."""
        x = np.asarray(x, dtype=np.float64)
        gi = self.metric_inverse(x)
        dg = self.metric_partials(x)
        ddg = self.metric_second_partials(x)
        dgi = -np.einsum("...ra,...kab,...bs->...krs", gi, dg, gi)
        low = np.swapaxes(dg, -3, -2) + np.moveaxis(dg, -3, -1) - dg
        dlow = (
            np.swapaxes(ddg, -3, -2)
            + np.moveaxis(ddg, -3, -1)
            - ddg
        )
        # low[..., s, m, v] = ∂_m g_sv + ∂_v g_sm − ∂_s g_mv; dlow adds a leading k
        return 0.5 * (
            np.einsum("...krs,...smv->...krmv", dgi, low)
            + np.einsum("...rs,...ksmv->...krmv", gi, dlow)
        )

    def without_analytic(self) -> "Chart":
        return replace(self, metric_d1=None, metric_d2=None)


@dataclass(frozen=True)
class GeometryAtPoint:
    point: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    sqrt_neg_det: float
    christoffel: np.ndarray
    riemann: np.ndarray | None
    ricci: np.ndarray | None
    scalar: float | None

    def ricci_mixed(self) -> np.ndarray:
        """R^μ_ν = g^{μκ} R_{κν}."""
        return self.g_inv @ self.ricci

    def einstein_mixed(self) -> np.ndarray:
        """G^μ_ν = R^μ_ν − ½ δ^μ_ν R."""
        return self.ricci_mixed() - 0.5 * self.scalar * np.eye(DIM)


def riemann_from(gamma: np.ndarray, dgamma: np.ndarray) -> np.ndarray:
    """R^r_{smv} from Γ (..., r, m, v) and ∂Γ (..., k, r, m, v)."""
    term = np.einsum("...mrvs->...rsmv", dgamma) - np.einsum("...vrms->...rsmv", dgamma)
    quad = np.einsum("...rml,...lvs->...rsmv", gamma, gamma)
    return term + quad - np.swapaxes(quad, -1, -2)


def curvature_batch(chart: Chart, x) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(riemann, ricci, scalar) at points of shape (..., 4)."""
    gamma = chart.christoffel(x)
    riem = riemann_from(gamma, chart.christoffel_partials(x))
    ricci = np.einsum("...mnsm->...ns", riem)
    scal = np.einsum("...ns,...ns->...", chart.metric_inverse(x), ricci)
    return riem, ricci, scal


def geometry_at(chart: Chart, x, curvature: bool = True) -> GeometryAtPoint:
    x = chart.check(np.asarray(x, dtype=np.float64).reshape(DIM))
    g = chart.metric(x)
    det = np.linalg.det(g)
    if abs(det) <= 1e-12:
        raise SingularMetricError(f"singular metric at {x.tolist()}")
    riem = ricci = scal = None
    if curvature:
        riem, ricci, scal = curvature_batch(chart, x)
        scal = float(scal)
    return GeometryAtPoint(
        point=x,
        g=g,
        g_inv=chart.metric_inverse(x),
        sqrt_neg_det=float(np.sqrt(abs(det))),
        christoffel=chart.christoffel(x),
        riemann=riem,
        ricci=ricci,
        scalar=scal,
    )


def signature_at(chart: Chart, x) -> Signature:
    """Clifford signature of the coordinate cobasis dx^μ at x (bilinear form g^{μν})."""
    return Signature(chart.metric_inverse(np.asarray(x, dtype=np.float64).reshape(DIM)))


# ---------------------------------------------------------------- fields

@dataclass(frozen=True)
class FormField:
    """Form field by its blade-coefficient function (..., 4) -> (..., 16)."""

    chart: Chart
    grade: int | None
    fn: Callable[[np.ndarray], np.ndarray]

    def coeffs(self, x) -> np.ndarray:
        x = self.chart.check(x)
        return np.asarray(self.fn(x), dtype=np.float64)

    def at(self, x) -> Multivector:
        x = np.asarray(x, dtype=np.float64).reshape(DIM)
        return Multivector(signature_at(self.chart, x), self.coeffs(x))

    @classmethod
    def from_components(cls, chart: Chart, grade: int, comp_fn: Callable) -> "FormField":
        """Build from a function returning grade-k coefficients in ascending mask order."""
        masks = [m for m in range(NBLADES) if bin(m).count("1") == grade]

        def fn(x):
            vals = np.asarray(comp_fn(x), dtype=np.float64)
            out = np.zeros(vals.shape[:-1] + (NBLADES,))
            out[..., masks] = vals
            return out

        return cls(chart, grade, fn)

    @classmethod
    def one_form(cls, chart: Chart, comp_fn: Callable) -> "FormField":
        """A_μ dx^μ from comp_fn(x) -> (..., 4)."""
        return cls.from_components(chart, 1, comp_fn)

    @classmethod
    def scalar(cls, chart: Chart, fn: Callable) -> "FormField":
        return cls.from_components(chart, 0, lambda x: np.asarray(fn(x))[..., None])

    @classmethod
    def zero(cls, chart: Chart, grade: int) -> "FormField":
        return cls(chart, grade, lambda x: np.zeros(np.shape(x)[:-1] + (NBLADES,)))

    def __add__(self, other: "FormField") -> "FormField":
        grade = self.grade if self.grade == other.grade else None
        return FormField(self.chart, grade, lambda x: self.fn(x) + other.fn(x))

    def scaled(self, c: float) -> "FormField":
        return FormField(self.chart, self.grade, lambda x: c * self.fn(x))


@dataclass(frozen=True)
class VectorField:
    chart: Chart
    fn: Callable[[np.ndarray], np.ndarray]

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(x, dtype=np.float64)), dtype=np.float64)

    def lowered(self) -> FormField:
        """A = g(V, ·)."""
        return FormField.one_form(
            self.chart, lambda x: np.einsum("...ab,...b->...a", self.chart.metric(x), self.fn(x))
        )

    @classmethod
    def zero(cls, chart: Chart) -> "VectorField":
        return cls(chart, lambda x: np.zeros(np.shape(x)))


@dataclass(frozen=True)
class MixedTensorField:
    """W^α_β via fn(x) -> (..., 4, 4) indexed [α, β]."""

    chart: Chart
    fn: Callable[[np.ndarray], np.ndarray]
    symmetric: bool = False

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(x, dtype=np.float64)), dtype=np.float64)

    def raised(self, x) -> np.ndarray:
        """W^{αβ} = W^α_λ g^{λβ}."""
        return np.einsum("...al,...lb->...ab", self(x), self.chart.metric_inverse(x))

    def symmetry_defect(self, x) -> float:
        up = self.raised(x)
        return float(np.max(np.abs(up - np.swapaxes(up, -1, -2))))

    def trace(self, x) -> np.ndarray:
        return np.einsum("...aa->...", self(x))

    @classmethod
    def zero(cls, chart: Chart) -> "MixedTensorField":
        return cls(chart, lambda x: np.zeros(np.shape(x)[:-1] + (DIM, DIM)), True)


def einstein_tensor_field(chart: Chart) -> MixedTensorField:
    """G^α_β from chart curvature."""

    def fn(x):
        _, ricci, scal = curvature_batch(chart, x)
        mixed = np.einsum("...ak,...kb->...ab", chart.metric_inverse(x), ricci)
        return mixed - 0.5 * scal[..., None, None] * np.eye(DIM)

    return MixedTensorField(chart, fn, symmetric=True)


# ---------------------------------------------------------------- operators (batched)

def _to_mv(chart: Chart, x: np.ndarray, c: np.ndarray) -> Multivector:
    return Multivector(signature_at(chart, x), c)


def d_coeffs(f: FormField, x, h: float | None = None) -> np.ndarray:
    h = f.chart.h if h is None else h
    return exterior_from_partials(fd_partials(f.coeffs, np.asarray(x, dtype=np.float64), h))


def star_coeffs(chart: Chart, x, c: np.ndarray) -> np.ndarray:
    return hodge_star_components(c, chart.metric_inverse(x))


def star_inverse_coeffs(chart: Chart, x, c: np.ndarray) -> np.ndarray:
    return hodge_star_inverse_components(c, chart.metric_inverse(x))


def delta_coeffs(f: FormField, x, h: float | None = None) -> np.ndarray:
    """δA = Σ_p (−1)^p ⋆⁻¹ d ⋆ A_p with both stars taken pointwise."""
    chart = f.chart
    h = chart.h if h is None else h
    sign = grade_sign()

    def starred(y):
        return star_coeffs(chart, y, f.coeffs(y) * sign)

    x = np.asarray(x, dtype=np.float64)
    return star_inverse_coeffs(chart, x, exterior_from_partials(fd_partials(starred, x, h)))


def covariant_partials(f: FormField, x, h: float | None = None) -> np.ndarray:
    """D_μ A as (..., μ, blade): ∂_μ A minus the connection derivation."""
    chart = f.chart
    h = chart.h if h is None else h
    x = np.asarray(x, dtype=np.float64)
    gamma = chart.christoffel(x)
    dc = fd_partials(f.coeffs, x, h)
    # D_μ dx^ν = −Γ^ν_{μρ} dx^ρ
    conn = np.moveaxis(gamma, -3, -2)  # [..., μ, ν, ρ]
    return dc - derivation(conn, f.coeffs(x)[..., None, :])


def delta_contraction_coeffs(f: FormField, x, h: float | None = None) -> np.ndarray:
    """δA = −dx^μ ⌟ D_μ A (second codifferential route)."""
    x = np.asarray(x, dtype=np.float64)
    dcov = covariant_partials(f, x, h)
    gi = f.chart.metric_inverse(x)
    return -np.einsum("...ma,abc,...mc->...b", gi, _tables()[1], dcov)


def d_field(f: FormField, h: float | None = None) -> FormField:
    """dA as a field; default step ``chart.h2`` because it is usually differentiated again."""
    h = f.chart.h2 if h is None else h
    grade = None if f.grade is None else f.grade + 1
    return FormField(f.chart, grade, lambda y: d_coeffs(f, y, h))


def delta_field(f: FormField, h: float | None = None) -> FormField:
    h = f.chart.h2 if h is None else h
    grade = None if f.grade is None else f.grade - 1
    return FormField(f.chart, grade, lambda y: delta_coeffs(f, y, h))


def exterior_derivative(f: FormField, x) -> Multivector:
    if f.grade is not None and f.grade > 3:
        raise ValueError("exterior derivative needs grade <= 3")
    x = np.asarray(x, dtype=np.float64).reshape(DIM)
    return _to_mv(f.chart, x, d_coeffs(f, x))


def codifferential(f: FormField, x) -> Multivector:
    if f.grade is not None and f.grade < 1:
        raise ValueError("codifferential needs grade >= 1")
    x = np.asarray(x, dtype=np.float64).reshape(DIM)
    return _to_mv(f.chart, x, delta_coeffs(f, x))


def codifferential_contraction(f: FormField, x) -> Multivector:
    x = np.asarray(x, dtype=np.float64).reshape(DIM)
    return _to_mv(f.chart, x, delta_contraction_coeffs(f, x))


@dataclass(frozen=True)
class DiracResult:
    total: Multivector
    d_part: Multivector
    delta_part: Multivector


def dirac_apply(f: FormField, x) -> DiracResult:
    """∂f = df − δf, returned with both pieces."""
    x = np.asarray(x, dtype=np.float64).reshape(DIM)
    dpart = d_coeffs(f, x)
    delta = delta_coeffs(f, x) if f.grade != 0 else np.zeros(NBLADES)
    sig = signature_at(f.chart, x)
    return DiracResult(
        Multivector(sig, dpart - delta), Multivector(sig, dpart), Multivector(sig, delta)
    )


def dirac_squared_coeffs(f: FormField, x) -> np.ndarray:
    """∂²f = −(dδ + δd) f with nested differences (step ``chart.h2``)."""
    h = f.chart.h2
    x = np.asarray(x, dtype=np.float64)
    return -(d_coeffs(delta_field(f, h), x, h) + delta_coeffs(d_field(f, h), x, h))


def lie_derivative(xi: VectorField, f: FormField, x) -> Multivector:
    """Cartan: £_ξ f = ξ⌟df + d(ξ⌟f)."""
    chart = f.chart
    x = np.asarray(x, dtype=np.float64).reshape(DIM)
    first = interior(xi(x), d_coeffs(f, x))
    contracted = FormField(chart, None, lambda y: interior(xi(y), f.coeffs(y)))
    return _to_mv(chart, x, first + d_coeffs(contracted, x))


def covariant_lowered_vector(xi: VectorField, chart: Chart, x, h: float | None = None) -> np.ndarray:
    """D_μ ξ_ν as (..., μ, ν)."""
    h = chart.h if h is None else h
    x = np.asarray(x, dtype=np.float64)
    low = lambda y: np.einsum("...ab,...b->...a", chart.metric(y), xi(y))
    return fd_partials(low, x, h) - np.einsum("...rmn,...r->...mn", chart.christoffel(x), low(x))


def lie_derivative_metric(xi: VectorField, chart: Chart, x) -> np.ndarray:
    """(£_ξ g)_{μν} = D_μ ξ_ν + D_ν ξ_μ."""
    dxi = covariant_lowered_vector(xi, chart, x)
    return dxi + np.swapaxes(dxi, -1, -2)


def killing_residual(xi: VectorField, chart: Chart, x) -> float:
    return float(np.max(np.abs(lie_derivative_metric(xi, chart, x))))


def divergence_mixed_coeffs(W: MixedTensorField, chart: Chart, x, h: float | None = None) -> np.ndarray:
    """(D_α W^α_β) as (..., β)."""
    h = chart.h if h is None else h
    x = np.asarray(x, dtype=np.float64)
    dW = fd_partials(W, x, h)  # [..., k, α, β]
    gamma = chart.christoffel(x)
    w = W(x)
    return (
        np.einsum("...aab->...b", dW)
        + np.einsum("...aai,...ib->...b", gamma, w)
        - np.einsum("...iab,...ai->...b", gamma, w)
    )


def _one_form_mv(chart: Chart, x, comps: np.ndarray) -> Multivector:
    c = np.zeros(NBLADES)
    c[[1, 2, 4, 8]] = comps
    return _to_mv(chart, x, c)


def divergence_mixed(W: MixedTensorField, chart: Chart, x) -> Multivector:
    x = np.asarray(x, dtype=np.float64).reshape(DIM)
    return _one_form_mv(chart, x, divergence_mixed_coeffs(W, chart, x))


def current_components(V: VectorField, W: MixedTensorField, x) -> np.ndarray:
    """𝒥_β = V^α g_{αλ} W^λ_β."""
    g = W.chart.metric(x)
    return np.einsum("...a,...al,...lb->...b", V(x), g, W(x))


def current_field(V: VectorField, W: MixedTensorField) -> FormField:
    return FormField.one_form(W.chart, lambda y: current_components(V, W, y))


def current_from_tensor(V: VectorField, W: MixedTensorField, x) -> Multivector:
    x = np.asarray(x, dtype=np.float64).reshape(DIM)
    return _one_form_mv(W.chart, x, current_components(V, W, x))


@dataclass(frozen=True)
class RelationTerms:
    lhs: float
    rhs: float
    residual: float
    conformal_residual: float | None = None


def divergence_relation_terms(V: VectorField, W: MixedTensorField, x, lam: float | None = None) -> RelationTerms:
    """Both sides of (£_V g)_{αβ}W^{αβ} = 2 d⋆𝒥_V − 2⋆[(D•W)(V)] as τ_g coefficients."""
    chart = W.chart
    x = np.asarray(x, dtype=np.float64).reshape(DIM)
    lhs = float(np.einsum("ab,ab->", lie_derivative_metric(V, chart, x), W.raised(x)))
    J = current_field(V, W)
    star_j = FormField(chart, 3, lambda y: star_coeffs(chart, y, J.coeffs(y)))
    vol = np.sqrt(abs(np.linalg.det(chart.metric(x))))
    d_star_j = float(d_coeffs(star_j, x)[TOP] / vol)
    dw_v = float(V(x) @ divergence_mixed_coeffs(W, chart, x))
    rhs = 2.0 * d_star_j - 2.0 * dw_v
    conf = None
    if lam is not None:
        conf = abs(lam * float(W.trace(x)) - (d_star_j - dw_v))
    return RelationTerms(lhs, rhs, abs(lhs - rhs), conf)


def divergence_relation_check(V: VectorField, W: MixedTensorField, x, lam: float | None = None) -> float:
    if not W.symmetric:
        raise ValueError("the relation needs a symmetric tensor (symmetric flag unset)")
    t = divergence_relation_terms(V, W, x, lam)
    return t.residual if t.conformal_residual is None else max(t.residual, t.conformal_residual)


def ricci_operator_apply(chart: Chart, mu: int, x, keep_all_grades: bool = False) -> Multivector:
    """∂∧∂ dx^μ = ½ dx^α∧dx^β ([D_α, D_β] − (Γ^ρ_{αβ} − Γ^ρ_{βα}) D_ρ) dx^μ.

    The commutator acts on the Clifford field dx^μ with D_β dx^μ = −Γ^μ_{βε}dx^ε,
    and the bivector multiplies by the Clifford product.  Only the grade-1
    part survives for a torsion-free connection; it is returned unless
    ``keep_all_grades``.
    """
    x = np.asarray(x, dtype=np.float64).reshape(DIM)
    gamma = chart.christoffel(x)
    dgamma = chart.christoffel_partials(x)
    # D_α D_β dx^μ = (−∂_αΓ^μ_{βλ} + Γ^μ_{βε}Γ^ε_{αλ}) dx^λ
    dd = -dgamma[:, mu, :, :] + np.einsum("be,eal->abl", gamma[mu], gamma)
    comm = dd - np.swapaxes(dd, 0, 1)
    # D_ρ dx^μ = −Γ^μ_{ρλ} dx^λ; torsion term (zero for Levi-Civita, kept literal)
    tors = gamma - np.swapaxes(gamma, 1, 2)
    comm = comm - np.einsum("rab,rl->abl", tors, -gamma[mu])
    sig = signature_at(chart, x)
    basis = [Multivector.basis_vector(sig, i) for i in range(DIM)]
    total = np.zeros(NBLADES)
    for a in range(DIM):
        for b in range(DIM):
            if a == b:
                continue
            biv = outer_product(basis[a], basis[b])
            c = np.zeros(NBLADES)
            c[[1, 2, 4, 8]] = comm[a, b]
            total += 0.5 * (biv * Multivector(sig, c)).coeffs
    out = Multivector(sig, total)
    return out if keep_all_grades else out.grade(1)


def dalembertian_coeffs(f: FormField, x) -> np.ndarray:
    """∂·∂ f = g^{αβ}(D_α D_β − Γ^ρ_{αβ} D_ρ) f with D acting on Clifford fields."""
    chart = f.chart
    x = np.asarray(x, dtype=np.float64)
    gamma = chart.christoffel(x)
    dgamma = chart.christoffel_partials(x)
    gi = chart.metric_inverse(x)
    c = f.coeffs(x)
    dc = fd_partials(f.coeffs, x, chart.h)
    ddc = fd_second_partials(f.coeffs, x, chart.h2)
    conn = np.moveaxis(gamma, -3, -2)  # Γ_β as [β, ν, ρ]
    dconn = np.moveaxis(dgamma, -3, -2)  # [α, β, ν, ρ]
    # D_β f = ∂_β f − Der(Γ_β) f
    Df = dc - derivation(conn, c[..., None, :])
    # D_α(D_β f) = ∂_α∂_β f − Der(∂_αΓ_β) f − Der(Γ_β) ∂_α f − Der(Γ_α)(D_β f)
    term = (
        ddc
        - derivation(dconn, c[..., None, None, :])
        - derivation(conn[..., None, :, :, :], dc[..., :, None, :])
        - derivation(conn[..., :, None, :, :], Df[..., None, :, :])
    )
    lap = np.einsum("...ab,...abc->...c", gi, term)
    return lap - np.einsum("...ab,...rab,...rc->...c", gi, gamma, Df)


def dalembertian_apply(f: FormField, x) -> Multivector:
    x = np.asarray(x, dtype=np.float64).reshape(DIM)
    return _to_mv(f.chart, x, dalembertian_coeffs(f, x))


def ricci_operator_coeffs(chart: Chart, x, c: np.ndarray) -> np.ndarray:
    """Linear extension of ∂∧∂ to a 1-form with coefficients c: A_μ R^μ_ν dx^ν."""
    x = np.asarray(x, dtype=np.float64).reshape(DIM)
    out = np.zeros(NBLADES)
    for mu in range(DIM):
        out += c[1 << mu] * ricci_operator_apply(chart, mu, x).coeffs
    return out


def relative_covderiv(fn: Callable, chart: Chart, x, weight: int = 0, n_upper: int = 0,
                      n_lower: int = 0, kappa: int | None = None) -> np.ndarray:
    """Covariant derivative of a relative tensor of integer weight.

    ``fn(x)`` returns components with ``n_upper`` leading upper indices then
    ``n_lower`` lower indices.  Result has the derivative index first:
    D_κ A = ∂_κ A + Σ Γ^α_{κσ} A^{..σ..} − Σ Γ^σ_{κβ} A_{..σ..} − w Γ^σ_{κσ} A.
    """
    x = np.asarray(x, dtype=np.float64).reshape(DIM)
    a = np.asarray(fn(x), dtype=np.float64)
    out = fd_partials(fn, x, chart.h)
    gamma = chart.christoffel(x)
    rank = n_upper + n_lower
    for slot in range(rank):
        moved = np.moveaxis(a, slot, 0)  # slot index first
        if slot < n_upper:
            contrib = np.einsum("aks,s...->ka...", gamma, moved)
        else:
            contrib = -np.einsum("skb,s...->kb...", gamma, moved)
        out = out + np.moveaxis(contrib, 1, slot + 1)
    trace = np.einsum("sks->k", gamma)
    out = out - weight * trace.reshape((DIM,) + (1,) * rank) * a
    return out if kappa is None else out[kappa]


# ---------------------------------------------------------------- built-in charts

ETA = np.diag([1.0, -1.0, -1.0, -1.0])


def minkowski_chart(h: float = 1e-5) -> Chart:
    zero3 = lambda x: np.zeros(np.shape(x)[:-1] + (DIM,) * 3)
    zero4 = lambda x: np.zeros(np.shape(x)[:-1] + (DIM,) * 4)
    return Chart(
        metric_fn=lambda x: np.broadcast_to(ETA, np.shape(x)[:-1] + (DIM, DIM)).copy(),
        domain_fn=lambda x: np.ones(np.shape(x)[:-1], dtype=bool),
        metric_d1=zero3,
        metric_d2=zero4,
        h=h,
        name="minkowski",
    )


def schwarzschild_chart(m: float = 1.0, h: float = 1e-5) -> Chart:
    """Coordinates (t, r, θ, φ), signature (+,−,−,−), exterior region r > 2m."""
    if m <= 0:
        raise ValueError("mass must be positive")

    def metric(x):
        r, th = x[..., 1], x[..., 2]
        f = 1.0 - 2.0 * m / r
        g = np.zeros(np.shape(x)[:-1] + (DIM, DIM))
        g[..., 0, 0] = f
        g[..., 1, 1] = -1.0 / f
        g[..., 2, 2] = -r * r
        g[..., 3, 3] = -(r * np.sin(th)) ** 2
        return g

    def d1(x):
        r, th = x[..., 1], x[..., 2]
        f = 1.0 - 2.0 * m / r
        fp = 2.0 * m / r**2
        s, c = np.sin(th), np.cos(th)
        out = np.zeros(np.shape(x)[:-1] + (DIM,) * 3)
        out[..., 1, 0, 0] = fp
        out[..., 1, 1, 1] = fp / f**2
        out[..., 1, 2, 2] = -2.0 * r
        out[..., 1, 3, 3] = -2.0 * r * s * s
        out[..., 2, 3, 3] = -2.0 * r * r * s * c
        return out

    def d2(x):
        r, th = x[..., 1], x[..., 2]
        f = 1.0 - 2.0 * m / r
        fp = 2.0 * m / r**2
        fpp = -4.0 * m / r**3
        s, c = np.sin(th), np.cos(th)
        out = np.zeros(np.shape(x)[:-1] + (DIM,) * 4)
        out[..., 1, 1, 0, 0] = fpp
        out[..., 1, 1, 1, 1] = fpp / f**2 - 2.0 * fp**2 / f**3
        out[..., 1, 1, 2, 2] = -2.0
        out[..., 1, 1, 3, 3] = -2.0 * s * s
        out[..., 1, 2, 3, 3] = out[..., 2, 1, 3, 3] = -4.0 * r * s * c
        out[..., 2, 2, 3, 3] = -2.0 * r * r * (c * c - s * s)
        return out

    def domain(x):
        r, th = x[..., 1], x[..., 2]
        return (r > 2.0 * m) & (th > 0.0) & (th < np.pi)

    return Chart(metric, domain, d1, d2, h=h, name="schwarzschild", params={"m": m})


def make_chart(name: str, **params) -> Chart:
    """Registry of built-in charts: minkowski, desitter-conformal, schwarzschild."""
    if name == "minkowski":
        return minkowski_chart()
    if name == "schwarzschild":
        return schwarzschild_chart(m=params.get("m", 1.0))
    if name == "desitter-conformal":
        from .desitter import desitter_chart

        return desitter_chart(ell=params.get("ell", 1.0), interior=params.get("interior", False))
    raise KeyError(f"unknown chart '{name}'")


CHART_NAMES = ("minkowski", "desitter-conformal", "schwarzschild")
