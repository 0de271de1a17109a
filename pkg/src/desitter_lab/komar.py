"""Komar currents, the Maxwell-like equation and energy quadratures.

Conventions: Einstein's equation is G^α_β = −T^α_β, the current is
J_A = −δdA, and ∮_{∂V} ⋆F = ∫_V d⋆F = −∫_V ⋆J_A.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .charts import (
    DIM,
    NBLADES,
    Chart,
    FormField,
    MixedTensorField,
    VectorField,
    current_field,
    curvature_batch,
    d_coeffs,
    d_field,
    dalembertian_coeffs,
    delta_coeffs,
    delta_field,
    divergence_mixed_coeffs,
    einstein_tensor_field,
    killing_residual,
    ricci_operator_coeffs,
    star_coeffs,
)
from .clifford import Multivector

ONE_FORM = np.array([1, 2, 4, 8])
KILLING_TOL = 1e-8
IDENTITY_TOL = 1e-5
CHUNK = 2048


class KomarError(ValueError):
    pass


class NonKillingError(KomarError):
    def __init__(self, residual: float):
        super().__init__(f"generator is not Killing (residual {residual:.3e})")
        self.residual = residual


class QuadratureError(KomarError):
    pass


@dataclass(frozen=True)
class SpacetimeModel:
    chart: Chart
    T: MixedTensorField
    A_gen: VectorField

    @property
    def A(self) -> FormField:
        return self.A_gen.lowered()

    def conservation_residual(self, points) -> float:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return float(np.max(np.abs(divergence_mixed_coeffs(self.T, self.chart, pts))))

    def symmetry_residual(self, points) -> float:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return self.T.symmetry_defect(pts)


def einstein_matter(chart: Chart) -> MixedTensorField:
    """T = −G from chart curvature."""
    g = einstein_tensor_field(chart)
    return MixedTensorField(chart, lambda x: -g(x), symmetric=True)


def constant_vector(chart: Chart, comps) -> VectorField:
    v = np.asarray(comps, dtype=np.float64)
    return VectorField(chart, lambda x: np.broadcast_to(v, np.shape(x)).copy())


def _chunked(fn: Callable, pts: np.ndarray, size: int = CHUNK) -> np.ndarray:
    return np.concatenate([fn(pts[i:i + size]) for i in range(0, len(pts), size)], axis=0)


def _one_form(comps: np.ndarray) -> np.ndarray:
    out = np.zeros(comps.shape[:-1] + (NBLADES,))
    out[..., ONE_FORM] = comps
    return out


def matter_terms(model: SpacetimeModel, x) -> np.ndarray:
    """−T(A) + ½ tr T A as blade coefficients, with T(A) = A_α T^α_β dx^β."""
    a = model.A.coeffs(x)[..., ONE_FORM]
    t = model.T(x)
    comps = -np.einsum("...a,...ab->...b", a, t) + 0.5 * model.T.trace(x)[..., None] * a
    return _one_form(comps)


def d_delta_coeffs(f: FormField, x) -> np.ndarray:
    h = f.chart.h2
    return d_coeffs(delta_field(f, h), x, h)


def komar_current_coeffs(model: SpacetimeModel, x) -> np.ndarray:
    """J_A = −T(A) + ½(tr T)A + dδA + ∂·∂A (batched)."""
    A = model.A
    return matter_terms(model, x) + d_delta_coeffs(A, x) + dalembertian_coeffs(A, x)


def komar_current_from_f(model: SpacetimeModel, x) -> np.ndarray:
    """J_A = −δF with F = dA (batched)."""
    h = model.chart.h2
    return -delta_coeffs(d_field(model.A, h), x, h)


@dataclass(frozen=True)
class KomarCurrent:
    assembled: Multivector
    from_f: Multivector

    @property
    def gap(self) -> float:
        return (self.assembled - self.from_f).norm_inf()


def komar_current(model: SpacetimeModel, x) -> KomarCurrent:
    x = model.chart.check(np.asarray(x, dtype=np.float64).reshape(DIM))
    sig = model.A.at(x).signature
    return KomarCurrent(
        Multivector(sig, komar_current_coeffs(model, x)), Multivector(sig, komar_current_from_f(model, x))
    )


@dataclass(frozen=True)
class MaxwellResidual:
    full: float  # |dF − δF − J_A|
    closedness: float  # |dF|


def maxwell_residual(model: SpacetimeModel, x) -> MaxwellResidual:
    x = model.chart.check(np.asarray(x, dtype=np.float64))
    h = model.chart.h2
    F = d_field(model.A, h)
    dF = d_coeffs(F, x, h)
    dirac = dF - delta_coeffs(F, x, h)
    J = komar_current_coeffs(model, x)
    return MaxwellResidual(float(np.max(np.abs(dirac - J))), float(np.max(np.abs(dF))))


@dataclass(frozen=True)
class KillingKomar:
    form: Multivector  # T(A) − ½ A tr T
    killing_residual: float
    codifferential: float  # |δA|
    wave_identity: float  # |∂·∂A + T(A) − ½(tr T)A|


def killing_komar_form(model: SpacetimeModel, x, tol: float = IDENTITY_TOL) -> KillingKomar:
    x = model.chart.check(np.asarray(x, dtype=np.float64).reshape(DIM))
    kres = killing_residual(model.A_gen, model.chart, x)
    if kres > KILLING_TOL:
        raise NonKillingError(kres)
    A = model.A
    mt = matter_terms(model, x)
    delta = float(np.max(np.abs(delta_coeffs(A, x))))
    wave = float(np.max(np.abs(dalembertian_coeffs(A, x) - mt)))
    if delta > tol or wave > tol:
        raise KomarError(f"Killing identities fail: |δA| = {delta:.3e}, wave = {wave:.3e}")
    return KillingKomar(Multivector(A.at(x).signature, -mt), kres, delta, wave)


def current_identity_residual(chart: Chart, A_gen: VectorField, x) -> float:
    """|−G(A) + L − δdA| with L = −dδA − ½RA − ∂·∂A."""
    x = chart.check(np.asarray(x, dtype=np.float64).reshape(DIM))
    A = A_gen.lowered()
    a = A.coeffs(x)[ONE_FORM]
    G = einstein_tensor_field(chart)(x)
    _, _, scal = curvature_batch(chart, x)
    big_l = -d_delta_coeffs(A, x) - 0.5 * float(scal) * A.coeffs(x) - dalembertian_coeffs(A, x)
    h = chart.h2
    ddA = delta_coeffs(d_field(A, h), x, h)
    return float(np.max(np.abs(-_one_form(a @ G) + big_l - ddA)))


def weitzenbock_residual(A: FormField, x) -> float:
    """|−(dδ + δd)A − ∂·∂A − ∂∧∂A| for a 1-form."""
    chart = A.chart
    x = chart.check(np.asarray(x, dtype=np.float64).reshape(DIM))
    h = chart.h2
    lhs = -(d_delta_coeffs(A, x) + delta_coeffs(d_field(A, h), x, h))
    rhs = dalembertian_coeffs(A, x) + ricci_operator_coeffs(chart, x, A.coeffs(x))
    return float(np.max(np.abs(lhs - rhs)))


# ---------------------------------------------------------------- quadrature

@dataclass(frozen=True)
class QuadratureSpec:
    """Sphere r = R at fixed t, or the coordinate box ``bounds`` in a t = const slice."""

    surface: str = "sphere"
    radius: float = 10.0
    t: float = 0.0
    n_theta: int = 64
    n_phi: int = 64
    bounds: tuple = ((-0.2, 0.2), (-0.2, 0.2), (-0.2, 0.2))
    n: int = 32

    def __post_init__(self):
        if self.surface not in ("sphere", "box"):
            raise ValueError("surface must be 'sphere' or 'box'")
        if min(self.n_theta, self.n_phi, self.n) < 8:
            raise ValueError("grids need at least 8 points per dimension")

    def refined(self, factor: float) -> "QuadratureSpec":
        scale = lambda k: int(round(k * factor))
        return QuadratureSpec(self.surface, self.radius, self.t, scale(self.n_theta), scale(self.n_phi),
                              self.bounds, scale(self.n))


def midpoint_nodes(lo: float, hi: float, n: int) -> tuple[np.ndarray, float]:
    w = (hi - lo) / n
    return lo + (np.arange(n) + 0.5) * w, w


def _grid(*axes) -> np.ndarray:
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def _star_f(model: SpacetimeModel, pts: np.ndarray) -> np.ndarray:
    F = d_coeffs(model.A, pts)
    return star_coeffs(model.chart, pts, F)


def sphere_flux(model: SpacetimeModel, quad: QuadratureSpec, n_theta: int | None = None,
                n_phi: int | None = None) -> float:
    """(1/8π) ∫ (⋆F)_{θφ} dθ dφ on the sphere; (θ, φ) is the outward orientation."""
    nt = n_theta or quad.n_theta
    npp = n_phi or quad.n_phi
    th, wt = midpoint_nodes(0.0, np.pi, nt)
    ph, wp = midpoint_nodes(0.0, 2.0 * np.pi, npp)
    g = _grid(np.array([quad.t]), np.array([quad.radius]), th, ph).reshape(-1, DIM)
    vals = _chunked(lambda p: _star_f(model, p)[:, 4 | 8], g)
    return float(np.sum(vals) * wt * wp / (8.0 * np.pi))


# blade masks: t=1, x=2, y=4, z=8
_FACES = ((1, 4 | 8, +1.0), (2, 2 | 8, -1.0), (3, 2 | 4, +1.0))


def box_flux(model: SpacetimeModel, quad: QuadratureSpec, n: int | None = None) -> float:
    """(1/8π) ∮ ⋆F over the boundary of the box, outward orientation."""
    n = n or quad.n
    total = 0.0
    for axis, mask, sign in _FACES:
        others = [k for k in (1, 2, 3) if k != axis]
        (a0, a1), (b0, b1) = quad.bounds[others[0] - 1], quad.bounds[others[1] - 1]
        u, wu = midpoint_nodes(a0, a1, n)
        v, wv = midpoint_nodes(b0, b1, n)
        for end, orient in ((1, 1.0), (0, -1.0)):
            coords = [None] * 4
            coords[0] = np.array([quad.t])
            coords[axis] = np.array([quad.bounds[axis - 1][end]])
            coords[others[0]], coords[others[1]] = u, v
            pts = _grid(*coords).reshape(-1, DIM)
            vals = _chunked(lambda p: _star_f(model, p)[:, mask], pts)
            total += sign * orient * float(np.sum(vals)) * wu * wv
    return total / (8.0 * np.pi)


def _box_points(quad: QuadratureSpec, n: int) -> tuple[np.ndarray, float]:
    axes, w = [], 1.0
    for lo, hi in quad.bounds:
        nodes, wk = midpoint_nodes(lo, hi, n)
        axes.append(nodes)
        w *= wk
    return _grid(np.array([quad.t]), *axes).reshape(-1, DIM), w


def volume_integral(chart: Chart, integrand: Callable, quad: QuadratureSpec, n: int | None = None) -> float:
    """(1/8π) ∫ (⋆ω)_{xyz} over the box for a 1-form integrand(points) -> (N, 16)."""
    pts, w = _box_points(quad, n or quad.n)
    vals = _chunked(lambda p: star_coeffs(chart, p, integrand(p))[:, 2 | 4 | 8], pts)
    return float(np.sum(vals)) * w / (8.0 * np.pi)


def richardson(coarse: float, fine: float, order: int = 2) -> float:
    r = 2.0**order
    return (r * fine - coarse) / (r - 1.0)


@dataclass(frozen=True)
class SurfaceEnergy:
    energy: float
    raw: float  # midpoint value on the requested grid
    refinement_error: float
    reduction_ratio: float
    orientation: str = "outward-future"
    notes: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {"energy": self.energy, "refinement_error": self.refinement_error,
                "orientation": self.orientation}


def _converged(levels: list[float], min_ratio: float = 4.0, floor: float = 1e-13) -> float:
    d1 = abs(levels[0] - levels[1])
    d2 = abs(levels[1] - levels[2])
    if d2 < floor:
        return np.inf
    return d1 / d2


def komar_surface_energy(model: SpacetimeModel, quad: QuadratureSpec, check: bool = True) -> SurfaceEnergy:
    """ℰ = (1/8π)∮ ⋆F with midpoint rule on grids n/2, n, 2n and Richardson extrapolation."""
    flux = sphere_flux if quad.surface == "sphere" else (lambda m, q: box_flux(m, q))
    levels = [flux(model, quad.refined(f)) for f in (0.5, 1.0, 2.0)]
    ratio = _converged(levels)
    if check and ratio < 4.0 - 1e-9:
        raise QuadratureError(f"refinement ratio {ratio:.3f} below 4")
    est = richardson(levels[0], levels[1])
    fine = richardson(levels[1], levels[2])
    return SurfaceEnergy(est, levels[1], abs(fine - est), ratio)


def komar_volume_energy(model: SpacetimeModel, quad: QuadratureSpec, n: int | None = None) -> float:
    """(1/8π)∫ ⋆(T(A) − ½A tr T − dδA − ∂·∂A) over the box."""
    return volume_integral(model.chart, lambda p: -komar_current_coeffs(model, p), quad, n)


def killing_volume_energy(model: SpacetimeModel, quad: QuadratureSpec, n: int | None = None) -> float:
    """(1/4π)∫ ⋆(T(A) − ½A tr T) over the box (Killing generators only)."""
    return 2.0 * volume_integral(model.chart, lambda p: -matter_terms(model, p), quad, n)


@dataclass(frozen=True)
class StokesCheck:
    surface: float
    volume: float

    @property
    def residual(self) -> float:
        return abs(self.surface - self.volume)


def stokes_check(model: SpacetimeModel, quad: QuadratureSpec) -> StokesCheck:
    if quad.surface != "box":
        raise ValueError("Stokes check uses the box surface")
    return StokesCheck(box_flux(model, quad), komar_volume_energy(model, quad))


# ---------------------------------------------------------------- conserved charges

@dataclass(frozen=True)
class ChargeBalance:
    charge_t0: float
    charge_t1: float
    lateral_flux: float

    @property
    def drift(self) -> float:
        return abs(self.charge_t1 - self.charge_t0)

    @property
    def balance_residual(self) -> float:
        return abs(self.charge_t1 - self.charge_t0 - self.lateral_flux)


def _validate_charge_inputs(W: MixedTensorField, K: VectorField, points) -> None:
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    div = float(np.max(np.abs(divergence_mixed_coeffs(W, W.chart, pts))))
    if div > 1e-6:
        raise KomarError(f"tensor is not conserved (divergence {div:.3e})")
    kres = max(killing_residual(K, W.chart, p) for p in pts)
    if kres > KILLING_TOL:
        raise NonKillingError(kres)


def _probe_points(quad: QuadratureSpec, dt: float) -> np.ndarray:
    # probe off the slice too: a field can satisfy the Killing equation on one slice only
    dt = dt or (quad.bounds[0][1] - quad.bounds[0][0])
    lo = np.array([quad.t] + [b[0] for b in quad.bounds])
    hi = np.array([quad.t + dt] + [b[1] for b in quad.bounds])
    return np.stack([lo, hi, 0.5 * (lo + hi)])


def conserved_charge(W: MixedTensorField, K: VectorField, quad: QuadratureSpec, n: int | None = None,
                     validate: bool = True) -> float:
    """ℰ(K) = (1/8π)∫_Σ ⋆𝒥_K over the box slice, 𝒥_K = K^α g_{αλ}W^λ_β dx^β."""
    if validate:
        _validate_charge_inputs(W, K, _probe_points(quad, 0.0))
    J = current_field(K, W)
    return volume_integral(W.chart, J.coeffs, quad, n)


def lateral_flux(W: MixedTensorField, K: VectorField, quad: QuadratureSpec, dt: float,
                 n: int | None = None, n_t: int | None = None) -> float:
    """(1/8π)∫ ⋆𝒥_K through the side walls of the box over [t, t + dt]."""
    n = n or quad.n
    n_t = n_t or n
    J = current_field(K, W)
    ts, wt = midpoint_nodes(quad.t, quad.t + dt, n_t)
    total = 0.0
    for axis, sign in ((1, +1.0), (2, -1.0), (3, +1.0)):
        mask = 1 | (14 ^ (1 << axis))
        others = [k for k in (1, 2, 3) if k != axis]
        (a0, a1), (b0, b1) = quad.bounds[others[0] - 1], quad.bounds[others[1] - 1]
        u, wu = midpoint_nodes(a0, a1, n)
        v, wv = midpoint_nodes(b0, b1, n)
        for end, orient in ((1, 1.0), (0, -1.0)):
            coords = [ts, None, None, None]
            coords[axis] = np.array([quad.bounds[axis - 1][end]])
            coords[others[0]], coords[others[1]] = u, v
            pts = _grid(*coords).reshape(-1, DIM)
            vals = _chunked(lambda p: star_coeffs(W.chart, p, J.coeffs(p))[:, mask], pts)
            total += sign * orient * float(np.sum(vals)) * wt * wu * wv
    return total / (8.0 * np.pi)


def charge_balance(W: MixedTensorField, K: VectorField, quad: QuadratureSpec, dt: float = 0.1,
                   n: int | None = None) -> ChargeBalance:
    """Slice-shift test: Q(t + dt) − Q(t) equals the side-wall flux (4D Stokes on box × [t, t + dt])."""
    _validate_charge_inputs(W, K, _probe_points(quad, dt))
    shifted = QuadratureSpec(quad.surface, quad.radius, quad.t + dt, quad.n_theta, quad.n_phi, quad.bounds, quad.n)
    levels = []
    for k in ((n or quad.n) // 2, n or quad.n):
        q0 = conserved_charge(W, K, quad, k, validate=False)
        q1 = conserved_charge(W, K, shifted, k, validate=False)
        lat = lateral_flux(W, K, quad, dt, k)
        levels.append((q0, q1, lat))
    (a0, a1, al), (b0, b1, bl) = levels
    return ChargeBalance(richardson(a0, b0), richardson(a1, b1), richardson(al, bl))
