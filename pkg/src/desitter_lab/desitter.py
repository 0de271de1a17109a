"""de Sitter spacetime in projective conformal coordinates.

g = Ω² η with Ω = (1 − σ²/4ℓ²)⁻¹ and σ² = η_{μν} x^μ x^ν.  The chart is the
stereographic projection of the pseudo-sphere
(X⁰)² − Σ(X^i)² − (X⁴)² = −ℓ² in ℝ^{1,4}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .charts import (
    DIM,
    ETA,
    Chart,
    FormField,
    MixedTensorField,
    VectorField,
    fd_partials,
)

ETA5 = np.diag([1.0, -1.0, -1.0, -1.0, -1.0])
BOUNDARY_GAP = 1e-9
DEGENERACY_THRESHOLD = 1e-10


class SingularChartError(ValueError):
    """Point on the Cayley–Klein absolute σ² = 4ℓ²."""


class BasisDegeneracyError(ValueError):
    """The four translational Killing fields are linearly dependent here."""


def lower(x: np.ndarray) -> np.ndarray:
    """x_μ = η_{μν} x^ν."""
    return np.asarray(x, dtype=np.float64) * np.array([1.0, -1.0, -1.0, -1.0])


def sigma2(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.einsum("...a,...a->...", x, lower(x))


def _check_ell(ell: float):
    if not ell > 0:
        raise ValueError("ℓ must be positive")


def omega(ell: float, x) -> np.ndarray:
    _check_ell(ell)
    s2 = sigma2(x)
    if np.any(np.abs(s2 - 4.0 * ell * ell) <= BOUNDARY_GAP):
        raise SingularChartError("σ² = 4ℓ²: point on the Cayley–Klein absolute")
    return 1.0 / (1.0 - s2 / (4.0 * ell * ell))


@dataclass(frozen=True)
class OmegaMetric:
    omega: np.ndarray
    g: np.ndarray
    d1: np.ndarray
    d2: np.ndarray


def _metric(ell, x):
    om = omega(ell, x)
    return (om * om)[..., None, None] * ETA


def _metric_d1(ell, x):
    om = omega(ell, x)
    xl = lower(x)
    # ∂_k Ω² = Ω³ x_k / ℓ²
    dom2 = (om**3)[..., None] * xl / (ell * ell)
    return dom2[..., :, None, None] * ETA


def _metric_d2(ell, x):
    om = omega(ell, x)
    xl = lower(x)
    l2 = ell * ell
    # ∂_l ∂_k Ω² = (3/2) Ω⁴ x_k x_l / ℓ⁴ + Ω³ η_kl / ℓ²
    dd = 1.5 * (om**4)[..., None, None] * xl[..., :, None] * xl[..., None, :] / (l2 * l2)
    dd = dd + (om**3)[..., None, None] * ETA / l2
    return dd[..., :, :, None, None] * ETA


def omega_and_metric(ell: float, x) -> OmegaMetric:
    x = np.asarray(x, dtype=np.float64)
    return OmegaMetric(omega(ell, x), _metric(ell, x), _metric_d1(ell, x), _metric_d2(ell, x))


def desitter_chart(ell: float = 1.0, interior: bool = False, h: float = 1e-5) -> Chart:
    """Conformal chart with analytic metric partials.

    The domain excludes a thin shell around σ² = 4ℓ²; with ``interior`` it is
    restricted to t² − |x⃗|² < 4ℓ².
    """
    _check_ell(ell)
    four = 4.0 * ell * ell

    def domain(x):
        s2 = sigma2(x)
        ok = np.abs(s2 - four) > BOUNDARY_GAP
        if interior:
            ok &= s2 < four
        return ok

    return Chart(
        metric_fn=lambda x: _metric(ell, x),
        domain_fn=domain,
        metric_d1=lambda x: _metric_d1(ell, x),
        metric_d2=lambda x: _metric_d2(ell, x),
        h=h,
        name="desitter-conformal",
        params={"ell": ell, "interior": interior},
    )


# ---------------------------------------------------------------- embedding

@dataclass(frozen=True)
class EmbeddingPoint:
    X: np.ndarray
    ell: float

    def constraint_residual(self) -> float:
        q = np.einsum("...a,ab,...b->...", self.X, ETA5, self.X)
        return float(np.max(np.abs(q + self.ell**2)))


def embed(ell: float, x) -> EmbeddingPoint:
    """X^μ = Ω x^μ, X⁴ = −ℓ Ω (1 + σ²/4ℓ²)."""
    x = np.asarray(x, dtype=np.float64)
    om = omega(ell, x)
    s = sigma2(x) / (4.0 * ell * ell)
    X = np.concatenate([om[..., None] * x, (-ell * om * (1.0 + s))[..., None]], axis=-1)
    return EmbeddingPoint(X, ell)


def embed_jacobian(ell: float, x) -> np.ndarray:
    """∂X^K/∂x^α as (..., K, α), K = 0..4."""
    x = np.asarray(x, dtype=np.float64)
    om = omega(ell, x)
    xl = lower(x)
    jac = np.zeros(x.shape[:-1] + (5, DIM))
    jac[..., :4, :] = om[..., None, None] * np.eye(DIM) + (
        (om * om)[..., None, None] / (2.0 * ell * ell) * x[..., :, None] * xl[..., None, :]
    )
    jac[..., 4, :] = -(om * om)[..., None] * xl / ell
    return jac


def embed_jacobian_fd(ell: float, x, h: float = 1e-6) -> np.ndarray:
    """Finite-difference Jacobian (…, K, α) for cross-checks."""
    d = fd_partials(lambda y: embed(ell, y).X, np.asarray(x, dtype=np.float64), h)
    return np.swapaxes(d, -1, -2)


def pullback_metric(ell: float, x, jac: np.ndarray | None = None) -> np.ndarray:
    jac = embed_jacobian(ell, x) if jac is None else jac
    return np.einsum("...ka,kl,...lb->...ab", jac, ETA5, jac)


# ---------------------------------------------------------------- Killing fields

def killing_translations(ell: float, x) -> np.ndarray:
    """ξ_α^μ = δ_α^μ − (1/4ℓ²)(2 x_α x^μ − σ² δ_α^μ), indexed [..., α, μ].

    A polynomial in x, so it is evaluated even on the absolute.
    """
    _check_ell(ell)
    x = np.asarray(x, dtype=np.float64)
    c = 1.0 / (4.0 * ell * ell)
    eye = np.eye(DIM)
    return (1.0 + c * sigma2(x))[..., None, None] * eye - 2.0 * c * lower(x)[..., :, None] * x[..., None, :]


def killing_translations_partials(ell: float, x) -> np.ndarray:
    """∂_k ξ_α^μ as (..., k, α, μ)."""
    x = np.asarray(x, dtype=np.float64)
    c = 1.0 / (4.0 * ell * ell)
    xl = lower(x)
    eye = np.eye(DIM)
    out = 2.0 * c * xl[..., :, None, None] * eye
    out = out - 2.0 * c * np.einsum("ka,...m->...kam", ETA, x)
    out = out - 2.0 * c * np.einsum("...a,km->...kam", xl, eye)
    return out


def killing_rotations(ell: float, x) -> np.ndarray:
    """Components of J_{μν} = x_μ ∂_ν − x_ν ∂_μ as (..., μ, ν, component)."""
    x = np.asarray(x, dtype=np.float64)
    xl = lower(x)
    eye = np.eye(DIM)
    a = xl[..., :, None, None] * eye[None, :, :]
    return a - np.swapaxes(a, -3, -2)


def translation_field(chart: Chart, alpha: int) -> VectorField:
    ell = chart.params["ell"]
    return VectorField(chart, lambda x: killing_translations(ell, x)[..., alpha, :])


def rotation_field(chart: Chart, mu: int, nu: int) -> VectorField:
    ell = chart.params["ell"]
    return VectorField(chart, lambda x: killing_rotations(ell, x)[..., mu, nu, :])


def all_killing_fields(chart: Chart) -> dict[str, VectorField]:
    fields = {f"Pi_{a}": translation_field(chart, a) for a in range(DIM)}
    for mu in range(DIM):
        for nu in range(mu + 1, DIM):
            fields[f"J_{mu}{nu}"] = rotation_field(chart, mu, nu)
    return fields


@dataclass(frozen=True)
class KillingBasisSample:
    point: np.ndarray
    xi: np.ndarray
    jmat: np.ndarray
    det_xi: float


def killing_basis_sample(ell: float, x) -> KillingBasisSample:
    x = np.asarray(x, dtype=np.float64).reshape(DIM)
    return KillingBasisSample(x, killing_translations(ell, x), killing_rotations(ell, x), float(killing_det(ell, x)))


def killing_det(ell: float, x) -> np.ndarray:
    """det ξ in closed form: ξ = (1+s)I − (1/2ℓ²) x_α x^μ is a rank-one update, so
    det ξ = (1+s)³(1−s) with s = σ²/4ℓ²."""
    s = sigma2(x) / (4.0 * ell * ell)
    return (1.0 + s) ** 3 * (1.0 - s)


def killing_det_numeric(ell: float, x) -> np.ndarray:
    return np.linalg.det(killing_translations(ell, x))


def killing_det_reduced(ell: float, t, x1) -> np.ndarray:
    """The listed y = z = 0 reduction (1/512)(σ²+4)³(−σ⁴+2σ²+8), ℓ = 1 only."""
    if ell != 1.0:
        raise ValueError("the reduced closed form is stated for ℓ = 1")
    s2 = np.asarray(t, dtype=np.float64) ** 2 - np.asarray(x1, dtype=np.float64) ** 2
    return (s2 + 4.0) ** 3 * (-s2 * s2 + 2.0 * s2 + 8.0) / 512.0


def killing_det_reduced_derived(ell: float, t, x1) -> np.ndarray:
    """det ξ on y = z = 0 from the rank-one closed form (any ℓ)."""
    s2 = np.asarray(t, dtype=np.float64) ** 2 - np.asarray(x1, dtype=np.float64) ** 2
    s = s2 / (4.0 * ell * ell)
    return (1.0 + s) ** 3 * (1.0 - s)


def literal_component_matrix(x) -> np.ndarray:
    """The componentwise listing with extra σ²/4 factors (ℓ = 1):
    (1 + σ²/4) δ − (σ²/8) x_α x^μ.  Its determinant is the listed reduction;
    it is not a Killing basis."""
    x = np.asarray(x, dtype=np.float64)
    s2 = sigma2(x)
    return (1.0 + s2 / 4.0)[..., None, None] * np.eye(DIM) - (s2 / 8.0)[..., None, None] * (
        lower(x)[..., :, None] * x[..., None, :]
    )


def _nondegenerate(ell, x):
    det = killing_det(ell, x)
    if np.any(np.abs(det) < DEGENERACY_THRESHOLD):
        raise BasisDegeneracyError(f"Killing translations degenerate (det ξ = {float(np.min(np.abs(det))):.3e})")


def covariant_killing_derivative(ell: float, x) -> np.ndarray:
    """(D_{∂_μ} Π_α)^ν = ∂_μ ξ_α^ν + Γ^ν_{μρ} ξ_α^ρ as (..., μ, α, ν)."""
    chart = desitter_chart(ell)
    x = np.asarray(x, dtype=np.float64)
    gamma = chart.christoffel(x)
    xi = killing_translations(ell, x)
    return killing_translations_partials(ell, x) + np.einsum("...nmr,...ar->...man", gamma, xi)


def hybrid_connection(ell: float, x) -> np.ndarray:
    """𝚪^β_{μα} from D_{∂_μ}Π_α = 𝚪^β_{μα} Π_β, indexed (..., β, μ, α)."""
    x = np.asarray(x, dtype=np.float64)
    _nondegenerate(ell, x)
    xi = killing_translations(ell, x)
    dpi = covariant_killing_derivative(ell, x)  # [μ, α, ν] = 𝚪^β_{μα} ξ_β^ν
    # solve ξᵀ y = dpiᵀ per μ
    xi_t = np.swapaxes(xi, -1, -2)[..., None, :, :]
    sol = np.linalg.solve(xi_t, np.swapaxes(dpi, -1, -2))  # [μ, β, α]
    return np.moveaxis(sol, -2, -3)


def killing_charges(ell: float, x, u) -> np.ndarray:
    """C_α = g(u, Π_α)."""
    g = _metric(ell, np.asarray(x, dtype=np.float64))
    return np.einsum("...m,...mn,...an->...a", u, g, killing_translations(ell, x))


# ---------------------------------------------------------------- teleparallel frame

TETRAD_MODES = ("listed", "unit", "orthonormal")


@dataclass(frozen=True)
class Tetrad:
    vectors: np.ndarray  # [α, μ]
    mode: str
    gram: np.ndarray

    def orthonormality_defect(self) -> float:
        return float(np.max(np.abs(self.gram - ETA)))


def tetrad_vectors(ell: float, x, mode: str = "listed") -> np.ndarray:
    """Frame vectors from the Killing translations, (..., α, μ).

    ``listed`` divides Π_α by g(Π_α, Π_α); ``unit`` divides by √|g(Π_α, Π_α)|;
    ``orthonormal`` runs Gram–Schmidt against g in the order Π_0..Π_3.
    """
    if mode not in TETRAD_MODES:
        raise ValueError(f"unknown tetrad normalization '{mode}'")
    x = np.asarray(x, dtype=np.float64)
    g = _metric(ell, x)
    xi = killing_translations(ell, x)
    norms = np.einsum("...am,...mn,...an->...a", xi, g, xi)
    if np.any(np.abs(norms) < 1e-14):
        raise BasisDegeneracyError("null Killing translation at this point")
    if mode == "listed":
        return xi / norms[..., None]
    if mode == "unit":
        return xi / np.sqrt(np.abs(norms))[..., None]
    frame = []
    for a in range(DIM):
        v = xi[..., a, :]
        for b, e in enumerate(frame):
            v = v - ETA[b, b] * np.einsum("...m,...mn,...n->...", v, g, e)[..., None] * e
        n2 = np.einsum("...m,...mn,...n->...", v, g, v)
        if np.any(n2 * ETA[a, a] <= 1e-14):
            raise BasisDegeneracyError("Gram–Schmidt met a vector of the wrong causal type")
        frame.append(v / np.sqrt(np.abs(n2))[..., None])
    return np.stack(frame, axis=-2)


def tetrad_from_killing(ell: float, x, normalization: str = "listed") -> Tetrad:
    x = np.asarray(x, dtype=np.float64).reshape(DIM)
    omega(ell, x)
    e = tetrad_vectors(ell, x, normalization)
    gram = e @ _metric(ell, x) @ e.T
    return Tetrad(e, normalization, gram)


@dataclass(frozen=True)
class TeleparallelData:
    frame: np.ndarray  # e_α^μ
    coframe: np.ndarray  # θ^κ_μ
    frame_metric: np.ndarray  # g(e_α, e_β)
    structure: np.ndarray  # c^κ_{αβ}: [e_α, e_β] = c^κ_{αβ} e_κ
    torsion: np.ndarray  # T^κ_{αβ} of the connection with ∇e = 0
    contorsion: np.ndarray  # Δ^κ_{αβ}
    levi_civita: np.ndarray  # frame Γ^κ_{αβ}: D_{e_α} e_β = Γ^κ_{αβ} e_κ
    rel_residual: float


def frame_function(ell: float, mode: str):
    return lambda y: tetrad_vectors(ell, y, mode)


def contorsion_from_torsion(torsion: np.ndarray, frame_metric: np.ndarray) -> np.ndarray:
    """Δ^κ_{αβ} = −½(T_α·β^·κ· + T_β·α^·κ· − T^κ_{αβ}).

    The mixed symbol is read as T_α·β^·κ· = G_{αλ} T^λ_{βμ} G^{μκ}: the upper
    torsion index lowered into the first slot, the last lower slot raised.
    """
    ginv = np.linalg.inv(frame_metric)
    mixed = np.einsum("al,lbm,mk->kab", frame_metric, torsion, ginv)
    return -0.5 * (mixed + np.swapaxes(mixed, 1, 2) - torsion)


def teleparallel_torsion_contorsion(ell: float, x, frame: str = "orthonormal", h: float = 1e-5) -> TeleparallelData:
    """Torsion of the connection that makes the frame parallel, its contorsion,
    and the Levi-Civita frame coefficients for the relation Γ = Γ̄ − Δ with Γ̄ = 0."""
    x = np.asarray(x, dtype=np.float64).reshape(DIM)
    chart = desitter_chart(ell)
    chart.check(x)
    fn = frame_function(ell, frame)
    e = fn(x)
    if abs(np.linalg.det(e)) < 1e-12:
        raise BasisDegeneracyError("frame vectors are linearly dependent")
    theta = np.linalg.inv(e)  # e @ theta = I, theta[μ, κ]
    de = fd_partials(fn, x, h)  # [k, α, μ]
    # [e_α, e_β]^ν = e_α^k ∂_k e_β^ν − e_β^k ∂_k e_α^ν
    der = np.einsum("ak,kbn->abn", e, de)
    bracket = der - np.swapaxes(der, 0, 1)
    structure = np.einsum("abn,nk->kab", bracket, theta)
    torsion = -structure
    gmat = _metric(ell, x)
    frame_metric = e @ gmat @ e.T
    contorsion = contorsion_from_torsion(torsion, frame_metric)
    # D_{e_α} e_β = e_α^μ (∂_μ e_β^ν + Γ^ν_{μρ} e_β^ρ) ∂_ν
    gamma = chart.christoffel(x)
    cov = der + np.einsum("am,nmr,br->abn", e, gamma, e)
    lc = np.einsum("abn,nk->kab", cov, theta)
    rel = float(np.max(np.abs(lc + contorsion)))
    return TeleparallelData(e, theta.T, frame_metric, structure, torsion, contorsion, lc, rel)


# ---------------------------------------------------------------- Θ assembly

def killing_current_fields(chart: Chart, W: MixedTensorField) -> list[FormField]:
    """𝒥_{Π_α} with components V^μ g_{μλ} W^λ_β for V = Π_α."""
    from .charts import current_field

    return [current_field(translation_field(chart, a), W) for a in range(DIM)]


@dataclass(frozen=True)
class ThetaField:
    """Θ^κ_α: coordinate components κ of the current labelled α (…, κ, α),
    together with the frame used for frame components."""

    chart: Chart
    currents: tuple
    frame_mode: str

    def coordinate(self, x) -> np.ndarray:
        """Θ^μ_α = g^{μν} 𝒥_{α,ν}."""
        x = np.asarray(x, dtype=np.float64)
        gi = self.chart.metric_inverse(x)
        comps = np.stack([c.coeffs(x)[..., [1, 2, 4, 8]] for c in self.currents], axis=-1)
        return np.einsum("...mn,...na->...ma", gi, comps)

    def frame_components(self, x) -> np.ndarray:
        """Θ^κ_β = θ^κ(𝒥_{Π_β}^♯): frame components, the Killing label read as a frame index."""
        x = np.asarray(x, dtype=np.float64)
        ell = self.chart.params["ell"]
        e = tetrad_vectors(ell, x, self.frame_mode)
        theta = np.linalg.inv(e)
        coord = self.coordinate(x)
        return np.einsum("...mk,...ma->...ka", theta, coord)


def assemble_theta(currents, frame: str = "orthonormal", chart: Chart | None = None) -> ThetaField:
    currents = tuple(currents)
    if len(currents) != DIM:
        raise ValueError("need four currents")
    chart = currents[0].chart if chart is None else chart
    return ThetaField(chart, currents, frame)


@dataclass(frozen=True)
class TeleparallelDivergence:
    lhs: np.ndarray  # ∇_α Θ^α_β = e_α(Θ^α_β)
    rhs_literal: np.ndarray  # −Δ^α_{αι}Θ^ι_β + Δ^ι_{αβ}Θ^α_ι
    rhs_label: np.ndarray  # Δ^α_{αι}Θ^ι_β (β as a label)
    levi_civita_divergence: np.ndarray  # e_α(Θ^α_β) + Γ^α_{αι}Θ^ι_β
    residual: float
    residual_label: float


def teleparallel_divergence_terms(theta: ThetaField, x, h: float = 1e-5) -> TeleparallelDivergence:
    x = np.asarray(x, dtype=np.float64).reshape(DIM)
    ell = theta.chart.params["ell"]
    data = teleparallel_torsion_contorsion(ell, x, theta.frame_mode, h)
    e = data.frame
    dtheta = fd_partials(theta.frame_components, x, h)  # [k, κ, β]
    lhs = np.einsum("ak,kab->b", e, dtheta)
    comps = theta.frame_components(x)
    delta = data.contorsion
    rhs_literal = -np.einsum("aai,ib->b", delta, comps) + np.einsum("iab,ai->b", delta, comps)
    rhs_label = np.einsum("aai,ib->b", delta, comps)
    lc_div = lhs + np.einsum("aai,ib->b", data.levi_civita, comps)
    return TeleparallelDivergence(
        lhs,
        rhs_literal,
        rhs_label,
        lc_div,
        float(np.max(np.abs(lhs - rhs_literal))),
        float(np.max(np.abs(lhs - rhs_label))),
    )


def teleparallel_divergence_check(theta: ThetaField, x) -> float:
    return teleparallel_divergence_terms(theta, x).residual


def dual_form_residuals(theta: ThetaField, x, h: float = 1e-5) -> tuple[float, float]:
    """(max |∂_μ(√−g Θ^μ_α)| / √−g, max |D_μ Θ^μ_α|) with α a label."""
    chart = theta.chart
    x = np.asarray(x, dtype=np.float64).reshape(DIM)

    def dens(y):
        vol = np.sqrt(np.abs(np.linalg.det(chart.metric(y))))
        return vol[..., None, None] * theta.coordinate(y)

    vol = np.sqrt(abs(np.linalg.det(chart.metric(x))))
    first = np.einsum("mma->a", fd_partials(dens, x, h)) / vol
    coord = theta.coordinate(x)
    gamma = chart.christoffel(x)
    second = np.einsum("mma->a", fd_partials(theta.coordinate, x, h)) + np.einsum("mml,la->a", gamma, coord)
    return float(np.max(np.abs(first))), float(np.max(np.abs(second)))


@dataclass(frozen=True)
class CovectorRecord:
    components: np.ndarray
    basis_labels: tuple

    def as_dict(self) -> dict:
        return {"components": self.components.tolist(), "basis": list(self.basis_labels)}


def covector_assemble(charges, basis_labels=("E^0", "E^1", "E^2", "E^3")) -> CovectorRecord:
    """P = P_α E^α with the cotangent spaces identified."""
    comps = np.asarray(charges, dtype=np.float64).reshape(DIM)
    return CovectorRecord(comps, tuple(basis_labels))
