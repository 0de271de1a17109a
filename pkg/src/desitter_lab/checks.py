"""Named verification checks grouped into suites.

Each check yields a :class:`CheckReport`.  Checks of a listed formula that
is known to disagree with the computed structure are tagged ``literal``; a
literal mismatch reports ``warn`` (``fail`` under strict mode) while the
corrected form is checked separately with ordinary pass/fail status.
"""

from __future__ import annotations

import itertools
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from . import algebra, charts, clifford, desitter, dynamics, komar

SUITES = ("clifford", "geometry", "desitter", "komar", "algebra", "dynamics")


@dataclass
class CheckReport:
    suite: str
    name: str
    anchor: str
    residual: float
    tolerance: float
    status: str
    runtime_ms: float | None = None
    detail: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["residual"] = _num(self.residual)
        d["tolerance"] = _num(self.tolerance)
        return d


def _num(v):
    v = float(v)
    if np.isnan(v) or np.isinf(v):
        return str(v)
    return float(f"{v:.6e}")


@dataclass(frozen=True)
class RunSettings:
    seed: int = 0
    ell: float = 1.0
    m: float = 1.0
    radius: float = 10.0
    grid: int = 64
    stokes_n: int = 32
    strict: bool = False
    timings: bool = False
    threads: int = 1


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    anchor: str
    tolerance: float
    fn: Callable  # settings -> residual or (residual, detail)
    literal: bool = False


def status_for(residual: float, tolerance: float, literal: bool, strict: bool) -> str:
    if residual <= tolerance:
        return "pass"
    if literal and not strict:
        return "warn"
    return "fail"


def run_check(check: Check, s: RunSettings, tolerance: float | None = None) -> CheckReport:
    tol = check.tolerance if tolerance is None else tolerance
    t0 = time.perf_counter()
    try:
        out = check.fn(s)
    except Exception as err:  # a crashing check is a failing check
        return CheckReport(check.suite, check.name, check.anchor, float("inf"), tol, "fail",
                           detail={"error": f"{type(err).__name__}: {err}"})
    residual, detail = out if isinstance(out, tuple) else (out, {})
    runtime = round((time.perf_counter() - t0) * 1000.0, 1) if s.timings else None
    residual = float(residual)
    status = status_for(residual, tol, check.literal, s.strict)
    if check.literal:
        detail = {**detail, "form": "literal"}
    return CheckReport(check.suite, check.name, check.anchor, residual, tol, status, runtime, detail)


def run_suites(names, settings: RunSettings, tolerances: dict | None = None) -> list[CheckReport]:
    """Run suites in order; results come back in check order whatever the thread count."""
    tolerances = tolerances or {}
    checks = [c for n in names for c in SUITE_BUILDERS[n]()]

    def one(c):
        return run_check(c, settings, tolerances.get(c.name))

    workers = max(1, min(settings.threads, len(checks)))
    if workers == 1:
        return [one(c) for c in checks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, checks))


def thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("DESITTER_LAB_THREADS", "1")))
    except ValueError:
        return 1


def _rng(s: RunSettings, salt: int) -> np.random.Generator:
    return np.random.default_rng([s.seed, salt])


def _interior_points(rng, n, ell=1.0, scale=0.5):
    return rng.uniform(-scale * ell, scale * ell, (n, 4))


# ---------------------------------------------------------------- clifford

def _sigs():
    skew = np.array([[1.0, 0.2, 0.0, 0.1], [0.2, -1.0, 0.3, 0.0], [0.0, 0.3, -1.2, 0.0], [0.1, 0.0, 0.0, -0.8]])
    return [clifford.Signature.lorentzian(4), clifford.Signature.lorentzian(5), clifford.Signature(skew)]


def _generator_relation(s):
    worst = 0.0
    for sig in _sigs()[:2]:
        g = np.linalg.inv(sig.metric) if False else sig.metric
        gens = [clifford.Multivector.basis_vector(sig, i) for i in range(sig.dim)]
        for a, b in itertools.product(range(sig.dim), repeat=2):
            anti = gens[a] * gens[b] + gens[b] * gens[a] - 2.0 * g[a, b] * clifford.Multivector.scalar(sig, 1.0)
            worst = max(worst, anti.norm_inf())
    return worst


def _associativity(s):
    rng = _rng(s, 1)
    worst = 0.0
    for sig in _sigs():
        for _ in range(200):
            a, b, c = (clifford.random_multivector(sig, rng) for _ in range(3))
            worst = max(worst, ((a * b) * c - a * (b * c)).norm_inf())
    return worst


def _decompositions(s):
    rng = _rng(s, 2)
    worst = 0.0
    for sig in _sigs():
        for _ in range(200):
            a = clifford.random_multivector(sig, rng, 1)
            k = int(rng.integers(0, sig.dim + 1))
            B = clifford.random_multivector(sig, rng, k)
            sign = (-1.0) ** k
            inner = 0.5 * (a * B - sign * (B * a))
            outer = 0.5 * (a * B + sign * (B * a))
            worst = max(worst, (clifford.left_contraction(a, B) - inner).norm_inf(), ((a ^ B) - outer).norm_inf())
            A2 = clifford.random_multivector(sig, rng, k)
            sp = clifford.scalar_product(A2, B)
            worst = max(worst, abs((clifford.reversion(A2) * B).scalar_part() - sp),
                        abs(clifford.left_contraction(clifford.reversion(A2), B).scalar_part() - sp))
    return worst


def _contraction_derivation(s):
    rng = _rng(s, 3)
    worst = 0.0
    for sig in _sigs():
        g = clifford.grades(sig.dim)
        inv = np.where(g % 2 == 1, -1.0, 1.0)
        for _ in range(200):
            a = clifford.random_multivector(sig, rng, 1)
            X = clifford.random_multivector(sig, rng)
            Y = clifford.random_multivector(sig, rng)
            X_hat = clifford.Multivector(sig, X.coeffs * inv)
            lhs = clifford.left_contraction(a, X ^ Y)
            rhs = (clifford.left_contraction(a, X) ^ Y) + (X_hat ^ clifford.left_contraction(a, Y))
            worst = max(worst, (lhs - rhs).norm_inf())
    return worst


def _contraction_composition(s):
    rng = _rng(s, 4)
    worst = 0.0
    for sig in _sigs():
        for _ in range(200):
            X, Y, Z = (clifford.random_multivector(sig, rng, int(rng.integers(0, sig.dim + 1))) for _ in range(3))
            lhs = clifford.left_contraction(X, clifford.left_contraction(Y, Z))
            rhs = clifford.left_contraction(X ^ Y, Z)
            worst = max(worst, (lhs - rhs).norm_inf())
    return worst


def _reversion(s):
    rng = _rng(s, 5)
    worst = 0.0
    for sig in _sigs():
        for _ in range(200):
            A, B = clifford.random_multivector(sig, rng), clifford.random_multivector(sig, rng)
            worst = max(worst, (clifford.reversion(clifford.reversion(A)) - A).norm_inf(),
                        (clifford.reversion(A * B) - clifford.reversion(B) * clifford.reversion(A)).norm_inf())
            for k in range(sig.dim + 1):
                Ak = clifford.grade_project(A, k)
                worst = max(worst, (clifford.reversion(Ak) - (-1.0) ** (k * (k - 1) // 2) * Ak).norm_inf())
    return worst


def _hodge_round_trip(s):
    worst = 0.0
    for sig in _sigs()[:2]:
        for m in range(sig.size):
            e = clifford.Multivector(sig, np.eye(sig.size)[m])
            worst = max(worst, (clifford.hodge_star(clifford.hodge_star_inverse(e)) - e).norm_inf(),
                        (clifford.hodge_star_inverse(clifford.hodge_star(e)) - e).norm_inf())
    return worst


def _hodge_round_trip_random(s):
    rng = _rng(s, 6)
    worst = 0.0
    for sig in _sigs():
        for _ in range(200):
            A = clifford.random_multivector(sig, rng)
            worst = max(worst, (clifford.hodge_star_inverse(clifford.hodge_star(A)) - A).norm_inf())
    return worst


def _hodge_routes(s):
    rng = _rng(s, 7)
    worst = 0.0
    for sig in _sigs():
        for _ in range(200):
            A = clifford.random_multivector(sig, rng)
            comp = clifford.hodge_star_components(A.coeffs, sig.metric, sig.orientation)
            worst = max(worst, float(np.max(np.abs(clifford.hodge_star(A).coeffs - comp))))
    return worst


def _hodge_identities(s):
    rng = _rng(s, 8)
    worst = 0.0
    star, rev, lc = clifford.hodge_star, clifford.reversion, clifford.left_contraction
    for sig in _sigs():
        n = sig.dim
        tau = clifford.pseudoscalar(sig)
        one = clifford.Multivector.scalar(sig, 1.0)
        worst = max(worst, (star(one) - tau).norm_inf(), abs(star(tau).scalar_part() - np.sign(sig.det)),
                    (star(tau) - star(tau).grade(0)).norm_inf())
        for _ in range(200):
            r, t = (int(v) for v in rng.integers(0, n + 1, 2))
            A, B = clifford.random_multivector(sig, rng, r), clifford.random_multivector(sig, rng, t)
            if r == t:
                worst = max(worst, ((A ^ star(B)) - (B ^ star(A))).norm_inf())
            if r + t == n:
                worst = max(worst, (lc(A, star(B)) - lc(B, star(A))).norm_inf())
            if r <= t:
                worst = max(worst, ((A ^ star(B)) - (-1.0) ** (r * (t - 1)) * star(lc(rev(A), B))).norm_inf())
            if r + t <= n:
                worst = max(worst, (lc(A, star(B)) - (-1.0) ** (r * t) * star(rev(A) ^ B)).norm_inf())
    return worst


def _clifford_examples(s):
    sig = clifford.Signature.lorentzian(4)
    g = [clifford.Multivector.basis_vector(sig, i) for i in range(4)]
    one = clifford.Multivector.scalar(sig, 1.0)
    g01 = g[0] ^ g[1]
    tau = clifford.pseudoscalar(sig)
    residuals = [
        ((g[0] * g[0]) - one).norm_inf(),
        ((g[1] * g[1]) + one).norm_inf(),
        (clifford.left_contraction(g[0], g01) - g[1]).norm_inf(),
        clifford.left_contraction(g01, g[0]).norm_inf(),
        abs(clifford.scalar_product(g01, g01) + 1.0),
        (clifford.hodge_star(g[0]) - (g[1] ^ g[2] ^ g[3])).norm_inf(),
        ((tau * tau) + one).norm_inf(),
        (clifford.reversion(tau) - tau).norm_inf(),
    ]
    return max(residuals), {"rendered_g0g1": clifford.render(g01)}


def clifford_checks() -> list[Check]:
    c = "clifford"
    return [
        Check(c, "generator-relation", "clifford-generator-relation", 0.0, _generator_relation),
        Check(c, "associativity", "clifford-product", 1e-12, _associativity),
        Check(c, "contraction-exterior-decomposition", "clifford-decompositions", 1e-12, _decompositions),
        Check(c, "contraction-derivation-identity", "contraction-derivation", 1e-12, _contraction_derivation),
        Check(c, "contraction-composition-identity", "contraction-composition", 1e-12, _contraction_composition),
        Check(c, "reversion-signs", "reversion", 1e-12, _reversion),
        Check(c, "hodge-round-trip-basis", "hodge-inverse", 0.0, _hodge_round_trip),
        Check(c, "hodge-round-trip-random", "hodge-inverse", 1e-12, _hodge_round_trip_random),
        Check(c, "hodge-two-routes", "hodge-component-formula", 1e-12, _hodge_routes),
        Check(c, "hodge-identities", "hodge-identities", 1e-12, _hodge_identities),
        Check(c, "worked-examples", "clifford-product", 1e-14, _clifford_examples),
    ]


# ---------------------------------------------------------------- geometry

def _ds(s):
    return desitter.desitter_chart(s.ell)


def _scalar_curvature(s):
    chart = _ds(s)
    pts = _interior_points(_rng(s, 10), 50, s.ell, 0.8)
    _, _, scal = charts.curvature_batch(chart, pts)
    vals = scal * s.ell**2
    return float(np.max(np.abs(vals - 12.0))), {"std": float(np.std(vals)), "mean": float(np.mean(vals))}


def _scalar_curvature_spread(s):
    chart = _ds(s)
    pts = _interior_points(_rng(s, 10), 50, s.ell, 0.8)
    _, _, scal = charts.curvature_batch(chart, pts)
    return float(np.std(scal * s.ell**2))


def _einstein_divergence(s):
    chart = _ds(s)
    pts = _interior_points(_rng(s, 11), 20, s.ell)
    return float(np.max(np.abs(charts.divergence_mixed_coeffs(charts.einstein_tensor_field(chart), chart, pts))))


def _killing_all(s):
    chart = _ds(s)
    pts = _interior_points(_rng(s, 12), 10, s.ell)
    worst = {}
    for name, field_ in desitter.all_killing_fields(chart).items():
        worst[name] = max(charts.killing_residual(field_, chart, p) for p in pts)
    return max(worst.values()), {"worst_field": max(worst, key=worst.get)}


def _random_smooth(rng, chart):
    cv = rng.normal(size=(4, 4)) * 0.3
    v0 = rng.normal(size=4)
    cw = rng.normal(size=(4, 4, 4)) * 0.2
    w0 = rng.normal(size=(4, 4))
    V = charts.VectorField(chart, lambda x: v0 + np.sin(x @ cv.T))

    def w_fn(x):
        low = w0 + np.einsum("...k,kab->...ab", np.cos(x), cw)
        low = 0.5 * (low + np.swapaxes(low, -1, -2))  # symmetric W_{αβ}
        return np.einsum("...ak,...kb->...ab", chart.metric_inverse(x), low)

    return V, charts.MixedTensorField(chart, w_fn, symmetric=True)


def _divergence_relation(s):
    rng = _rng(s, 13)
    worst = 0.0
    for chart in (_ds(s), charts.schwarzschild_chart(1.0)):
        V, W = _random_smooth(rng, chart)
        for _ in range(5):
            x = np.array([rng.uniform(-0.4, 0.4), 0.0, 0.0, 0.0]) + rng.uniform(-0.3, 0.3, 4)
            if chart.name == "schwarzschild":
                x = np.array([rng.uniform(-1, 1), rng.uniform(4, 8), rng.uniform(0.5, 2.5), rng.uniform(0, 6)])
            worst = max(worst, charts.divergence_relation_check(V, W, x))
    return worst


def _current_conservation(s):
    chart = _ds(s)
    G = charts.einstein_tensor_field(chart)
    pts = _interior_points(_rng(s, 14), 10, s.ell)
    worst = 0.0
    for a in range(4):
        J = charts.current_field(desitter.translation_field(chart, a), G)
        worst = max(worst, float(np.max(np.abs(charts.delta_coeffs(J, pts, chart.h2)))))
    return worst


def _weitzenbock(s):
    chart = _ds(s)
    rng = _rng(s, 15)
    A = charts.FormField.one_form(chart, lambda x: np.stack([np.sin(x[..., 1]), x[..., 0] ** 2, np.cos(x[..., 2] + x[..., 3]),
                                                             x[..., 0] * x[..., 1]], axis=-1))
    return max(komar.weitzenbock_residual(A, p) for p in _interior_points(rng, 5, s.ell, 0.4))


def _codifferential_routes(s):
    chart = _ds(s)
    rng = _rng(s, 16)
    F = charts.FormField.from_components(chart, 2, lambda x: np.stack([np.sin(x[..., k % 4] + k) for k in range(6)], axis=-1))
    pts = _interior_points(rng, 10, s.ell, 0.4)
    a = charts.delta_coeffs(F, pts)
    b = charts.delta_contraction_coeffs(F, pts)
    return float(np.max(np.abs(a - b)))


def _delta_squared(s):
    chart = _ds(s)
    rng = _rng(s, 17)
    F = charts.FormField.from_components(chart, 2, lambda x: np.stack([np.sin(x[..., k % 4] * (k + 1)) for k in range(6)], axis=-1))
    pts = _interior_points(rng, 10, s.ell, 0.4)
    return float(np.max(np.abs(charts.delta_coeffs(charts.delta_field(F), pts, chart.h2))))


def _ricci_operator(s):
    chart = _ds(s)
    x = _interior_points(_rng(s, 18), 1, s.ell, 0.4)[0]
    geo = charts.geometry_at(chart, x)
    mixed = geo.ricci_mixed()
    worst = 0.0
    for mu in range(4):
        full = charts.ricci_operator_apply(chart, mu, x, keep_all_grades=True)
        worst = max(worst, float(np.max(np.abs(full.coeffs[[1, 2, 4, 8]] - mixed[mu]))), full.grade(3).norm_inf())
    return worst


def _schwarzschild_vacuum(s):
    chart = charts.schwarzschild_chart(1.0)
    pts = np.array([[0.0, 5.0, 1.0, 0.3], [1.0, 8.0, 2.0, 4.0], [0.0, 3.5, 0.7, 1.0]])
    _, ricci, _ = charts.curvature_batch(chart, pts)
    return float(np.max(np.abs(ricci)))


def geometry_checks() -> list[Check]:
    c = "geometry"
    return [
        Check(c, "desitter-scalar-curvature", "desitter-curvature", 1e-6, _scalar_curvature),
        Check(c, "desitter-scalar-curvature-spread", "desitter-curvature", 1e-8, _scalar_curvature_spread),
        Check(c, "einstein-divergence", "einstein-tensor-conservation", 1e-6, _einstein_divergence),
        Check(c, "killing-residuals", "killing-equation", 1e-8, _killing_all),
        Check(c, "divergence-relation", "current-divergence-relation", 1e-5, _divergence_relation),
        Check(c, "killing-current-conservation", "current-conservation", 1e-6, _current_conservation),
        Check(c, "weitzenbock-split", "dirac-square-split", 1e-5, _weitzenbock),
        Check(c, "ricci-operator", "ricci-operator", 1e-6, _ricci_operator),
        Check(c, "codifferential-two-routes", "codifferential", 1e-6, _codifferential_routes),
        Check(c, "codifferential-squared", "codifferential", 1e-5, _delta_squared),
        Check(c, "schwarzschild-ricci-flat", "plumbing", 1e-8, _schwarzschild_vacuum),
    ]


# ---------------------------------------------------------------- de Sitter model

DET_GRID = (-3.0, 3.0, 121)
EXPECTED_LOCI = (4.0, -2.0, -4.0)


def det_grid(ell: float = 1.0, lo: float = -3.0, hi: float = 3.0, n: int = 121):
    t = np.linspace(lo, hi, n)
    T, X = np.meshgrid(t, t, indexing="ij")
    pts = np.stack([T, X, np.zeros_like(T), np.zeros_like(T)], axis=-1)
    return T, X, desitter.killing_det_numeric(ell, pts)


def det_zero_loci(ell: float = 1.0, lo: float = -3.0, hi: float = 3.0, n: int = 121) -> list[float]:
    """σ² values where det ξ vanishes on the y = z = 0 grid.

    Sign changes of each eigenvalue branch of ξ between neighbouring grid
    nodes are refined by Brent's method; working with eigenvalues keeps the
    triple root well conditioned.
    """
    t = np.linspace(lo, hi, n)

    def eig(p):
        return np.sort(np.linalg.eigvals(desitter.killing_translations(ell, p)).real, axis=-1)

    roots = []
    for axis in (0, 1):
        lines = np.zeros((n, n, 4))  # [fixed coordinate, running coordinate]
        lines[:, :, axis] = t[None, :]
        lines[:, :, 1 - axis] = t[:, None]
        ev = eig(lines)
        for j, i, k in zip(*np.nonzero(ev[:, :-1, :] * ev[:, 1:, :] <= 0)):
            p0, p1 = lines[j, i], lines[j, i + 1]
            if ev[j, i, k] == 0.0:
                u = 0.0
            elif ev[j, i + 1, k] == 0.0:
                u = 1.0
            else:
                u = brentq(lambda v: eig(p0 + v * (p1 - p0))[k], 0.0, 1.0, xtol=1e-15, rtol=1e-15)
            p = p0 + u * (p1 - p0)
            roots.append(float(p[0] ** 2 - p[1] ** 2))
    roots = np.sort(np.array(roots))
    loci = []
    for r in roots:
        if not loci or abs(r - loci[-1][-1]) > 1e-6:
            loci.append([r])
        else:
            loci[-1].append(r)
    return [float(np.median(c)) for c in loci], [float(np.max(np.abs(np.array(c) - np.median(c)))) for c in loci]


def _det_literal(s):
    T, X, num = det_grid(1.0, *DET_GRID)
    return float(np.max(np.abs(num - desitter.killing_det_reduced(1.0, T, X))))


def _det_derived(s):
    T, X, num = det_grid(s.ell, *DET_GRID)
    return float(np.max(np.abs(num - desitter.killing_det_reduced_derived(s.ell, T, X))))


def _det_literal_matrix(s):
    T, X, _ = det_grid(1.0, *DET_GRID)
    pts = np.stack([T, X, np.zeros_like(T), np.zeros_like(T)], axis=-1)
    return float(np.max(np.abs(np.linalg.det(desitter.literal_component_matrix(pts)) - desitter.killing_det_reduced(1.0, T, X))))


def _det_loci(expected):
    def fn(s):
        loci, spread = det_zero_loci(1.0, *DET_GRID)
        err = max(min(abs(l - e) for l in loci) for e in expected)
        return err, {"detected": [round(v, 12) for v in loci], "spread": max(spread)}

    return fn


def _embedding(s):
    pts = _interior_points(_rng(s, 20), 50, s.ell, 0.8)
    emb = desitter.embed(s.ell, pts)
    g = desitter.pullback_metric(s.ell, pts)
    jac_gap = float(np.max(np.abs(desitter.embed_jacobian(s.ell, pts) - desitter.embed_jacobian_fd(s.ell, pts))))
    return max(emb.constraint_residual(), float(np.max(np.abs(g - _ds(s).metric(pts)))) , jac_gap * 1e-3)


def _rel(frame):
    def fn(s):
        pts = _interior_points(_rng(s, 21), 10, s.ell, 0.5)
        return max(desitter.teleparallel_torsion_contorsion(s.ell, p, frame).rel_residual for p in pts)

    return fn


def _theta(s):
    chart = _ds(s)
    return desitter.assemble_theta(desitter.killing_current_fields(chart, charts.einstein_tensor_field(chart)), "orthonormal")


def _new_literal(s):
    th = _theta(s)
    pts = _interior_points(_rng(s, 22), 5, s.ell, 0.5)
    return max(desitter.teleparallel_divergence_terms(th, p).residual for p in pts)


def _new_label(s):
    th = _theta(s)
    pts = _interior_points(_rng(s, 22), 5, s.ell, 0.5)
    return max(desitter.teleparallel_divergence_terms(th, p).residual_label for p in pts)


def _levi_civita_divergence(s):
    th = _theta(s)
    pts = _interior_points(_rng(s, 22), 5, s.ell, 0.5)
    return max(float(np.max(np.abs(desitter.teleparallel_divergence_terms(th, p).levi_civita_divergence))) for p in pts)


def _dual_forms(s):
    th = _theta(s)
    pts = _interior_points(_rng(s, 23), 5, s.ell, 0.5)
    return max(max(desitter.dual_form_residuals(th, p)) for p in pts)


def _hybrid_definition(s):
    pts = _interior_points(_rng(s, 24), 10, s.ell, 0.5)
    hyb = desitter.hybrid_connection(s.ell, pts)
    xi = desitter.killing_translations(s.ell, pts)
    lhs = desitter.covariant_killing_derivative(s.ell, pts)  # [n, μ, α, ν]
    rhs = np.einsum("nbma,nbv->nmav", hyb, xi)
    return float(np.max(np.abs(lhs - rhs)))


def desitter_checks() -> list[Check]:
    c = "desitter"
    return [
        Check(c, "killing-det-literal-reduction", "killing-determinant-reduced", 1e-12, _det_literal, literal=True),
        Check(c, "killing-det-closed-form", "killing-determinant", 1e-12, _det_derived),
        Check(c, "killing-det-literal-matrix", "killing-determinant-reduced", 1e-9, _det_literal_matrix),
        Check(c, "killing-det-zero-loci-literal", "killing-determinant-reduced", 1e-10, _det_loci(EXPECTED_LOCI), literal=True),
        Check(c, "killing-det-zero-loci", "killing-determinant", 1e-10, _det_loci((4.0, -4.0))),
        Check(c, "embedding", "conformal-embedding", 1e-10, _embedding),
        Check(c, "hybrid-connection-definition", "hybrid-connection", 1e-10, _hybrid_definition),
        Check(c, "teleparallel-relation-orthonormal", "teleparallel-levi-civita-relation", 1e-8, _rel("orthonormal")),
        Check(c, "teleparallel-relation-listed-tetrad", "teleparallel-levi-civita-relation", 1e-8, _rel("listed"), literal=True),
        Check(c, "teleparallel-divergence-literal", "teleparallel-divergence", 1e-6, _new_literal, literal=True),
        Check(c, "teleparallel-divergence-label", "teleparallel-divergence", 1e-6, _new_label),
        Check(c, "theta-levi-civita-divergence", "teleparallel-divergence", 1e-6, _levi_civita_divergence),
        Check(c, "theta-dual-forms", "theta-conservation-dual-forms", 1e-6, _dual_forms),
    ]


# ---------------------------------------------------------------- komar

def schwarzschild_model(m: float) -> komar.SpacetimeModel:
    chart = charts.schwarzschild_chart(m)
    return komar.SpacetimeModel(chart, charts.MixedTensorField.zero(chart), komar.constant_vector(chart, [1, 0, 0, 0]))


def desitter_model(ell: float, alpha: int = 0) -> komar.SpacetimeModel:
    chart = desitter.desitter_chart(ell)
    return komar.SpacetimeModel(chart, komar.einstein_matter(chart), desitter.translation_field(chart, alpha))


def _komar_mass(s):
    res = komar.komar_surface_energy(schwarzschild_model(s.m), komar.QuadratureSpec(radius=s.radius, n_theta=s.grid, n_phi=s.grid))
    return abs(res.energy - s.m), res.to_record()


def _komar_radius(s):
    e1 = komar.komar_surface_energy(schwarzschild_model(s.m), komar.QuadratureSpec(radius=s.radius, n_theta=s.grid, n_phi=s.grid))
    e2 = komar.komar_surface_energy(schwarzschild_model(s.m), komar.QuadratureSpec(radius=2 * s.radius, n_theta=s.grid, n_phi=s.grid))
    return abs(e1.energy - e2.energy)


def _komar_refinement(s):
    res = komar.komar_surface_energy(schwarzschild_model(s.m), komar.QuadratureSpec(radius=s.radius, n_theta=s.grid, n_phi=s.grid))
    return res.refinement_error, {"reduction_ratio": _num(res.reduction_ratio)}


def _dual_path(s):
    model = desitter_model(s.ell)
    pts = _interior_points(_rng(s, 30), 20, s.ell)
    return float(np.max(np.abs(komar.komar_current_coeffs(model, pts) - komar.komar_current_from_f(model, pts))))


def _maxwell(s):
    model = desitter_model(s.ell)
    pts = _interior_points(_rng(s, 30), 20, s.ell)
    r = komar.maxwell_residual(model, pts)
    return r.full, {"closedness": _num(r.closedness)}


def _maxwell_vacuum(s):
    model = schwarzschild_model(s.m)
    pts = np.array([[0.0, 6.0 * s.m, 1.0, 0.5], [0.5, 10.0 * s.m, 2.0, 3.0]])
    return komar.maxwell_residual(model, pts).full


def _closedness(s):
    model = desitter_model(s.ell, 2)
    pts = _interior_points(_rng(s, 31), 20, s.ell)
    return komar.maxwell_residual(model, pts).closedness


def _komar_conservation(s):
    model = desitter_model(s.ell, 1)
    pts = _interior_points(_rng(s, 32), 5, s.ell, 0.4)
    J = charts.FormField.one_form(model.chart, lambda y: komar.komar_current_from_f(model, y)[..., [1, 2, 4, 8]])
    return float(np.max(np.abs(charts.delta_coeffs(J, pts, model.chart.h2)[..., 0])))


def _killing_form(s):
    model = desitter_model(s.ell)
    pts = _interior_points(_rng(s, 33), 5, s.ell)
    worst = 0.0
    for p in pts:
        r = komar.killing_komar_form(model, p, tol=np.inf)
        worst = max(worst, r.codifferential, r.wave_identity)
    return worst


def _current_identity(s):
    chart = _ds(s)
    pts = _interior_points(_rng(s, 34), 5, s.ell)
    return max(komar.current_identity_residual(chart, desitter.translation_field(chart, 0), p) for p in pts)


def _stokes(s):
    model = desitter_model(s.ell)
    q = komar.QuadratureSpec(surface="box", n=s.stokes_n, bounds=((-0.2, 0.2),) * 3)
    r = komar.stokes_check(model, q)
    return r.residual, {"surface": _num(r.surface), "volume": _num(r.volume)}


def _volume_vs_killing(s):
    model = desitter_model(s.ell)
    q = komar.QuadratureSpec(surface="box", n=16, bounds=((-0.2, 0.2),) * 3)
    return abs(komar.komar_volume_energy(model, q) - komar.killing_volume_energy(model, q))


def _charge_balance(alpha):
    def fn(s):
        chart = _ds(s)
        q = komar.QuadratureSpec(surface="box", n=16, bounds=((0.0, 0.3), (-0.1, 0.2), (-0.15, 0.15)))
        cb = komar.charge_balance(charts.einstein_tensor_field(chart), desitter.translation_field(chart, alpha), q, 0.1)
        return cb.balance_residual, {"charge": _num(cb.charge_t0), "slice_drift": _num(cb.drift),
                                     "side_flux": _num(cb.lateral_flux)}

    return fn


def komar_checks() -> list[Check]:
    c = "komar"
    return [
        Check(c, "komar-mass", "komar-energy-schwarzschild", 1e-6, _komar_mass),
        Check(c, "komar-mass-radius-independence", "komar-energy-schwarzschild", 1e-6, _komar_radius),
        Check(c, "komar-mass-refinement", "komar-energy-schwarzschild", 1e-7, _komar_refinement),
        Check(c, "komar-current-dual-path", "komar-current-explicit", 1e-5, _dual_path),
        Check(c, "maxwell-like-residual", "maxwell-like-equation", 1e-5, _maxwell),
        Check(c, "maxwell-like-residual-vacuum", "maxwell-like-equation", 1e-5, _maxwell_vacuum),
        Check(c, "field-strength-closed", "maxwell-like-equation", 1e-6, _closedness),
        Check(c, "komar-current-conserved", "komar-current", 1e-5, _komar_conservation),
        Check(c, "killing-komar-identities", "komar-killing-form", 1e-5, _killing_form),
        Check(c, "current-proposition", "komar-current-proposition", 1e-5, _current_identity),
        Check(c, "stokes-box", "komar-volume-surface", 1e-4, _stokes),
        Check(c, "volume-vs-killing-form", "komar-killing-form", 1e-5, _volume_vs_killing),
        Check(c, "charge-balance-pi0", "scalar-conserved-charges", 1e-4, _charge_balance(0)),
        Check(c, "charge-balance-pi1", "scalar-conserved-charges", 1e-4, _charge_balance(1)),
    ]


# ---------------------------------------------------------------- algebra

def _commutator(p, q):
    def fn(s):
        gens = algebra.build_generators()
        comp = algebra.bracket(gens[p].matrix, gens[q].matrix)
        exp = algebra.literal_bracket(gens, p, q)
        diff = comp - exp
        return float(algebra.max_abs(diff)), {"computed": {algebra.label_name(k): str(v) for k, v in algebra.decompose(comp).items()},
                                              "listed": {algebra.label_name(k): str(v) for k, v in algebra.decompose(exp).items()}}

    return fn


def _generator_action(s):
    gens = algebra.build_generators()
    rng = _rng(s, 40)
    worst = 0
    from fractions import Fraction

    for _ in range(20):
        X = [Fraction(int(v), 7) for v in rng.integers(-20, 20, 5)]
        for lab, g in gens.items():
            worst = max(worst, max(abs(a - b) for a, b in zip(g.act(X), algebra.field_components(*lab, X))))
        for g in gens.values():
            worst = max(worst, algebra.max_abs(g.eta_antisymmetry_defect()))
    return float(worst)


def _jacobi_computed(s):
    return float(len(algebra.jacobi_defects(algebra.computed_rule)))


def _jacobi_literal(s):
    return float(len(algebra.jacobi_defects(algebra.literal_bracket)))


def _scaled(s):
    gens = algebra.build_generators()
    bad = [r.name for ell in (1, 2, 10) for r in algebra.scaled_commutator_table(gens, ell) if not r.exact_match]
    return float(len(bad)), {"mismatches": bad}


def _casimir(rep):
    def fn(s):
        bad = []
        for ell in (1, 2):
            r = algebra.casimir_check(ell, representation=rep)
            bad += r.failing
            if not r.I1_scaling:
                bad.append(("I1-scaling", ell))
        return float(len(bad)), {"I1_eigenvalues": r.I1_eigenvalues, "I2_eigenvalues": r.I2_eigenvalues}

    return fn


def _casimir_split(s):
    r = algebra.casimir_check(1)
    return 0.0 if r.I1_split_equal else 1.0, {"equal_with_negated_translation_term": r.I1_split_equal_negated_pi}


def _w4_literal(s):
    ratio = algebra.w4_formal_ratio(3)
    return float(abs(ratio - 1)), {"ratio_at_ell_3": str(ratio)}


def _contraction(s):
    r = algebra.contraction_scaling((1, 10, 100))
    bad = (not r.norm_law) + (not r.ratio_law) + (not r.lorentz_invariant)
    return float(bad), {"ratios": [str(v) for v in r.ratios]}


def _pushforward(kind):
    def fn(s):
        rng = _rng(s, 41)
        worst = 0.0
        for ell in (1.0, 3.0):
            r = algebra.pushforward_check(ell, _interior_points(rng, 50, ell, 0.8))
            worst = max(worst, getattr(r, kind))
        return worst

    return fn


def _bridge(s):
    rng = _rng(s, 42)
    return max(algebra.bridge_residual(ell, _interior_points(rng, 3, ell, 0.5)) for ell in (1.0, 2.0))


def algebra_checks() -> list[Check]:
    c = "algebra"
    out = [Check(c, f"commutator[{algebra.label_name(p)},{algebra.label_name(q)}]", "so14-brackets", 0.0, _commutator(p, q),
                 literal=True)
           for p, q in itertools.combinations(algebra.LABELS, 2)]
    out += [
        Check(c, "generator-action", "so14-generators", 0.0, _generator_action),
        Check(c, "jacobi-computed-table", "so14-brackets", 0.0, _jacobi_computed),
        Check(c, "jacobi-literal-table", "so14-brackets", 0.0, _jacobi_literal, literal=True),
        Check(c, "translation-scaled-brackets", "so14-translation-brackets", 0.0, _scaled),
        Check(c, "casimir-centrality-vector", "so14-casimirs", 0.0, _casimir("vector")),
        Check(c, "casimir-centrality-adjoint", "so14-casimirs", 0.0, _casimir("adjoint")),
        Check(c, "casimir-quadratic-split", "so14-casimirs", 0.0, _casimir_split, literal=True),
        Check(c, "pauli-lubanski-fourth-component", "so14-casimirs", 0.0, _w4_literal, literal=True),
        Check(c, "contraction-scaling", "so14-contraction", 0.0, _contraction),
        Check(c, "pushforward-rotations", "chart-generator-identities", 1e-10, _pushforward("rotation_residual")),
        Check(c, "pushforward-boosts-literal", "chart-generator-identities", 1e-10, _pushforward("boost_literal_residual"),
              literal=True),
        Check(c, "pushforward-boosts", "chart-generator-identities", 1e-10, _pushforward("boost_corrected_residual")),
        Check(c, "vector-field-bridge", "so14-brackets", 1e-7, _bridge),
    ]
    return out


# ---------------------------------------------------------------- dynamics

BENCH_STATE = dynamics.CurveState(0.0, [0.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0])
CONSTRAINED_STATE = dynamics.CurveState(0.0, [0.0, 0.5, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0])


def benchmark_run(ell: float = 1.0, h: float = 1e-3, s_max: float = 2.0, log_every: int = 1):
    return dynamics.geodesic_integrate(desitter.desitter_chart(ell), BENCH_STATE,
                                       dynamics.IntegratorConfig(h=h, s_max=s_max, log_every=log_every))


def _bench_norm(s):
    tr = benchmark_run(s.ell)
    return tr.norm_drift()


def _bench_charges(s):
    tr = benchmark_run(s.ell)
    return float(np.max(tr.charge_drift()))


def drift_ratio(h: float, ell: float = 1.0) -> tuple[float, float]:
    a = benchmark_run(ell, h).norm_drift()
    b = benchmark_run(ell, h / 2, log_every=2).norm_drift()
    return a, b


def _order_literal(s):
    a, b = drift_ratio(1e-3, s.ell)
    ratio = a / b if b > 0 else np.inf
    return max(0.0, 8.0 - ratio), {"drift_h": _num(a), "drift_h_over_2": _num(b), "ratio": _num(ratio)}


def _order_asymptotic(s):
    a, b = drift_ratio(0.1, s.ell)
    ratio = a / b
    return max(0.0, 8.0 - ratio), {"drift_h": _num(a), "drift_h_over_2": _num(b), "ratio": _num(ratio), "h": 0.1}


def _time_reversal(s):
    chart = _ds(s)
    st = dynamics.CurveState(0.0, [0.0, 0.5, 0.0, 0.0], [1.0, 0.3, 0.1, 0.0])
    cfg = dynamics.IntegratorConfig(h=1e-3, s_max=1.0, log_every=100)
    fwd = dynamics.geodesic_integrate(chart, st, cfg, normalize=True)
    back = dynamics.geodesic_integrate(chart, dynamics.CurveState(0.0, fwd.x[-1], -fwd.u[-1]), cfg)
    return float(np.max(np.abs(back.x[-1] - st.x)))


def _hybrid(s):
    chart = _ds(s)
    tr = benchmark_run(s.ell, s_max=1.0)
    hc = dynamics.hybrid_geodesic_check(chart, tr)
    return max(hc.velocity_residual, hc.momentum_residual), {"max_connection_gap": _num(hc.max_hybrid_gap)}


def _hybrid_curve(s):
    chart = _ds(s)
    st = dynamics.CurveState(0.0, [0.0, 0.5, 0.0, 0.0], [1.0, 0.3, 0.1, 0.0])
    cfg = dynamics.IntegratorConfig(h=1e-3, s_max=1.0)
    g = dynamics.geodesic_integrate(chart, st, cfg, normalize=True)
    hy = dynamics.hybrid_integrate(chart, st, cfg, normalize=True)
    return float(np.max(np.abs(g.x - hy.x)))


def _hybrid_flat(s):
    chart = desitter.desitter_chart(1e6)
    st = dynamics.CurveState(0.0, [0.0, 0.5, 0.0, 0.0], [1.0, 0.2, 0.0, 0.0])
    tr = dynamics.geodesic_integrate(chart, st, dynamics.IntegratorConfig(h=1e-3, s_max=0.2), normalize=True)
    hc = dynamics.hybrid_geodesic_check(chart, tr)
    return max(hc.velocity_residual, hc.momentum_residual)


def _papapetrou(s):
    tr = benchmark_run(s.ell)
    r = dynamics.papapetrou_singlepole_check(_ds(s), tr)
    return r.m_drift, {"orthogonality": _num(r.m_drift_orthogonality), "geodesic_residual": _num(r.geodesic_residual)}


def _papapetrou_geodesic(s):
    return dynamics.papapetrou_singlepole_check(_ds(s), benchmark_run(s.ell)).geodesic_residual


def _papapetrou_coefficients(s):
    chart = _ds(s)
    st = dynamics.CurveState(0.0, [0.0, 0.5, 0.0, 0.0], [1.0, 0.3, 0.1, 0.0])
    tr = dynamics.geodesic_integrate(chart, st, dynamics.IntegratorConfig(h=1e-3, s_max=1.0), normalize=True)
    r = dynamics.papapetrou_singlepole_check(chart, tr)
    return r.coefficient_gap, {"reduced_equation_residual": _num(r.n_residual)}


def _schwarzschild_orbit(s):
    chart = charts.schwarzschild_chart(1.0)
    st, period = dynamics.schwarzschild_circular_state(1.0, 10.0)
    u = st.u.copy()
    u[3] *= 1.05  # eccentric orbit, so the radius actually varies
    u = dynamics.normalize_timelike(chart, st.x, u)
    tr = dynamics.geodesic_integrate(chart, dynamics.CurveState(0.0, st.x, u),
                                     dynamics.IntegratorConfig(h=period / 4000, s_max=period))
    r = dynamics.papapetrou_singlepole_check(chart, tr)
    return max(r.m_drift, tr.norm_drift()), {"period": _num(period), "radius_spread": _num(np.ptp(tr.x[:, 1])),
                                             "geodesic_residual": _num(r.geodesic_residual)}


def constrained_run(ell: float = 1.0, s_max: float = 1.0, h: float = 1e-3):
    return dynamics.constrained_curve_integrate(desitter.desitter_chart(ell), CONSTRAINED_STATE,
                                                dynamics.IntegratorConfig(h=h, s_max=s_max))


SEPARATION_FLOOR = 1e-8  # integrator tolerance used for the separation criterion


def _constrained_separation(s):
    tr = constrained_run(s.ell)
    sep = float(tr.separation[-1])
    # residual is the shortfall below 100× the integrator tolerance
    return max(0.0, 100.0 * SEPARATION_FLOOR - sep), {"separation_s1": _num(sep),
                                                      "max_condition": _num(tr.notes["max_condition"])}


def _constrained_flat(s):
    tr = constrained_run(1e6)
    return float(np.nanmax(tr.separation))


def _minkowski_line(s):
    chart = charts.minkowski_chart()
    st = dynamics.CurveState(0.0, [0.0, 1.0, 2.0, 3.0], [1.0, 0.0, 0.0, 0.0])
    tr = dynamics.geodesic_integrate(chart, st, dynamics.IntegratorConfig(h=1e-3, s_max=2.0))
    exact = st.x + np.outer(tr.s, st.u)
    return float(np.max(np.abs(tr.x - exact)))


def dynamics_checks() -> list[Check]:
    c = "dynamics"
    return [
        Check(c, "geodesic-norm-drift", "geodesic-equation", 1e-8, _bench_norm),
        Check(c, "geodesic-charge-drift", "geodesic-equation", 1e-8, _bench_charges),
        Check(c, "rk4-order-benchmark-step", "plumbing", 0.0, _order_literal, literal=True),
        Check(c, "rk4-order-asymptotic", "plumbing", 0.0, _order_asymptotic),
        Check(c, "time-reversal", "plumbing", 1e-7, _time_reversal),
        Check(c, "minkowski-straight-line", "plumbing", 1e-12, _minkowski_line),
        Check(c, "hybrid-form-residual", "hybrid-geodesic-form", 1e-6, _hybrid),
        Check(c, "hybrid-form-same-curve", "hybrid-geodesic-form", 1e-6, _hybrid_curve),
        Check(c, "hybrid-form-flat-limit", "hybrid-geodesic-form", 1e-8, _hybrid_flat),
        Check(c, "single-pole-mass-drift", "single-pole-reduction", 1e-8, _papapetrou),
        Check(c, "single-pole-geodesic", "single-pole-reduction", 1e-6, _papapetrou_geodesic),
        Check(c, "single-pole-coefficients", "desitter-single-pole", 1e-10, _papapetrou_coefficients),
        Check(c, "single-pole-schwarzschild-orbit", "single-pole-reduction", 1e-7, _schwarzschild_orbit),
        Check(c, "constrained-curve-separates", "constrained-variation-curve", 0.0, _constrained_separation),
        Check(c, "constrained-curve-flat-limit", "constrained-variation-curve", 1e-6, _constrained_flat),
    ]


SUITE_BUILDERS = {
    "clifford": clifford_checks,
    "geometry": geometry_checks,
    "desitter": desitter_checks,
    "komar": komar_checks,
    "algebra": algebra_checks,
    "dynamics": dynamics_checks,
}
