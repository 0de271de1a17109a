"""Curve integration on charts with logged conservation diagnostics.

All integrators are fixed-step classical RK4, so runs are reproducible and
the residual tables do not depend on adaptive step control.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels
from .charts import DIM, Chart, DomainError
from .desitter import (
    BasisDegeneracyError,
    desitter_chart,
    hybrid_connection,
    killing_det,
    killing_translations,
    DEGENERACY_THRESHOLD,
)

COND_LIMIT = 1e8


class IntegrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class CurveState:
    s: float
    x: np.ndarray
    u: np.ndarray
    aux: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=np.float64).reshape(DIM))
        object.__setattr__(self, "u", np.asarray(self.u, dtype=np.float64).reshape(DIM))


@dataclass(frozen=True)
class IntegratorConfig:
    h: float = 1e-3
    s_max: float = 2.0
    log_every: int = 1
    method: str = "rk4"

    def __post_init__(self):
        if not self.h > 0 or not self.s_max > 0:
            raise ValueError("step and span must be positive")
        if self.log_every < 1:
            raise ValueError("log_every must be >= 1")
        if self.method != "rk4":
            raise ValueError("only fixed-step rk4 is provided")

    @property
    def n_steps(self) -> int:
        return int(round(self.s_max / self.h))


@dataclass
class Trajectory:
    kind: str
    s: np.ndarray
    x: np.ndarray
    u: np.ndarray
    norm: np.ndarray
    charges: np.ndarray | None = None
    aux: np.ndarray | None = None
    separation: np.ndarray | None = None
    exit_point: np.ndarray | None = None
    notes: dict = field(default_factory=dict)

    @property
    def completed(self) -> bool:
        return self.exit_point is None

    def norm_drift(self) -> float:
        return float(np.max(np.abs(self.norm - self.norm[0])))

    def charge_drift(self) -> np.ndarray:
        if self.charges is None:
            return np.zeros(DIM)
        return np.max(np.abs(self.charges - self.charges[0]), axis=0)

    def to_csv(self, path) -> None:
        cols = ["s", "x0", "x1", "x2", "x3", "u0", "u1", "u2", "u3", "norm",
                "C_0", "C_1", "C_2", "C_3", "separation"]
        n = len(self.s)
        charges = self.charges if self.charges is not None else np.full((n, DIM), np.nan)
        sep = self.separation if self.separation is not None else np.full(n, np.nan)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(cols)
            for i in range(n):
                row = [self.s[i], *self.x[i], *self.u[i], self.norm[i], *charges[i], sep[i]]
                w.writerow([repr(float(v)) for v in row])


def _is_desitter(chart: Chart) -> bool:
    return chart.name == "desitter-conformal"


def metric_norm(chart: Chart, x, u) -> np.ndarray:
    return np.einsum("...a,...ab,...b->...", u, chart.metric(x), u)


def normalize_timelike(chart: Chart, x, u) -> np.ndarray:
    n = float(metric_norm(chart, x, u))
    if not n > 0:
        raise ValueError("initial velocity is not timelike")
    return np.asarray(u, dtype=np.float64) / np.sqrt(n)


def geodesic_rhs(chart: Chart) -> Callable:
    def f(y):
        x, u = y[:DIM], y[DIM:]
        gamma = chart.christoffel(x)[None]
        return np.concatenate([u, kernels.geodesic_accel(gamma, u[None])[0]])

    return f


def _rk4(f: Callable, y0: np.ndarray, h: float, n: int, log_every: int, chart: Chart):
    """Fixed-step RK4 on y = (x, ...); stops at the last point inside the chart."""
    ys = [y0.copy()]
    ss = [0.0]
    y = y0.copy()
    exit_point = None
    for i in range(1, n + 1):
        try:
            k1 = f(y)
            k2 = f(y + 0.5 * h * k1)
            k3 = f(y + 0.5 * h * k2)
            k4 = f(y + h * k3)
            y_next = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            chart.check(y_next[:DIM])
        except (DomainError, BasisDegeneracyError):
            exit_point = y[:DIM].copy()
            if ss[-1] != (i - 1) * h:
                ys.append(y.copy())
                ss.append((i - 1) * h)
            break
        y = y_next
        if i % log_every == 0 or i == n:
            ys.append(y.copy())
            ss.append(i * h)
    return np.array(ss), np.array(ys), exit_point


def geodesic_integrate(chart: Chart, state0: CurveState, cfg: IntegratorConfig = IntegratorConfig(),
                       normalize: bool = False) -> Trajectory:
    """Integrate du^μ/ds = −Γ^μ_{νρ} u^ν u^ρ; logs g(u,u) and, on de Sitter, C_α = g(u, Π_α)."""
    chart.check(state0.x)
    u0 = normalize_timelike(chart, state0.x, state0.u) if normalize else state0.u
    y0 = np.concatenate([state0.x, u0])
    s, ys, exit_point = _rk4(geodesic_rhs(chart), y0, cfg.h, cfg.n_steps, cfg.log_every, chart)
    x, u = ys[:, :DIM], ys[:, DIM:]
    traj = Trajectory("geodesic", state0.s + s, x, u, metric_norm(chart, x, u), exit_point=exit_point)
    if _is_desitter(chart):
        ell = chart.params["ell"]
        traj.charges = np.einsum("na,nab,ncb->nc", u, chart.metric(x), killing_translations(ell, x))
    traj.notes["h"] = cfg.h
    return traj


# ---------------------------------------------------------------- hybrid form

def _frame_velocity(ell: float, x, u) -> np.ndarray:
    """U^α with u^μ = U^α ξ_α^μ."""
    xi = killing_translations(ell, x)
    return np.linalg.solve(np.swapaxes(xi, -1, -2), u[..., None])[..., 0]


def _fd4(values: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order central derivative along axis 0 (interior points only)."""
    return (-values[4:] + 8.0 * values[3:-1] - 8.0 * values[1:-3] + values[:-4]) / (12.0 * h)


@dataclass(frozen=True)
class HybridCheck:
    velocity_residual: float
    momentum_residual: float
    max_hybrid_gap: float  # max |𝚪 − Γ| along the path (they differ)


def hybrid_geodesic_check(chart: Chart, traj: Trajectory, m: float = 1.0) -> HybridCheck:
    """Residuals of dU^β/ds + u^μ U^α 𝚪^β_{μα} = 0 and of its lowered form along logged states.

    The lowered form uses π_ρ = m g(Π_ρ, Π_β) U^β = m g(u, Π_ρ).
    """
    if not _is_desitter(chart):
        raise ValueError("hybrid form needs the de Sitter chart")
    ell = chart.params["ell"]
    if np.any(metric_norm(chart, traj.x[:1], traj.u[:1]) <= 0):
        raise ValueError("velocity must be timelike")
    if len(traj.s) < 5:
        raise ValueError("trajectory too short for the derivative stencil")
    ds = float(traj.s[1] - traj.s[0])
    x, u = traj.x, traj.u
    if np.any(np.abs(killing_det(ell, x)) < DEGENERACY_THRESHOLD):
        raise BasisDegeneracyError("trajectory crosses the degenerate Killing set")
    U = _frame_velocity(ell, x, u)
    hyb = hybrid_connection(ell, x)  # [n, β, μ, α]
    res_u = _fd4(U, ds) + np.einsum("nm,na,nbma->nb", u, U, hyb)[2:-2]
    xi = killing_translations(ell, x)
    pi_low = m * np.einsum("nm,nmk,nrk->nr", u, chart.metric(x), xi)
    res_pi = _fd4(pi_low, ds) - np.einsum("nbmr,nm,nb->nr", hyb, u, pi_low)[2:-2]
    gamma = chart.christoffel(x)
    return HybridCheck(float(np.max(np.abs(res_u))), float(np.max(np.abs(res_pi))), float(np.max(np.abs(hyb - gamma))))


def hybrid_integrate(chart: Chart, state0: CurveState, cfg: IntegratorConfig = IntegratorConfig(),
                     normalize: bool = False) -> Trajectory:
    """Integrate the hybrid system dx/ds = U^α ξ_α, dU^β/ds = −u^μ U^α 𝚪^β_{μα} as its own ODE."""
    ell = chart.params["ell"]
    u0 = normalize_timelike(chart, state0.x, state0.u) if normalize else state0.u
    U0 = _frame_velocity(ell, state0.x, u0)

    def f(y):
        x, U = y[:DIM], y[DIM:]
        chart.check(x)
        u = U @ killing_translations(ell, x)
        return np.concatenate([u, -np.einsum("m,a,bma->b", u, U, hybrid_connection(ell, x))])

    y0 = np.concatenate([state0.x, U0])
    s, ys, exit_point = _rk4(f, y0, cfg.h, cfg.n_steps, cfg.log_every, chart)
    x = ys[:, :DIM]
    u = np.einsum("na,nam->nm", ys[:, DIM:], killing_translations(ell, x))
    traj = Trajectory("hybrid", state0.s + s, x, u, metric_norm(chart, x, u), aux=ys[:, DIM:], exit_point=exit_point)
    return traj


# ---------------------------------------------------------------- constrained variation

def velocity_from_pi(chart: Chart, x, pi) -> tuple[np.ndarray, float]:
    """Solve π_ρ = ξ_ρ^ν g_{νμ} u^μ for u; returns (u, condition number)."""
    ell = chart.params["ell"]
    a = killing_translations(ell, x) @ chart.metric(x)
    cond = float(np.linalg.cond(a))
    if cond > COND_LIMIT:
        raise IntegrationError(f"velocity reconstruction ill-conditioned (cond = {cond:.3e})")
    return np.linalg.solve(a, pi), cond


def constrained_rhs(chart: Chart) -> Callable:
    """dx/ds = u(π), dπ_ρ/ds = u^γ π_β Γ^β_{γρ}."""

    def f(y):
        x, pi = y[:DIM], y[DIM:]
        u, _ = velocity_from_pi(chart, x, pi)
        gamma = chart.christoffel(x)
        return np.concatenate([u, np.einsum("g,b,bgr->r", u, pi, gamma)])

    return f


def constrained_curve_integrate(chart: Chart, state0: CurveState, cfg: IntegratorConfig = IntegratorConfig(),
                                normalize: bool = True, m: float = 1.0) -> Trajectory:
    """Constrained-variation curve with π_ρ = m g(u, Π_ρ); separation from the geodesic is logged."""
    if not _is_desitter(chart):
        raise ValueError("constrained curve needs the de Sitter chart")
    ell = chart.params["ell"]
    chart.check(state0.x)
    u0 = normalize_timelike(chart, state0.x, state0.u) if normalize else state0.u
    if abs(float(killing_det(ell, state0.x))) < DEGENERACY_THRESHOLD:
        raise BasisDegeneracyError("degenerate Killing basis at the initial point")
    pi0 = m * np.einsum("m,mk,rk->r", u0, chart.metric(state0.x), killing_translations(ell, state0.x))
    y0 = np.concatenate([state0.x, pi0])
    s, ys, exit_point = _rk4(constrained_rhs(chart), y0, cfg.h, cfg.n_steps, cfg.log_every, chart)
    x, pi = ys[:, :DIM], ys[:, DIM:]
    us, conds = [], []
    for xi_, pi_ in zip(x, pi):
        u_, c_ = velocity_from_pi(chart, xi_, pi_)
        us.append(u_)
        conds.append(c_)
    u = np.array(us)
    traj = Trajectory("constrained", state0.s + s, x, u, metric_norm(chart, x, u), aux=pi, exit_point=exit_point)
    traj.charges = np.einsum("na,nab,ncb->nc", u, chart.metric(x), killing_translations(ell, x))
    traj.notes["max_condition"] = float(max(conds))
    geo = geodesic_integrate(chart, CurveState(state0.s, state0.x, u0), cfg)
    n = min(len(geo.s), len(s))
    traj.separation = np.full(len(s), np.nan)
    traj.separation[:n] = np.linalg.norm(x[:n] - geo.x[:n], axis=1)
    return traj


def rhs_gap(chart: Chart, x, u, m: float = 1.0) -> float:
    """Pointwise gap between dπ/ds of the geodesic (zero: charges conserved) and the constrained RHS."""
    ell = chart.params["ell"]
    pi = m * np.einsum("m,mk,rk->r", u, chart.metric(x), killing_translations(ell, x))
    return float(np.max(np.abs(np.einsum("g,b,bgr->r", u, pi, chart.christoffel(x)))))


# ---------------------------------------------------------------- single pole

@dataclass(frozen=True)
class SinglePoleCheck:
    m_drift: float  # max |dm/ds| from differencing m(s) = sqrt(g(p, p))
    m_drift_orthogonality: float  # max |u_μ D(m u^μ)/ds|
    geodesic_residual: float  # max |d(m u)/ds + Γ m u u|
    n_residual: float  # reduced equation for N^{μα} = m u^μ u^α with m = N^{00}/(u^0)^2
    coefficient_gap: float  # |−Γ N / m − (−Γ u u)| at logged points


def papapetrou_singlepole_check(chart: Chart, traj: Trajectory, m: float = 1.0) -> SinglePoleCheck:
    if len(traj.s) < 5:
        raise ValueError("trajectory too short")
    ds = float(traj.s[1] - traj.s[0])
    x, u = traj.x, traj.u
    g = chart.metric(x)
    gamma = chart.christoffel(x)
    p = m * u
    mass = np.sqrt(np.einsum("na,nab,nb->n", p, g, p))
    dmass = _fd4(mass, ds)
    dp = _fd4(p, ds)
    geo_force = np.einsum("nrab,na,nb->nr", gamma, p, u)
    cov = dp + geo_force[2:-2]
    ortho = np.einsum("na,nab,nb->n", u[2:-2], g[2:-2], cov)
    # single-pole tensor and its reduced equation
    N = mass[:, None, None] * np.einsum("na,nb->nab", u, u)
    m_n = N[:, 0, 0] / u[:, 0] ** 2
    lhs = _fd4(N[:, :, 0] / u[:, 0:1], ds) + np.einsum("nmva,nav->nm", gamma, N)[2:-2]
    rhs_n = -np.einsum("nmva,nav->nm", gamma, N) / m_n[:, None]
    rhs_geo = kernels.geodesic_accel(gamma, u)
    return SinglePoleCheck(
        float(np.max(np.abs(dmass))),
        float(np.max(np.abs(ortho))),
        float(np.max(np.abs(cov))),
        float(np.max(np.abs(lhs))),
        float(np.max(np.abs(rhs_n - rhs_geo))),
    )


def schwarzschild_circular_state(m: float, r: float) -> tuple[CurveState, float]:
    """Circular equatorial geodesic: u^t = 1/sqrt(1 − 3m/r), u^φ = sqrt(m/r³) u^t; returns (state, period in s)."""
    if r <= 3.0 * m:
        raise ValueError("no timelike circular orbit inside r = 3m")
    ut = 1.0 / np.sqrt(1.0 - 3.0 * m / r)
    omega = np.sqrt(m / r**3)
    state = CurveState(0.0, [0.0, r, np.pi / 2, 0.0], [ut, 0.0, 0.0, omega * ut])
    period_s = 2.0 * np.pi / (omega * ut)
    return state, period_s
