import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from desitter_lab import _fallback, clifford, kernels

BACKENDS = kernels.backends()


def test_backend_selected():
    assert kernels.BACKEND in ("compiled", "python")
    assert "python" in BACKENDS


def test_pure_env_forces_fallback():
    out = subprocess.run([sys.executable, "-c", "import desitter_lab; print(desitter_lab.BACKEND)"],
                         capture_output=True, text=True, env={"DESITTER_LAB_PURE": "1", "PATH": ""}, check=True)
    assert out.stdout.strip() == "python"


@pytest.mark.skipif("compiled" not in BACKENDS, reason="extension not built")
def test_backends_agree():
    rng = np.random.default_rng(0)
    signs, target = clifford._product_tables(4, (1, -1, -1, -1), "geometric")
    a, b = rng.normal(size=(7, 16)), rng.normal(size=(7, 16))
    comp = BACKENDS["compiled"]
    assert np.allclose(comp.blade_products(a, b, np.ascontiguousarray(signs), np.ascontiguousarray(target)),
                       _fallback.blade_products(a, b, signs, target), atol=1e-14)
    g = np.diag([1.0, -1.0, -1.0, -1.0]) + 0.05 * rng.normal(size=(5, 4, 4))
    g = 0.5 * (g + np.swapaxes(g, 1, 2))
    dg = rng.normal(size=(5, 4, 4, 4))
    dg = np.ascontiguousarray(0.5 * (dg + np.swapaxes(dg, 2, 3)))
    ginv = np.ascontiguousarray(np.linalg.inv(g))
    assert np.allclose(comp.christoffel(ginv, dg), _fallback.christoffel(ginv, dg), atol=1e-13)
    gam, u = rng.normal(size=(5, 4, 4, 4)), rng.normal(size=(5, 4))
    assert np.allclose(comp.geodesic_accel(gam, u), _fallback.geodesic_accel(gam, u), atol=1e-13)


def test_product_through_dispatch():
    sig = clifford.Signature.lorentzian(4)
    e0, e1 = clifford.Multivector.basis_vector(sig, 0), clifford.Multivector.basis_vector(sig, 1)
    assert (e0 * e1 + e1 * e0).norm_inf() == 0.0


def test_benchmark_runs():
    sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "benchmarks"))
    try:
        import bench_kernels
    finally:
        sys.path.pop(0)
    res = bench_kernels.run(n=64, repeat=1)
    for row in res["kernels"].values():
        for backend in res["backends"]:
            assert row[backend]["max_gap_vs_python"] < 1e-12
