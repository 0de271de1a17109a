import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from desitter_lab import charts, desitter
from desitter_lab.charts import DomainError

DS = desitter.desitter_chart(1.0)
point = st.tuples(*[st.floats(-0.6, 0.6) for _ in range(4)]).map(np.array)


def test_registry():
    assert set(charts.CHART_NAMES) == {"minkowski", "desitter-conformal", "schwarzschild"}
    for name in charts.CHART_NAMES:
        assert charts.make_chart(name).name == name
    with pytest.raises(KeyError):
        charts.make_chart("kerr")


def test_minkowski_is_flat():
    chart = charts.minkowski_chart()
    x = np.array([[0.3, 1.0, -2.0, 0.5]])
    assert np.all(chart.christoffel(x) == 0.0)
    _, ricci, scal = charts.curvature_batch(chart, x)
    assert np.max(np.abs(ricci)) == 0.0 and abs(scal[0]) == 0.0


@settings(max_examples=25, deadline=None)
@given(point)
def test_desitter_scalar_curvature(x):
    _, _, scal = charts.curvature_batch(DS, x[None])
    assert abs(scal[0] - 12.0) < 1e-6


@pytest.mark.parametrize("ell", [0.5, 2.0, 7.0])
def test_scalar_curvature_scales(ell):
    chart = desitter.desitter_chart(ell)
    pts = np.random.default_rng(0).uniform(-0.5 * ell, 0.5 * ell, (10, 4))
    _, _, scal = charts.curvature_batch(chart, pts)
    assert np.max(np.abs(scal * ell**2 - 12.0)) < 1e-6


def test_analytic_partials_match_finite_differences():
    x = np.array([[0.1, 0.2, -0.3, 0.4]])
    fd = DS.without_analytic()
    assert np.max(np.abs(DS.metric_partials(x) - fd.metric_partials(x))) < 1e-8
    assert np.max(np.abs(DS.christoffel(x) - fd.christoffel(x))) < 1e-8


def test_schwarzschild_vacuum_and_domain():
    chart = charts.schwarzschild_chart(1.0)
    _, ricci, _ = charts.curvature_batch(chart, np.array([[0.0, 5.0, 1.0, 0.3]]))
    assert np.max(np.abs(ricci)) < 1e-8
    with pytest.raises(DomainError):
        chart.metric(np.array([0.0, 1.5, 1.0, 0.0]))


def test_desitter_domain_excludes_absolute():
    with pytest.raises(DomainError):
        DS.metric(np.array([2.0, 0.0, 0.0, 0.0]))
    interior = desitter.desitter_chart(1.0, interior=True)
    with pytest.raises(DomainError):
        interior.metric(np.array([3.0, 0.0, 0.0, 0.0]))
    assert DS.metric(np.array([3.0, 0.0, 0.0, 0.0])).shape == (4, 4)


def test_einstein_tensor_divergence_free():
    pts = np.random.default_rng(1).uniform(-0.5, 0.5, (5, 4))
    div = charts.divergence_mixed_coeffs(charts.einstein_tensor_field(DS), DS, pts)
    assert np.max(np.abs(div)) < 1e-6


def test_einstein_tensor_is_cosmological():
    x = np.array([0.1, 0.3, -0.2, 0.0])
    G = charts.einstein_tensor_field(DS)(x)
    assert np.max(np.abs(G + 3.0 * np.eye(4))) < 1e-8


def test_all_ten_killing_fields():
    fields = desitter.all_killing_fields(DS)
    assert len(fields) == 10
    x = np.array([0.2, -0.1, 0.3, 0.1])
    for f in fields.values():
        assert charts.killing_residual(f, DS, x) < 1e-8


def test_non_killing_field_detected():
    V = charts.VectorField(DS, lambda x: np.stack([x[..., 1], np.zeros_like(x[..., 0]), x[..., 0] ** 2, x[..., 3]], -1))
    assert charts.killing_residual(V, DS, np.array([0.1, 0.2, 0.3, 0.1])) > 1e-3


def _poly_form(chart, grade):
    n = {1: 4, 2: 6}[grade]
    return charts.FormField.from_components(
        chart, grade, lambda x: np.stack([np.sin(x[..., k % 4] * (k + 1)) + x[..., (k + 1) % 4] ** 2 for k in range(n)], -1))


def test_d_squared_and_delta_squared_vanish():
    x = np.array([[0.1, 0.2, 0.05, -0.1]])
    A = _poly_form(DS, 1)
    assert np.max(np.abs(charts.d_coeffs(charts.d_field(A, DS.h2), x, DS.h2))) < 1e-5
    F = _poly_form(DS, 2)
    assert np.max(np.abs(charts.delta_coeffs(charts.delta_field(F), x, DS.h2))) < 1e-5


def test_codifferential_two_routes_agree():
    x = np.array([[0.1, 0.2, 0.05, -0.1], [0.0, -0.3, 0.2, 0.1]])
    F = _poly_form(DS, 2)
    assert np.max(np.abs(charts.delta_coeffs(F, x) - charts.delta_contraction_coeffs(F, x))) < 1e-6


def test_dirac_square_splits():
    from desitter_lab import komar

    A = _poly_form(DS, 1)
    assert komar.weitzenbock_residual(A, np.array([0.1, 0.2, 0.05, -0.1])) < 1e-5


def test_ricci_operator_on_basis_covectors():
    x = np.array([0.1, 0.0, 0.2, -0.1])
    mixed = charts.geometry_at(DS, x).ricci_mixed()
    for mu in range(4):
        full = charts.ricci_operator_apply(DS, mu, x, keep_all_grades=True)
        assert np.max(np.abs(full.coeffs[[1, 2, 4, 8]] - mixed[mu])) < 1e-6
        assert full.grade(3).norm_inf() < 1e-6


def test_divergence_relation_on_random_fields():
    rng = np.random.default_rng(5)
    cv, v0 = rng.normal(size=(4, 4)) * 0.3, rng.normal(size=4)
    V = charts.VectorField(DS, lambda x: v0 + np.sin(x @ cv.T))

    def w(x):
        low = np.einsum("...k,kab->...ab", np.cos(x), rng_w)
        low = 0.5 * (low + np.swapaxes(low, -1, -2))
        return np.einsum("...ak,...kb->...ab", DS.metric_inverse(x), low)

    rng_w = rng.normal(size=(4, 4, 4))
    W = charts.MixedTensorField(DS, w, symmetric=True)
    assert charts.divergence_relation_check(V, W, np.array([0.1, 0.2, -0.1, 0.0])) < 1e-5


def test_killing_current_conserved():
    G = charts.einstein_tensor_field(DS)
    x = np.array([[0.2, 0.1, -0.1, 0.3]])
    for a in range(4):
        J = charts.current_field(desitter.translation_field(DS, a), G)
        assert abs(charts.delta_coeffs(J, x, DS.h2)[0, 0]) < 1e-6


def test_bad_points_rejected():
    with pytest.raises(ValueError):
        DS.metric(np.zeros(3))
