import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from desitter_lab import charts, checks, desitter
from desitter_lab.desitter import BasisDegeneracyError

ELL = 1.0
DS = desitter.desitter_chart(ELL)
interior_pt = st.tuples(*[st.floats(-0.7, 0.7) for _ in range(4)]).map(np.array)


@settings(max_examples=40, deadline=None)
@given(interior_pt, st.sampled_from([0.5, 1.0, 3.0]))
def test_embedding_on_hyperboloid(x, ell):
    x = x * ell
    assert desitter.embed(ell, x).constraint_residual() < 1e-10 * max(1.0, ell**2)
    g = desitter.pullback_metric(ell, x)
    assert np.max(np.abs(g - desitter.desitter_chart(ell).metric(x))) < 1e-10


def test_embedding_jacobian_matches_finite_difference():
    x = np.array([0.3, -0.2, 0.1, 0.4])
    gap = desitter.embed_jacobian(2.0, x) - desitter.embed_jacobian_fd(2.0, x)
    assert np.max(np.abs(gap)) < 1e-8


@settings(max_examples=40, deadline=None)
@given(st.tuples(*[st.floats(-3.0, 3.0) for _ in range(4)]).map(np.array), st.sampled_from([0.5, 1.0, 2.0]))
def test_killing_det_rank_one_closed_form(x, ell):
    num = desitter.killing_det_numeric(ell, x)
    assert abs(num - desitter.killing_det(ell, x)) < 1e-10 * max(1.0, abs(num))


def test_det_closed_form_on_grid():
    T, X, num = checks.det_grid(1.0)
    assert T.shape == (121, 121)
    assert np.max(np.abs(num - desitter.killing_det_reduced_derived(1.0, T, X))) < 1e-12


def test_listed_reduction_is_det_of_listed_matrix():
    T, X, _ = checks.det_grid(1.0)
    pts = np.stack([T, X, np.zeros_like(T), np.zeros_like(T)], axis=-1)
    listed = np.linalg.det(desitter.literal_component_matrix(pts))
    assert np.max(np.abs(listed - desitter.killing_det_reduced(1.0, T, X))) < 1e-9


def test_listed_reduction_differs_from_numeric_det():
    T, X, num = checks.det_grid(1.0)
    assert np.max(np.abs(num - desitter.killing_det_reduced(1.0, T, X))) > 1.0


def test_det_zero_loci():
    loci, spread = checks.det_zero_loci(1.0)
    assert len(loci) == 2
    assert abs(loci[0] + 4.0) < 1e-10 and abs(loci[1] - 4.0) < 1e-10
    assert max(spread) < 1e-10


def test_det_vanishes_on_absolute():
    assert abs(desitter.killing_det_numeric(1.0, np.array([2.0, 0.0, 0.0, 0.0]))) < 1e-12


def test_reduced_form_rejects_other_ell():
    with pytest.raises(ValueError):
        desitter.killing_det_reduced(2.0, 0.0, 0.0)


def test_rotation_fields_match_generators():
    x = np.array([0.2, 0.3, -0.1, 0.5])
    J = desitter.killing_rotations(1.0, x)
    assert np.allclose(J, -np.swapaxes(J, 0, 1))
    xl = desitter.lower(x)
    assert np.allclose(J[0, 1], xl[0] * np.eye(4)[1] - xl[1] * np.eye(4)[0])


def test_hybrid_connection_reproduces_frame_derivatives():
    pts = np.random.default_rng(2).uniform(-0.5, 0.5, (5, 4))
    hyb = desitter.hybrid_connection(1.0, pts)
    xi = desitter.killing_translations(1.0, pts)
    lhs = desitter.covariant_killing_derivative(1.0, pts)
    assert np.max(np.abs(lhs - np.einsum("nbma,nbv->nmav", hyb, xi))) < 1e-12


def test_hybrid_connection_differs_from_christoffel():
    x = np.array([[0.3, 0.1, 0.0, 0.2]])
    assert np.max(np.abs(desitter.hybrid_connection(1.0, x) - DS.christoffel(x))) > 1e-3


def test_hybrid_connection_degenerate_basis():
    with pytest.raises(BasisDegeneracyError):
        desitter.hybrid_connection(1.0, np.array([[0.0, 2.0, 0.0, 0.0]]))


@pytest.mark.parametrize("mode", desitter.TETRAD_MODES)
def test_tetrad_modes(mode):
    tet = desitter.tetrad_from_killing(1.0, np.array([0.1, 0.2, 0.0, -0.1]), mode)
    if mode == "orthonormal":
        assert tet.orthonormality_defect() < 1e-12
    assert tet.vectors.shape == (4, 4)


def test_unknown_tetrad_mode():
    with pytest.raises(ValueError):
        desitter.tetrad_vectors(1.0, np.zeros(4), "bogus")


def test_levi_civita_equals_minus_contorsion_for_orthonormal_frame():
    for x in np.random.default_rng(4).uniform(-0.5, 0.5, (5, 4)):
        assert desitter.teleparallel_torsion_contorsion(1.0, x, "orthonormal").rel_residual < 1e-8


def test_relation_fails_for_non_orthonormal_frame():
    x = np.array([0.3, 0.1, -0.2, 0.1])
    assert desitter.teleparallel_torsion_contorsion(1.0, x, "listed").rel_residual > 1e-3


def test_torsion_antisymmetric():
    d = desitter.teleparallel_torsion_contorsion(1.0, np.array([0.2, 0.1, 0.0, -0.3]), "orthonormal")
    assert np.max(np.abs(d.torsion + np.swapaxes(d.torsion, 1, 2))) < 1e-12


def _theta():
    return desitter.assemble_theta(desitter.killing_current_fields(DS, charts.einstein_tensor_field(DS)), "orthonormal")


def test_theta_divergence_label_reading():
    th = _theta()
    for x in np.random.default_rng(6).uniform(-0.4, 0.4, (3, 4)):
        terms = desitter.teleparallel_divergence_terms(th, x)
        assert terms.residual_label < 1e-6
        assert np.max(np.abs(terms.levi_civita_divergence)) < 1e-6


def test_theta_divergence_literal_reading_fails():
    th = _theta()
    assert desitter.teleparallel_divergence_terms(th, np.array([0.3, 0.2, -0.1, 0.1])).residual > 1e-3


def test_theta_dual_forms():
    th = _theta()
    a, b = desitter.dual_form_residuals(th, np.array([0.1, -0.2, 0.3, 0.0]))
    assert a < 1e-6 and b < 1e-6


def test_assemble_theta_needs_four_currents():
    with pytest.raises(ValueError):
        desitter.assemble_theta(desitter.killing_current_fields(DS, charts.einstein_tensor_field(DS))[:3])


def test_covector_assemble():
    rec = desitter.covector_assemble([1.0, 2.0, 3.0, 4.0])
    assert rec.as_dict() == {"components": [1.0, 2.0, 3.0, 4.0], "basis": ["E^0", "E^1", "E^2", "E^3"]}


def test_bad_ell():
    with pytest.raises(ValueError):
        desitter.desitter_chart(0.0)
