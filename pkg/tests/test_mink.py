"""Minkowski conventions, the null basis and the cone projection."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from llcartan.mink import (
    BasisKind,
    ConePoint,
    MinkBasisConvention,
    MinkVector,
    basis_change,
    canonical_metric,
    cone_embed,
    cone_metric,
    is_lightlike,
    mink_inner,
    null_basis_matrix,
    project_to_sphere,
    s_matrix,
    sphere_projection,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


class TestNullBasis:
    @pytest.mark.parametrize("m", [2, 3, 4, 7])
    def test_s_squared_is_identity(self, m):
        S = s_matrix(m)
        np.testing.assert_array_equal(S @ S, np.eye(m + 2))

    @pytest.mark.parametrize("m", [2, 3, 5])
    def test_gram_matrix_of_null_basis(self, m):
        C = null_basis_matrix(m)
        np.testing.assert_allclose(C.T @ canonical_metric(m) @ C, s_matrix(m), atol=1e-15)

    def test_l_and_n_explicit(self):
        C = null_basis_matrix(2)
        r = 1 / np.sqrt(2)
        np.testing.assert_allclose(C[:, 0], [r, 0, 0, r])
        np.testing.assert_allclose(C[:, -1], [-r, 0, 0, r])
        g = canonical_metric(2)
        assert C[:, 0] @ g @ C[:, -1] == pytest.approx(1.0)

    def test_flipped_transversal_has_wrong_sign(self):
        # the other sign choice for the transversal null vector pairs to -1
        r = 1 / np.sqrt(2)
        ell = np.array([r, 0, 0, r])
        eta_flipped = np.array([r, 0, 0, -r])
        assert ell @ canonical_metric(2) @ eta_flipped == pytest.approx(-1.0)

    def test_convention_rejects_small_m(self):
        with pytest.raises(ValueError):
            MinkBasisConvention(1)
        with pytest.raises(ValueError):
            MinkBasisConvention(2.5)


class TestVectors:
    def test_wrong_length(self):
        with pytest.raises(ValueError):
            MinkVector(np.zeros(3), MinkBasisConvention(2))

    def test_coords_are_read_only(self):
        v = MinkVector.canonical([1.0, 0, 0, 1.0])
        with pytest.raises(ValueError):
            v.coords[0] = 2.0

    def test_mixed_conventions_rejected(self):
        u = MinkVector.canonical([1.0, 0, 0, 0])
        v = MinkVector.sbasis([1.0, 0, 0, 0])
        with pytest.raises(ValueError):
            mink_inner(u, v)

    @given(arrays(float, 5, elements=finite), arrays(float, 5, elements=finite))
    def test_basis_change_preserves_inner_products(self, a, b):
        u, v = MinkVector.canonical(a), MinkVector.canonical(b)
        target = MinkBasisConvention(3, BasisKind.SBASIS)
        us, vs = basis_change(u, target), basis_change(v, target)
        assert mink_inner(us, vs) == pytest.approx(mink_inner(u, v), abs=1e-10)

    @given(arrays(float, 4, elements=finite))
    def test_basis_change_round_trip(self, a):
        u = MinkVector.sbasis(a)
        back = basis_change(basis_change(u, MinkBasisConvention(2)), MinkBasisConvention(2, BasisKind.SBASIS))
        np.testing.assert_allclose(back.coords, a, atol=1e-12)

    def test_basis_change_same_kind_rejected(self):
        with pytest.raises(ValueError):
            basis_change(MinkVector.canonical([1.0, 0, 0, 0]), MinkBasisConvention(2))

    def test_sbasis_first_vector_is_l(self):
        v = basis_change(MinkVector.sbasis([1.0, 0, 0, 0]), MinkBasisConvention(2))
        np.testing.assert_allclose(v.coords, np.array([1, 0, 0, 1]) / np.sqrt(2))

    def test_is_lightlike(self):
        g = canonical_metric(2)
        assert is_lightlike([1.0, 0.6, 0.8, 0.0], g)
        assert not is_lightlike([1.0, 0.0, 0.0, 0.0], g)


class TestCone:
    def test_cone_point_validation(self):
        ConePoint.from_coords([2.0, 0.0, 0.0, 2.0])
        with pytest.raises(ValueError):
            ConePoint.from_coords([-1.0, 0.0, 0.0, 1.0])
        with pytest.raises(ValueError):
            ConePoint.from_coords([1.0, 0.0, 0.0, 0.5])
        with pytest.raises(ValueError):
            ConePoint(MinkVector.sbasis([1.0, 0, 0, 0]))

    @settings(max_examples=50)
    @given(arrays(float, 3, elements=st.floats(-1, 1)).filter(lambda x: np.linalg.norm(x) > 0.1),
           st.floats(0.1, 10))
    def test_embed_then_project(self, x, s):
        x = x / np.linalg.norm(x)
        v = cone_embed(x, s)
        assert v.m == 2
        np.testing.assert_allclose(project_to_sphere(v), x, atol=1e-14)
        assert v.coords[0] == pytest.approx(s)

    def test_embed_rejects_bad_input(self):
        with pytest.raises(ValueError):
            cone_embed([1.0, 1.0, 0.0], 1.0)
        with pytest.raises(ValueError):
            cone_embed([1.0, 0.0, 0.0], 0.0)

    def test_projection_differential(self):
        # d pi_v(w) = (w' - w_0 x)/v_0, compared with central differences
        rng = np.random.default_rng(0)
        x = rng.normal(size=3)
        x /= np.linalg.norm(x)
        v = np.concatenate(([1.7], 1.7 * x))
        w = rng.normal(size=4)
        h = 1e-6
        fd = (sphere_projection(v + h * w) - sphere_projection(v - h * w)) / (2 * h)
        np.testing.assert_allclose(fd, (w[1:] - w[0] * x) / v[0], atol=1e-8)

    def test_projection_is_scale_invariant(self):
        v = np.array([2.0, 0.0, 1.2, 1.6])
        np.testing.assert_allclose(sphere_projection(3.5 * v), sphere_projection(v))

    def test_cone_metric_is_scaled_round_metric(self):
        # tangent vectors (0, s u) with u tangent to the sphere have length s^2 |u|^2
        x = np.array([0.0, 0.6, 0.8])
        s = 1.5
        v = cone_embed(x, s)
        u = np.array([0.0, 0.8, -0.6])
        w = MinkVector.canonical(np.concatenate(([0.0], s * u)))
        assert cone_metric(v, w, w) == pytest.approx(s**2)
        # the position vector spans the radical
        assert cone_metric(v, v.vector, w) == pytest.approx(0.0, abs=1e-14)

    def test_cone_metric_rejects_non_tangent(self):
        v = cone_embed([1.0, 0.0, 0.0], 1.0)
        w = MinkVector.canonical([1.0, 0.0, 0.0, 0.0])
        with pytest.raises(ValueError):
            cone_metric(v, w, w)
