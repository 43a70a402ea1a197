"""Admissible frames, the pull-back Cartan connection and its invariants."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from llcartan.ambient import build_ambient_c, cone_family, embed_rho_zero
from llcartan.cartan import (
    AdmissibleFrame,
    FlatModelConnection,
    PullbackConnection,
    cartan_rank_test,
    expansion,
    extract_h_omega,
    extract_z_omega,
    flatness_diagnostics,
    frame_action,
    fundamental_field,
    h_omega_matrix,
    horizontal_preservation_check,
    kossowski_curvature,
    lift_frame,
    nabla_z_matrix,
    null_second_fundamental_form,
    omega_eval,
    omega_matrix,
    retract_frame,
    soldering_eval,
    standard_frame,
)
from llcartan.immersions import (
    light_cylinder_immersion,
    minkowski_cone_immersion,
    null_hyperplane_immersion,
    recurrent_conformal_immersion,
    shear,
    translation,
)
from llcartan.mobius import AlgebraElement, ad_full, random_h
from llcartan.mink import s_matrix


@pytest.fixture(scope="module")
def cone3():
    imm = minkowski_cone_immersion(3)
    return imm, PullbackConnection(imm)


def _h_part(rng, m):
    A = rng.normal(size=(m, m))
    return AlgebraElement(0.0, np.zeros(m), A - A.T, rng.normal(size=m))


class TestImmersions:
    @pytest.mark.parametrize(
        "imm",
        [minkowski_cone_immersion(2), minkowski_cone_immersion(3, tau=2.0), null_hyperplane_immersion(3),
         recurrent_conformal_immersion(2), light_cylinder_immersion()],
        ids=lambda i: i.name,
    )
    def test_isometric_and_future_pointing(self, imm):
        for y in imm.chart.sample_points(5, np.random.default_rng(0)):
            assert imm.isometry_residual(y) < 1e-12
            assert imm.orientation_ok(y)

    def test_numerical_jacobian_fallback(self):
        imm = minkowski_cone_immersion(2)
        y = np.array([0.1, 0.3, -0.5])
        bare = type(imm)(imm.ambient, imm.chart, imm.psi)
        np.testing.assert_allclose(bare.jacobian(y), imm.jacobian(y), atol=1e-10)


class TestFrames:
    def test_standard_frame_is_admissible(self, cone3):
        imm, _ = cone3
        y = imm.chart.sample_points(1, np.random.default_rng(1))[0]
        assert standard_frame(imm.chart, y).admissibility_residual(imm.chart) < 1e-13

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_right_action_keeps_admissibility(self, seed):
        rng = np.random.default_rng(seed)
        chart = minkowski_cone_immersion(2).chart
        y = chart.sample_points(1, rng)[0]
        b = frame_action(standard_frame(chart, y), random_h(rng, 2))
        assert b.admissibility_residual(chart) < 1e-12
        a, c = random_h(rng, 2), random_h(rng, 2)
        np.testing.assert_allclose(frame_action(frame_action(b, a), c).B, frame_action(b, a @ c).B, atol=1e-12)

    def test_retraction_fixes_admissible_frames(self, cone3):
        imm, _ = cone3
        b = frame_action(standard_frame(imm.chart, np.array([0.2, 0.1, 0.3, -0.4])), random_h(np.random.default_rng(2), 3))
        np.testing.assert_allclose(retract_frame(imm.chart, b.y, b.B).B[:, 0], b.B[:, 0])
        assert retract_frame(imm.chart, b.y, b.B + 1e-3).admissibility_residual(imm.chart) < 1e-12

    def test_frame_shape_validation(self):
        with pytest.raises(ValueError):
            AdmissibleFrame(np.zeros(3), np.eye(2))

    def test_lift_is_a_null_frame(self, cone3):
        imm, conn = cone3
        b = conn.frame(np.array([0.2, 0.1, 0.3, -0.4]), random_h(np.random.default_rng(3), 3))
        U = lift_frame(imm, b).matrix
        np.testing.assert_allclose(U.T @ imm.ambient.G(imm.point(b.y)) @ U, s_matrix(3), atol=1e-12)


class TestExtrinsic:
    def test_cone_expansion_scales_with_tau(self):
        for tau in (0.5, 1.0, 2.0):
            imm = minkowski_cone_immersion(2, tau=tau)
            y = np.array([0.1, 0.4, -0.3])
            assert expansion(imm, y) == pytest.approx(tau, abs=1e-9)
            N, res = nabla_z_matrix(imm, y)
            assert res < 1e-9
            np.testing.assert_allclose(N, tau * np.eye(3), atol=1e-9)

    def test_light_cylinder(self):
        imm = light_cylinder_immersion(R=2.0)
        y = np.array([0.5, 0.2, -0.1])
        assert expansion(imm, y) == pytest.approx(0.0, abs=1e-10)
        assert kossowski_curvature(imm, y, np.eye(3)[1:]) == pytest.approx(1 / 2.5**2, rel=1e-8)

    def test_second_form_ignores_radical(self, cone3):
        imm, _ = cone3
        y = np.array([0.0, 0.2, 0.3, -0.1])
        u, v = np.array([0.0, 1.0, 0.0, 0.5]), np.array([0.0, 0.3, 1.0, 0.0])
        z = np.eye(4)[0]
        b1 = null_second_fundamental_form(imm, y, u, v)
        b2 = null_second_fundamental_form(imm, y, u + 2 * z, v - z)
        assert b1 == pytest.approx(b2, abs=1e-10)
        assert null_second_fundamental_form(imm, y, z, v) == pytest.approx(0.0, abs=1e-10)

    def test_kossowski_rejects_radical_directions(self):
        imm = light_cylinder_immersion()
        with pytest.raises(ValueError):
            kossowski_curvature(imm, np.array([0.5, 0, 0]), np.array([[1.0, 0, 0], [2.0, 0, 0]]))


class TestPullbackConnection:
    def test_cone_is_cartan_and_recovers_data(self, cone3):
        imm, conn = cone3
        rng = np.random.default_rng(4)
        for y in imm.chart.sample_points(4, rng):
            b = conn.frame(y, random_h(rng, 3))
            v = cartan_rank_test(conn, b)
            assert v.is_cartan and v.consistent
            np.testing.assert_allclose(h_omega_matrix(conn, b), imm.chart.full_metric(y), atol=1e-8)
            np.testing.assert_allclose(extract_z_omega(conn, y, b), np.eye(4)[0], atol=1e-8)
            u, w = rng.normal(size=4), rng.normal(size=4)
            assert extract_h_omega(conn, y, u, w, b) == pytest.approx(u @ imm.chart.full_metric(y) @ w, abs=1e-8)

    def test_scaled_field_rescales_induced_data(self):
        imm = minkowski_cone_immersion(2, tau=2.0)
        conn = PullbackConnection(imm)
        y = np.array([0.1, 0.2, -0.3])
        b = conn.frame(y)
        np.testing.assert_allclose(h_omega_matrix(conn, b), 4 * imm.chart.full_metric(y), atol=1e-8)
        np.testing.assert_allclose(extract_z_omega(conn, y, b), [0.5, 0, 0], atol=1e-8)

    def test_reproduces_fundamental_fields(self, cone3):
        imm, conn = cone3
        rng = np.random.default_rng(5)
        b = conn.frame(np.array([0.3, 0.1, 0.2, 0.4]), random_h(rng, 3))
        Y = _h_part(rng, 3)
        val = conn.omega(b, np.zeros(4), fundamental_field(b, Y))
        assert (val - Y).norm() < 1e-8

    def test_equivariance(self, cone3):
        imm, conn = cone3
        rng = np.random.default_rng(6)
        b = conn.frame(np.array([0.3, 0.1, 0.2, 0.4]), random_h(rng, 3))
        v = rng.normal(size=4)
        smp = omega_eval(conn, b, v, _h_part(rng, 3))
        Bdot = conn.section_derivative(b, v) + fundamental_field(b, smp.Y)
        sg = random_h(rng, 3)
        lhs = conn.omega(frame_action(b, sg), v, Bdot @ sg.upper())
        assert (lhs - ad_full(sg.inverse(), smp.value)).norm() < 1e-7
        assert smp.closed_form_residual < 1e-8

    def test_omega_eval_rejects_vertical_outside_h(self, cone3):
        _, conn = cone3
        b = conn.frame(np.array([0.3, 0.1, 0.2, 0.4]))
        with pytest.raises(ValueError):
            omega_eval(conn, b, np.zeros(4), AlgebraElement(1.0, np.zeros(3), np.zeros((3, 3)), np.zeros(3)))

    def test_soldering_forms_agree_on_cone(self, cone3):
        imm, conn = cone3
        b = conn.frame(np.array([0.3, 0.1, 0.2, 0.4]), random_h(np.random.default_rng(7), 3))
        v = np.array([0.5, -1.0, 0.2, 0.3])
        assert soldering_eval(conn, b, v, conn.section_derivative(b, v)).residual < 1e-8

    def test_hyperplane_is_not_cartan(self):
        imm = null_hyperplane_immersion(2)
        conn = PullbackConnection(imm)
        v = cartan_rank_test(conn, conn.frame(np.zeros(3)))
        assert not v.is_cartan and v.consistent
        with pytest.raises(ValueError):
            extract_z_omega(conn, np.zeros(3))
        with pytest.raises(ValueError):
            extract_h_omega(conn, np.zeros(3), np.ones(3), np.ones(3))

    def test_omega_matrix_is_square(self, cone3):
        _, conn = cone3
        Om = omega_matrix(conn, conn.frame(np.array([0.0, 0.1, 0.1, 0.1])))
        assert Om.shape == (10, 10)


class TestFlatness:
    def test_model_cone_is_flat(self, cone3):
        _, conn = cone3
        rep = flatness_diagnostics(conn, 2, 0)
        assert rep.model_flat and rep.correspondence_flat
        assert rep.h_ratio_residual < 1e-7

    @pytest.mark.parametrize("c, flat", [(0.5, True), (1.0, False)])
    def test_ambient_cone_flat_only_for_ricci_flat_parameter(self, c, flat):
        conn = PullbackConnection(embed_rho_zero(build_ambient_c(cone_family(2), c)))
        rep = flatness_diagnostics(conn, 2, 1)
        assert rep.model_flat is flat
        assert rep.correspondence_flat
        assert rep.k_grading_max < 1e-6


class TestAutomorphisms:
    def test_translation_preserves_horizontal_fields(self):
        model = FlatModelConnection(null_hyperplane_immersion(2).chart)
        rep = horizontal_preservation_check(model, translation(2, 0.5), 3, 0)
        assert rep.max_residual < 1e-7 and rep.isometry_residual < 1e-12

    def test_shear_does_not(self):
        model = FlatModelConnection(null_hyperplane_immersion(2).chart)
        rep = horizontal_preservation_check(model, shear(2), 3, 0)
        assert rep.isometry_residual < 1e-12
        assert rep.max_residual > 1e-2

    def test_non_isometry_rejected(self):
        from llcartan.cartan import Diffeomorphism

        model = FlatModelConnection(null_hyperplane_immersion(2).chart)
        scale = Diffeomorphism(lambda y: 1.1 * np.asarray(y), lambda y: 1.1 * np.eye(3), "scale")
        with pytest.raises(ValueError):
            horizontal_preservation_check(model, scale, 2, 0)
