"""Normal-form charts of lightlike manifolds."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from llcartan.charts import (
    a_z,
    az_equivariance_residual,
    cone_chart,
    flat_hyperplane_chart,
    flow_action,
    generic_check,
    lie_derivative_oracle,
    radical_check,
    reparametrize,
    rescaled_metric,
)
from llcartan.immersions import recurrent_conformal_immersion, translation
from llcartan.ambient import family_chart, warped_family, anisotropic_family


@pytest.fixture(params=[2, 3, 4])
def cone(request):
    return cone_chart(request.param)


class TestRadical:
    def test_cone_radical_is_z(self, cone):
        rng = np.random.default_rng(0)
        for y in cone.sample_points(10, rng):
            rep = radical_check(cone, y)
            assert rep.ok and rep.kernel_dim == 1

    def test_full_metric_kills_z(self, cone):
        y = cone.sample_points(1, np.random.default_rng(1))[0]
        np.testing.assert_array_equal(cone.full_metric(y)[:, 0], 0.0)

    def test_positivity(self, cone):
        assert cone.positivity_residual() > 0

    def test_outside_chart_rejected(self):
        ch = cone_chart(2)
        with pytest.raises(ValueError):
            ch.full_metric(np.array([5.0, 0.0, 0.0]))


class TestWeingarten:
    def test_cone_a_z_is_identity(self, cone):
        for y in cone.sample_points(5, np.random.default_rng(2)):
            np.testing.assert_allclose(a_z(cone, y), np.eye(cone.m), atol=1e-14)

    @pytest.mark.parametrize(
        "chart",
        [cone_chart(3, tau=2.0), family_chart(warped_family(3)), family_chart(anisotropic_family(3)),
         recurrent_conformal_immersion(2).chart],
        ids=["cone-tau2", "warped", "anisotropic", "recurrent"],
    )
    def test_a_z_against_lie_derivative(self, chart):
        for y in chart.sample_points(6, np.random.default_rng(3)):
            np.testing.assert_allclose(a_z(chart, y), lie_derivative_oracle(chart, y), atol=1e-9)

    def test_a_z_is_self_adjoint_for_h(self):
        chart = family_chart(anisotropic_family(3))
        y = chart.sample_points(1, np.random.default_rng(4))[0]
        HA = chart.spatial(y) @ a_z(chart, y)
        np.testing.assert_allclose(HA, HA.T, atol=1e-12)

    def test_hyperplane_a_z_vanishes(self):
        ch = flat_hyperplane_chart(3)
        assert np.abs(a_z(ch, np.zeros(4))).max() == 0.0

    def test_translation_equivariance(self):
        ch = flat_hyperplane_chart(2)
        f = translation(2, 0.3)
        assert az_equivariance_residual(ch, f.apply, f.jacobian, np.zeros(3)) == 0.0


class TestGeneric:
    def test_cone_is_generic(self):
        assert generic_check(cone_chart(3), 10, 0).generic

    def test_hyperplane_is_not(self):
        rep = generic_check(flat_hyperplane_chart(3), 10, 0)
        assert not rep.generic and rep.min_abs_det == 0.0

    def test_generic_needs_samples(self):
        with pytest.raises(ValueError):
            generic_check(cone_chart(2), 0, 0)

    def test_rescaled_metric_on_cone(self):
        # A_Z = Id on the cone, so the rescaled metric is h itself
        ch = cone_chart(2)
        y = np.array([0.2, 0.3, -0.1])
        u, v = np.array([0.0, 1.0, 0.5]), np.array([7.0, -0.2, 1.0])
        assert rescaled_metric(ch, y, u, v) == pytest.approx(u[1:] @ ch.spatial(y) @ v[1:])

    def test_rescaled_metric_ignores_radical(self):
        ch = cone_chart(2, tau=2.0)
        y = np.array([0.1, 0.3, -0.1])
        u = np.array([0.0, 1.0, 0.5])
        shifted = u + np.array([3.0, 0, 0])
        assert rescaled_metric(ch, y, u, u) == pytest.approx(rescaled_metric(ch, y, shifted, shifted))
        # A_Z = 2 Id, so lengths shrink by four
        assert rescaled_metric(ch, y, u, u) == pytest.approx(u[1:] @ ch.spatial(y) @ u[1:] / 4)

    def test_rescaled_metric_rejects_non_generic(self):
        with pytest.raises(ValueError):
            rescaled_metric(flat_hyperplane_chart(2), np.zeros(3), np.ones(3), np.ones(3))


class TestFlowAndReparametrization:
    @settings(max_examples=30)
    @given(st.floats(0.5, 2.0))
    def test_cone_flow_rescales_h(self, s):
        ch = cone_chart(2, t_range=(-2.0, 2.0))
        y = np.array([0.0, 0.3, -0.2])
        np.testing.assert_allclose(ch.spatial(flow_action(ch, y, s)), s**2 * ch.spatial(y), rtol=1e-12)

    def test_flow_validation(self):
        ch = cone_chart(2)
        with pytest.raises(ValueError):
            flow_action(ch, np.zeros(3), -1.0)
        with pytest.raises(ValueError):
            flow_action(ch, np.zeros(3), 100.0)

    def test_reparametrization_scales_a_z(self):
        # Z' = f Z on a chart with A_Z = Id gives A_{Z'} = f Id
        ch = cone_chart(2)

        def f(r):
            return 1.5 + 0.1 * r[0]

        new = reparametrize(ch, f)
        for y in new.sample_points(4, np.random.default_rng(5)):
            np.testing.assert_allclose(a_z(new, y), f(y[1:]) * np.eye(2), atol=1e-8)
