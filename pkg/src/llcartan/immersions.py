"""Ready-made lightlike hypersurfaces of Lorentzian charts and maps between them."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .cartan import Diffeomorphism, LightlikeImmersion
from .charts import LightlikeChart, cone_chart, flat_hyperplane_chart
from .fields import MetricField
from .lorentz import LorentzChart, minkowski_chart
from .mink import canonical_metric
from .spheres import (
    POLAR_CAP,
    round_metric,
    round_metric_partials,
    round_metric_second_partials,
    sample_stereo,
    stereo_jacobian,
    stereo_to_sphere,
)

__all__ = [
    "minkowski_cone_immersion",
    "null_hyperplane_immersion",
    "conformal_minkowski_chart",
    "recurrent_conformal_immersion",
    "recurrent_conformal_factor",
    "light_cylinder_immersion",
    "translation",
    "shear",
]


def minkowski_cone_immersion(m: int, tau: float = 1.0, t_range=(-1.0, 1.0)) -> LightlikeImmersion:
    """The future cone ``(t, x) -> e^{tau t} (1, p(x))`` in canonical coordinates.

    ``Z = d/dt`` is ``tau`` times the position vector field, so the expansion
    is ``tau``.
    """
    chart = cone_chart(m, t_range, tau)

    def psi(y):
        return np.exp(tau * y[0]) * np.concatenate(([1.0], stereo_to_sphere(y[1:])))

    def jac(y):
        J = np.zeros((m + 2, m + 1))
        J[:, 0] = tau * psi(y)
        J[1:, 1:] = np.exp(tau * y[0]) * stereo_jacobian(y[1:])
        return J

    return LightlikeImmersion(minkowski_chart(m), chart, psi, jac, name=f"cone-tau{tau:g}")


def null_hyperplane_immersion(m: int, box: float = 2.0) -> LightlikeImmersion:
    """``(y_0, y_1, ..., y_m) -> (y_0, y_1, ..., y_m, y_0)``: the null hyperplane."""
    chart = flat_hyperplane_chart(m, box)

    def psi(y):
        return np.concatenate((y, [y[0]]))

    def jac(y):
        J = np.zeros((m + 2, m + 1))
        J[: m + 1] = np.eye(m + 1)
        J[m + 1, 0] = 1.0
        return J

    return LightlikeImmersion(minkowski_chart(m), chart, psi, jac, name="null-hyperplane")


def conformal_minkowski_chart(
    m: int,
    f: Callable[[np.ndarray], float],
    df: Callable[[np.ndarray], np.ndarray],
    d2f: Callable[[np.ndarray], np.ndarray],
) -> LorentzChart:
    """``e^{2 f} (-dx_0^2 + sum dx_i^2)`` with analytic partials, oriented by ``d/dx_0``."""
    eta = canonical_metric(m)
    n = m + 2

    def G(x):
        return np.exp(2 * f(x)) * eta

    def dG(x):
        return 2 * df(x)[:, None, None] * G(x)[None]

    def d2G(x):
        g = df(x)
        return (4 * np.outer(g, g) + 2 * d2f(x))[:, :, None, None] * G(x)[None, None]

    e0 = np.eye(n)[0]
    return LorentzChart(MetricField(G, dG, d2G), n, lambda x: e0, name="conformal-minkowski")


def recurrent_conformal_factor(m: int, a: float = 0.2, b: float = 0.1) -> tuple:
    """``f(x) = a (x_0 + x_{m+1}) + b sin(x_1)`` and its first two derivatives."""
    n = m + 2

    def f(x):
        return a * (x[0] + x[-1]) + b * np.sin(x[1])

    def df(x):
        out = np.zeros(n)
        out[0] = out[-1] = a
        out[1] = b * np.cos(x[1])
        return out

    def d2f(x):
        out = np.zeros((n, n))
        out[1, 1] = -b * np.sin(x[1])
        return out

    return f, df, d2f


def recurrent_conformal_immersion(
    m: int, a: float = 0.2, b: float = 0.1, t_range=(-1.0, 0.5), box: float = 2.0
) -> LightlikeImmersion:
    """``(t, r) -> (e^t, r, e^t)`` in Minkowski space rescaled by ``e^{2f}``.

    The image lies in the null hyperplane ruled by the parallel null field
    ``K = (1, 0, ..., 0, 1)``; ``Z = e^t K`` is recurrent for the flat metric.
    Conformally, ``lambda = 1 + 2 Z(f)`` and ``B_Z = Z(f) h`` with
    ``Z(f) = 2 a e^t``.
    """
    f, df, d2f = recurrent_conformal_factor(m, a, b)
    ambient = conformal_minkowski_chart(m, f, df, d2f)

    def psi(y):
        e = np.exp(y[0])
        return np.concatenate(([e], y[1:], [e]))

    def jac(y):
        e = np.exp(y[0])
        J = np.zeros((m + 2, m + 1))
        J[0, 0] = J[-1, 0] = e
        J[1:-1, 1:] = np.eye(m)
        return J

    def H(y):
        return np.exp(2 * f(psi(y))) * np.eye(m)

    def dH(y):
        # chain rule through psi
        return np.einsum("a,ak->k", df(psi(y)), jac(y))[:, None, None] * 2 * H(y)[None]

    lower = np.concatenate(([t_range[0]], -box * np.ones(m)))
    upper = np.concatenate(([t_range[1]], box * np.ones(m)))
    chart = LightlikeChart(m, MetricField(H, dH), lower, upper, name="recurrent-conformal")
    return LightlikeImmersion(ambient, chart, psi, jac, name="recurrent-conformal")


def light_cylinder_immersion(R: float = 1.0, u_range=(0.0, 1.0)) -> LightlikeImmersion:
    """The light-like hypersurface over the round sphere of radius ``R`` in
    ``L^4``: ``(u, x) -> (u, (R + u) p(x))``, with ``Z = d/du`` geodesic.

    ``h = (R + u)^2 g_round`` and ``nabla_v Z = v / (R + u)``, so the curvature
    ``det B_Z / det h`` equals ``1 / (R + u)^2`` while the expansion vanishes.
    """
    m = 2

    def H(y):
        return (R + y[0]) ** 2 * round_metric(y[1:])

    def dH(y):
        out = np.empty((3, 2, 2))
        out[0] = 2 * (R + y[0]) * round_metric(y[1:])
        out[1:] = (R + y[0]) ** 2 * round_metric_partials(y[1:])
        return out

    def d2H(y):
        out = np.empty((3, 3, 2, 2))
        out[0, 0] = 2 * round_metric(y[1:])
        p = 2 * (R + y[0]) * round_metric_partials(y[1:])
        out[0, 1:] = p
        out[1:, 0] = p
        out[1:, 1:] = (R + y[0]) ** 2 * round_metric_second_partials(y[1:])
        return out

    bound = 1.0 / np.tan(POLAR_CAP / 2)
    lower = np.array([u_range[0], -bound, -bound])
    upper = np.array([u_range[1], bound, bound])

    def sampler(rng, n):
        return np.column_stack((rng.uniform(*u_range, size=n), sample_stereo(rng, m, n)))

    chart = LightlikeChart(m, MetricField(H, dH, d2H), lower, upper, name="light-cylinder", sampler=sampler)

    def psi(y):
        return np.concatenate(([y[0]], (R + y[0]) * stereo_to_sphere(y[1:])))

    def jac(y):
        J = np.zeros((4, 3))
        J[0, 0] = 1.0
        J[1:, 0] = stereo_to_sphere(y[1:])
        J[1:, 1:] = (R + y[0]) * stereo_jacobian(y[1:])
        return J

    return LightlikeImmersion(minkowski_chart(m), chart, psi, jac, name="light-cylinder")


def translation(m: int, c: float) -> Diffeomorphism:
    """``y_0 -> y_0 + c``."""
    e0 = np.eye(m + 1)[0]
    return Diffeomorphism(lambda y: np.asarray(y, dtype=float) + c * e0, lambda y: np.eye(m + 1), f"shift{c:g}")


def shear(m: int, k: float = 1.0) -> Diffeomorphism:
    """``y_0 -> y_0 + k y_1``; preserves ``h = 0 + g_{R^m}`` and ``Z = d/dy_0``."""
    D = np.eye(m + 1)
    D[0, 1] = k

    def apply(y):
        y = np.array(y, dtype=float)
        y[0] += k * y[1]
        return y

    return Diffeomorphism(apply, lambda y: D, f"shear{k:g}")
