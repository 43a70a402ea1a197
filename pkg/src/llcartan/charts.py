"""Lightlike manifolds ``(N, h, Z)`` in normal-form charts.

A chart has coordinates ``y = (s, r_1, ..., r_m)`` with ``Z = d/ds`` and
``h = sum h_ij(s, r) dr_i dr_j``; the radical of ``h`` is spanned by ``Z``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.stats import qmc

from .fields import MetricField
from .spheres import (
    round_metric,
    round_metric_partials,
    round_metric_second_partials,
    sample_stereo,
)

__all__ = [
    "LightlikeChart",
    "RadicalReport",
    "GenericReport",
    "GENERIC_THRESHOLD",
    "radical_check",
    "a_z",
    "lie_derivative_oracle",
    "generic_check",
    "rescaled_metric",
    "flow_action",
    "reparametrize",
    "az_equivariance_residual",
    "cone_chart",
    "flat_hyperplane_chart",
]

GENERIC_THRESHOLD = 1e-8


@dataclass
class LightlikeChart:
    """Normal-form chart of a lightlike manifold.

    ``H`` maps ``y = (s, r)`` to the ``m x m`` matrix ``h_ij``.  ``lower`` and
    ``upper`` bound the coordinate box.  ``sampler(rng, n)`` may override the
    default quasi-random sampling of the box.
    """

    m: int
    H: MetricField
    lower: np.ndarray
    upper: np.ndarray
    name: str = ""
    sampler: Optional[Callable[[np.random.Generator, int], np.ndarray]] = field(
        default=None, repr=False
    )

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("lightlike charts need m >= 2")
        self.lower = np.asarray(self.lower, dtype=float).reshape(self.m + 1)
        self.upper = np.asarray(self.upper, dtype=float).reshape(self.m + 1)
        if np.any(self.lower >= self.upper):
            raise ValueError("empty coordinate box")

    @property
    def dim(self) -> int:
        return self.m + 1

    def contains(self, y) -> bool:
        y = np.asarray(y, dtype=float)
        return bool(np.all(y >= self.lower) and np.all(y <= self.upper))

    def _require(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.shape != (self.m + 1,):
            raise ValueError(f"expected a point with {self.m + 1} coordinates")
        if not self.contains(y):
            raise ValueError(f"point {y} outside the chart domain")
        return y

    def spatial(self, y) -> np.ndarray:
        return self.H(self._require(y))

    def full_metric(self, y) -> np.ndarray:
        """``(m+1) x (m+1)`` matrix of ``h``; row and column 0 vanish."""
        g = np.zeros((self.m + 1, self.m + 1))
        g[1:, 1:] = self.spatial(y)
        return g

    def ds_metric(self, y) -> np.ndarray:
        """``d_s h_ij`` at ``y``."""
        return self.H.d1(self._require(y))[0]

    def full_metric_partials(self, y) -> np.ndarray:
        """``P[k, a, b]`` partials of the full ``(m+1)x(m+1)`` metric."""
        d = self.H.d1(self._require(y))
        out = np.zeros((self.m + 1, self.m + 1, self.m + 1))
        out[:, 1:, 1:] = d
        return out

    def sample_points(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.sampler is not None:
            return np.asarray(self.sampler(rng, n), dtype=float)
        seed = int(rng.integers(0, 2**31 - 1))
        pts = qmc.Halton(d=self.m + 1, scramble=True, seed=seed).random(n)
        return qmc.scale(pts, self.lower, self.upper)

    def positivity_residual(self, n: int = 16, seed: int = 0) -> float:
        """Smallest eigenvalue of ``H`` over sampled points (positive when valid)."""
        rng = np.random.default_rng(seed)
        return float(min(np.linalg.eigvalsh(self.H(y)).min() for y in self.sample_points(n, rng)))


@dataclass(frozen=True)
class RadicalReport:
    ok: bool
    kernel_dim: int
    residual: float
    singular_values: np.ndarray


def radical_check(chart: LightlikeChart, y, tol: float = 1e-10) -> RadicalReport:
    """Check that the radical of ``h`` at ``y`` is exactly the line of ``d/ds``."""
    g = chart.full_metric(y)
    sv = np.linalg.svd(g, compute_uv=False)
    scale = max(1.0, float(sv.max()))
    kdim = int(np.sum(sv <= tol * scale))
    residual = float(np.abs(g[:, 0]).max())
    return RadicalReport(kdim == 1 and residual <= tol * scale, kdim, residual, sv)


def a_z(chart: LightlikeChart, y) -> np.ndarray:
    """Matrix of ``A_Z`` on ``E = TN/Rad``: ``(1/2) H^{-1} d_s H``."""
    H = chart.spatial(y)
    return 0.5 * np.linalg.solve(H, chart.ds_metric(y))


def lie_derivative_oracle(chart: LightlikeChart, y, step: float = 1e-4) -> np.ndarray:
    """``(1/2) H^{-1} (L_Z h)`` with the Lie derivative computed by pulling
    ``h`` back along the flow of ``Z`` and differencing in the flow time."""
    y = np.asarray(y, dtype=float)
    e0 = np.eye(chart.m + 1)[0]

    def pulled(t):
        # the flow of d/ds is a translation, so its differential is the identity
        return chart.H(y + t * e0)

    d1 = (pulled(step) - pulled(-step)) / (2 * step)
    d2 = (pulled(step / 2) - pulled(-step / 2)) / step
    lie = (4 * d2 - d1) / 3
    return 0.5 * np.linalg.solve(chart.H(y), lie)


@dataclass(frozen=True)
class GenericReport:
    generic: bool
    min_abs_det: float
    threshold: float
    samples: int


def generic_check(
    chart: LightlikeChart, samples: int, seed: int, threshold: float = GENERIC_THRESHOLD
) -> GenericReport:
    """``det(d_s H)`` bounded away from zero at every sampled point."""
    if samples < 1:
        raise ValueError("samples must be positive")
    rng = np.random.default_rng(seed)
    dets = [abs(np.linalg.det(chart.ds_metric(y))) for y in chart.sample_points(samples, rng)]
    mind = float(min(dets))
    return GenericReport(mind >= threshold, mind, threshold, samples)


def rescaled_metric(chart: LightlikeChart, y, u, v, tol: float = 1e-10) -> float:
    """``h(A_Z^{-1} u, A_Z^{-1} v)`` evaluated on classes modulo the radical."""
    A = a_z(chart, y)
    sv = np.linalg.svd(A, compute_uv=False)
    if sv.min() <= tol * max(1.0, sv.max()):
        raise ValueError("A_Z is singular at this point (non-generic)")
    u = np.asarray(u, dtype=float)[1:]
    v = np.asarray(v, dtype=float)[1:]
    ub = np.linalg.solve(A, u)
    vb = np.linalg.solve(A, v)
    return float(ub @ chart.spatial(y) @ vb)


def flow_action(chart: LightlikeChart, y, s: float) -> np.ndarray:
    """Multiplicative flow action ``y . s = Fl^Z_{log s}(y)``."""
    if s <= 0:
        raise ValueError("flow parameter must be positive")
    out = np.array(y, dtype=float)
    out[0] += np.log(s)
    if not chart.contains(out):
        raise ValueError("flow leaves the chart domain")
    return out


def reparametrize(chart: LightlikeChart, f: Callable[[np.ndarray], float]) -> LightlikeChart:
    """Chart for the same ``h`` with ``Z`` replaced by ``f(r) Z`` (``f > 0``).

    The new flow coordinate ``s'`` satisfies ``s = f(r) s'``.  Sampled points
    of the new chart are the images of sampled points of the old one.
    """
    H_old = chart.H

    def to_old(yp):
        out = np.array(yp, dtype=float)
        out[0] = f(yp[1:]) * yp[0]
        return out

    def to_new(y):
        out = np.array(y, dtype=float)
        out[0] = y[0] / f(y[1:])
        return out

    def H(yp):
        return H_old(to_old(yp))

    def sampler(rng, n):
        return np.array([to_new(y) for y in chart.sample_points(n, rng)])

    # the image of the old box is not a box; sampling goes through the old chart
    lo = np.full(chart.m + 1, -np.inf)
    hi = np.full(chart.m + 1, np.inf)
    return LightlikeChart(
        chart.m,
        MetricField(H, fd_step=H_old.fd_step, fd_step2=H_old.fd_step2),
        lo,
        hi,
        name=f"{chart.name}-reparametrized",
        sampler=sampler,
    )


def az_equivariance_residual(chart: LightlikeChart, f, jac_f, y) -> float:
    """``|A_Z(f(y)) Tf - Tf A_Z(y)|`` on ``E`` for a map preserving ``(h, Z)``."""
    y = np.asarray(y, dtype=float)
    D = np.asarray(jac_f(y), dtype=float)
    Dbar = D[1:, 1:]
    return float(np.abs(a_z(chart, f(y)) @ Dbar - Dbar @ a_z(chart, y)).max())


# ---------------------------------------------------------------------------
# Ready-made charts
# ---------------------------------------------------------------------------


def cone_chart(m: int, t_range=(-1.0, 1.0), tau: float = 1.0) -> LightlikeChart:
    """Future cone in coordinates ``(t, x)``: ``h = e^{2 tau t} g_round(x)``.

    For ``tau = 1`` this is ``s^2 g_round`` with ``s = e^t`` and ``Z`` the
    position vector field.
    """

    def H(y):
        return np.exp(2 * tau * y[0]) * round_metric(y[1:])

    def dH(y):
        e = np.exp(2 * tau * y[0])
        out = np.empty((m + 1, m, m))
        out[0] = 2 * tau * e * round_metric(y[1:])
        out[1:] = e * round_metric_partials(y[1:])
        return out

    def d2H(y):
        e = np.exp(2 * tau * y[0])
        x = y[1:]
        out = np.empty((m + 1, m + 1, m, m))
        out[0, 0] = 4 * tau**2 * e * round_metric(x)
        p = round_metric_partials(x)
        out[0, 1:] = 2 * tau * e * p
        out[1:, 0] = 2 * tau * e * p
        out[1:, 1:] = e * round_metric_second_partials(x)
        return out

    bound = 1.0 / np.tan(0.1)
    lower = np.concatenate(([t_range[0]], -bound * np.ones(m)))
    upper = np.concatenate(([t_range[1]], bound * np.ones(m)))

    def sampler(rng, n):
        t = rng.uniform(t_range[0], t_range[1], size=n)
        return np.column_stack((t, sample_stereo(rng, m, n)))

    return LightlikeChart(m, MetricField(H, dH, d2H), lower, upper, name="cone", sampler=sampler)


def flat_hyperplane_chart(m: int, box: float = 2.0) -> LightlikeChart:
    """``h = 0 + g_{R^m}`` on ``R x R^m`` (non-generic, ``A_Z = 0``).

    Samples are drawn from the inner half of the box so that moderate
    translations and shears of sampled points stay in the chart.
    """

    def H(y):
        return np.eye(m)

    def dH(y):
        return np.zeros((m + 1, m, m))

    def d2H(y):
        return np.zeros((m + 1, m + 1, m, m))

    def sampler(rng, n):
        return rng.uniform(-box / 2, box / 2, size=(n, m + 1))

    return LightlikeChart(
        m,
        MetricField(H, dH, d2H),
        -box * np.ones(m + 1),
        box * np.ones(m + 1),
        name="flat",
        sampler=sampler,
    )
