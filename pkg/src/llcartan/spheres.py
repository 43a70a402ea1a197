"""Stereographic coordinates on the unit sphere ``S^m`` and sampling helpers.

Stereographic projection is taken from the north pole ``(0, ..., 0, 1)``, so
the coordinate chart covers the sphere minus that pole.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "POLAR_CAP",
    "stereo_to_sphere",
    "stereo_jacobian",
    "stereo_hessian",
    "sphere_to_stereo",
    "sphere_to_stereo_jacobian",
    "round_metric",
    "round_metric_partials",
    "round_metric_second_partials",
    "sample_stereo",
]

POLAR_CAP = 0.2


def stereo_to_sphere(x) -> np.ndarray:
    """``p(x) = (2x, |x|^2 - 1) / (1 + |x|^2)``."""
    x = np.asarray(x, dtype=float)
    r2 = x @ x
    return np.concatenate((2.0 * x, [r2 - 1.0])) / (1.0 + r2)


def stereo_jacobian(x) -> np.ndarray:
    """``(m+1) x m`` Jacobian of :func:`stereo_to_sphere`."""
    x = np.asarray(x, dtype=float)
    m = x.shape[0]
    r2 = x @ x
    d = 1.0 + r2
    J = np.empty((m + 1, m))
    J[:m] = 2.0 * np.eye(m) / d - 4.0 * np.outer(x, x) / d**2
    J[m] = 4.0 * x / d**2
    return J


def stereo_hessian(x) -> np.ndarray:
    """``H[a, k, l] = d_k d_l p_a``."""
    x = np.asarray(x, dtype=float)
    m = x.shape[0]
    d = 1.0 + x @ x
    eye = np.eye(m)
    H = np.empty((m + 1, m, m))
    for a in range(m):
        H[a] = (
            -4.0 * (eye[a][:, None] * x[None, :] + eye[a][None, :] * x[:, None]) / d**2
            - 4.0 * x[a] * eye / d**2
            + 16.0 * x[a] * np.outer(x, x) / d**3
        )
    H[m] = 4.0 * eye / d**2 - 16.0 * np.outer(x, x) / d**3
    return H


def sphere_to_stereo(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return p[:-1] / (1.0 - p[-1])


def sphere_to_stereo_jacobian(p) -> np.ndarray:
    """``m x (m+1)`` Jacobian of ``q -> q[:-1] / (1 - q[-1])`` (ambient extension)."""
    p = np.asarray(p, dtype=float)
    m = p.shape[0] - 1
    d = 1.0 - p[-1]
    J = np.zeros((m, m + 1))
    J[:, :m] = np.eye(m) / d
    J[:, m] = p[:-1] / d**2
    return J


def round_metric(x) -> np.ndarray:
    """Round metric in stereographic coordinates, ``4 / (1 + |x|^2)^2 I``."""
    x = np.asarray(x, dtype=float)
    return 4.0 / (1.0 + x @ x) ** 2 * np.eye(x.shape[0])


def round_metric_partials(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    m = x.shape[0]
    d = 1.0 + x @ x
    return (-16.0 * x / d**3)[:, None, None] * np.eye(m)[None]


def round_metric_second_partials(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    m = x.shape[0]
    d = 1.0 + x @ x
    f2 = -16.0 * np.eye(m) / d**3 + 96.0 * np.outer(x, x) / d**4
    return f2[:, :, None, None] * np.eye(m)[None, None]


def sample_stereo(rng: np.random.Generator, m: int, n: int, cap: float = POLAR_CAP) -> np.ndarray:
    """Stereographic coordinates of ``n`` uniform sphere points outside the
    polar cap of angular radius ``cap`` around the projection pole."""
    out = []
    cos_cap = np.cos(cap)
    while len(out) < n:
        p = rng.normal(size=m + 1)
        p /= np.linalg.norm(p)
        if p[-1] < cos_cap:
            out.append(sphere_to_stereo(p))
    return np.array(out)
