"""Metric component fields on coordinate charts and the finite-difference
helpers shared by the rest of the package."""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

__all__ = [
    "DEFAULT_FD_STEP",
    "DEFAULT_FD_STEP2",
    "central_diff",
    "richardson_diff",
    "MetricField",
]

DEFAULT_FD_STEP = 1e-5
# Nested differences divide rounding noise by step**2, so second derivatives
# use a larger step together with one Richardson level.
DEFAULT_FD_STEP2 = 1e-3


def central_diff(f: Callable, x, direction, step: float = DEFAULT_FD_STEP):
    """``(f(x + h d) - f(x - h d)) / 2h``; works for array-valued ``f``."""
    x = np.asarray(x, dtype=float)
    d = np.asarray(direction, dtype=float)
    return (np.asarray(f(x + step * d)) - np.asarray(f(x - step * d))) / (2.0 * step)


def richardson_diff(f: Callable, x, direction, step: float = DEFAULT_FD_STEP2):
    """Central difference with one Richardson level (fourth order)."""
    d1 = central_diff(f, x, direction, step)
    d2 = central_diff(f, x, direction, step / 2.0)
    return (4.0 * d2 - d1) / 3.0


class MetricField:
    """Symmetric matrix field ``g_ab(x)`` with first and second partials.

    ``partials(x)`` must return an array ``P[k, a, b] = d_k g_ab`` and
    ``second_partials(x)`` an array ``Q[k, l, a, b] = d_k d_l g_ab``.  Missing
    partials fall back to central differences (``fd_step``); second partials
    fall back to a Richardson-extrapolated difference of the first partials
    (``fd_step2``).
    """

    def __init__(
        self,
        evaluate: Callable[[np.ndarray], np.ndarray],
        partials: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        second_partials: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        fd_step: float = DEFAULT_FD_STEP,
        fd_step2: float = DEFAULT_FD_STEP2,
    ):
        if fd_step <= 0 or fd_step2 <= 0:
            raise ValueError("finite-difference steps must be positive")
        self._evaluate = evaluate
        self._partials = partials
        self._second = second_partials
        self.fd_step = fd_step
        self.fd_step2 = fd_step2

    @property
    def has_partials(self) -> bool:
        return self._partials is not None

    def with_steps(self, fd_step: float = None, fd_step2: float = None) -> "MetricField":
        return MetricField(
            self._evaluate,
            self._partials,
            self._second,
            fd_step if fd_step is not None else self.fd_step,
            fd_step2 if fd_step2 is not None else self.fd_step2,
        )

    def __call__(self, x) -> np.ndarray:
        g = np.asarray(self._evaluate(np.asarray(x, dtype=float)), dtype=float)
        return 0.5 * (g + g.T)

    def symmetry_residual(self, x) -> float:
        g = np.asarray(self._evaluate(np.asarray(x, dtype=float)), dtype=float)
        return float(np.abs(g - g.T).max())

    def fd_d1(self, x, step: float = None) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        h = self.fd_step if step is None else step
        eye = np.eye(x.shape[0])
        return np.stack([central_diff(self, x, eye[k], h) for k in range(x.shape[0])])

    def d1(self, x) -> np.ndarray:
        if self._partials is not None:
            return np.asarray(self._partials(np.asarray(x, dtype=float)), dtype=float)
        return self.fd_d1(x)

    def d2(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self._second is not None:
            return np.asarray(self._second(x), dtype=float)
        eye = np.eye(x.shape[0])
        q = np.stack(
            [richardson_diff(self.d1, x, eye[k], self.fd_step2) for k in range(x.shape[0])]
        )
        # d_k d_l g is symmetric in (k, l) in exact arithmetic
        return 0.5 * (q + q.transpose(1, 0, 2, 3))

    def directional(self, x, v) -> np.ndarray:
        """``sum_k v^k d_k g`` at ``x``."""
        return np.einsum("k,kab->ab", np.asarray(v, dtype=float), self.d1(x))
