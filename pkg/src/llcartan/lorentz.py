"""Chart-level Lorentzian geometry: Levi-Civita connection, curvature,
time-oriented null frames and the connection form on the null-frame bundle.

Curvature convention: ``R(X, Y)W = nabla_X nabla_Y W - nabla_Y nabla_X W
- nabla_[X,Y] W`` and ``Ric(X, Y) = trace(W -> R(W, X)Y)``.  Components are
stored as ``R[a, b, c, d]``, the ``a``-component of ``R(d_c, d_d) d_b``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .fields import MetricField, richardson_diff
from .mink import canonical_metric, s_matrix
from .mobius import AlgebraElement

__all__ = [
    "LorentzChart",
    "NullFrame",
    "minkowski_chart",
    "christoffels",
    "christoffel_derivatives",
    "riemann_tensor",
    "riemann",
    "ricci_tensor",
    "ricci",
    "complete_null_frame",
    "frame_inverse",
    "frame_connection_matrix",
    "connection_form",
    "null_frame_section",
    "FRAME_TOL",
]

FRAME_TOL = 1e-9


@dataclass
class LorentzChart:
    """Coordinate chart of a Lorentzian manifold of dimension ``m + 2``.

    ``time_orientation(x)`` returns a timelike vector ``T_or``; future-pointing
    null vectors ``l`` satisfy ``g(l, T_or) < 0``.
    """

    metric: MetricField
    dim: int
    time_orientation: Callable[[np.ndarray], np.ndarray]
    name: str = ""

    @property
    def m(self) -> int:
        return self.dim - 2

    def G(self, x) -> np.ndarray:
        return self.metric(np.asarray(x, dtype=float))

    def inner(self, x, u, v) -> float:
        return float(np.asarray(u) @ self.G(x) @ np.asarray(v))

    def signature_ok(self, x) -> bool:
        ev = np.linalg.eigvalsh(self.G(x))
        return bool(np.sum(ev < 0) == 1 and np.sum(ev > 0) == self.dim - 1)

    def orientation_ok(self, x) -> bool:
        T = self.time_orientation(np.asarray(x, dtype=float))
        return self.inner(x, T, T) < 0


def minkowski_chart(m: int) -> LorentzChart:
    """Flat ``L^{m+2}`` in canonical coordinates, oriented by ``d/dx_0``."""
    n = m + 2
    G = canonical_metric(m)
    e0 = np.eye(n)[0]
    field = MetricField(
        lambda x: G,
        lambda x: np.zeros((n, n, n)),
        lambda x: np.zeros((n, n, n, n)),
    )
    return LorentzChart(field, n, lambda x: e0, name="minkowski")


def _metric_of(chart) -> MetricField:
    return chart.metric if isinstance(chart, LorentzChart) else chart


def christoffels(chart, x) -> np.ndarray:
    """``Gam[k, i, j] = (1/2) g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)``."""
    metric = _metric_of(chart)
    x = np.asarray(x, dtype=float)
    G = metric(x)
    dg = metric.d1(x)
    # first kind, indexed [l, i, j]
    first = 0.5 * (np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg)
    return np.linalg.solve(G, first.reshape(G.shape[0], -1)).reshape(first.shape)


def christoffel_derivatives(chart, x) -> np.ndarray:
    """``dGam[c, k, i, j] = d_c Gam[k, i, j]`` from first and second metric partials."""
    metric = _metric_of(chart)
    x = np.asarray(x, dtype=float)
    G = metric(x)
    n = G.shape[0]
    Ginv = np.linalg.inv(G)
    dg = metric.d1(x)
    d2g = metric.d2(x)
    first = 0.5 * (np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg)
    dfirst = 0.5 * (
        np.einsum("cijl->clij", d2g) + np.einsum("cjil->clij", d2g) - d2g
    )
    dGinv = -np.einsum("ka,cab,bl->ckl", Ginv, dg, Ginv)
    out = np.einsum("ckl,lij->ckij", dGinv, first) + np.einsum("kl,clij->ckij", Ginv, dfirst)
    return out.reshape(n, n, n, n)


def riemann_tensor(chart, x) -> np.ndarray:
    """``R[a, b, c, d]`` such that ``R(d_c, d_d) d_b = R[a, b, c, d] d_a``."""
    gam = christoffels(chart, x)
    dgam = christoffel_derivatives(chart, x)
    # R^a_bcd = d_c Gam^a_db - d_d Gam^a_cb + Gam^a_ce Gam^e_db - Gam^a_de Gam^e_cb
    R = np.einsum("cadb->abcd", dgam) - np.einsum("dacb->abcd", dgam)
    R = R + np.einsum("ace,edb->abcd", gam, gam) - np.einsum("ade,ecb->abcd", gam, gam)
    return R


def riemann(chart, x, X, Y, W) -> np.ndarray:
    """``R(X, Y) W`` at ``x``."""
    return np.einsum("abcd,b,c,d->a", riemann_tensor(chart, x), W, X, Y)


def ricci_tensor(chart, x) -> np.ndarray:
    """``Ric[d, b] = R[a, b, a, d]`` so that ``Ric(X, Y) = X^d Y^b Ric[d, b]``."""
    R = riemann_tensor(chart, x)
    return np.einsum("abad->db", R)


def ricci(chart, x, X, Y) -> float:
    return float(np.asarray(X) @ ricci_tensor(chart, x) @ np.asarray(Y))


# ---------------------------------------------------------------------------
# Null frames
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NullFrame:
    """``u = (l+, w_1, ..., w_m, l-)`` at ``point``; ``matrix`` has them as columns."""

    point: np.ndarray
    lplus: np.ndarray
    ws: np.ndarray
    lminus: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return np.column_stack((self.lplus, np.asarray(self.ws).T, self.lminus))

    @classmethod
    def from_matrix(cls, point, U) -> "NullFrame":
        U = np.asarray(U, dtype=float)
        return cls(np.asarray(point, dtype=float), U[:, 0], U[:, 1:-1].T, U[:, -1])

    def gram_residual(self, G) -> float:
        """``|U^T G U - S|``; zero exactly for a null frame."""
        U = self.matrix
        return float(np.abs(U.T @ G @ U - s_matrix(U.shape[0] - 2)).max())


def frame_inverse(U: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Inverse of a null frame matrix: ``U^{-1} = S U^T G``."""
    return s_matrix(U.shape[0] - 2) @ U.T @ G


def complete_null_frame(
    chart: LorentzChart, x, lplus, ws, tol: float = FRAME_TOL
) -> NullFrame:
    """Complete ``(l+, w_1, ..., w_m)`` by the unique null ``l-`` with
    ``g(l-, w_i) = 0`` and ``g(l-, l+) = 1``."""
    x = np.asarray(x, dtype=float)
    G = chart.G(x)
    lp = np.asarray(lplus, dtype=float)
    W = np.atleast_2d(np.asarray(ws, dtype=float))
    scale = 1.0 + lp @ lp
    if abs(lp @ G @ lp) > tol * scale:
        raise ValueError("l+ is not lightlike")
    if lp @ G @ chart.time_orientation(x) >= 0:
        raise ValueError("l+ is not future-pointing")
    gram = W @ G @ W.T
    wscale = 1.0 + np.abs(W).max() ** 2
    if np.abs(gram - np.eye(W.shape[0])).max() > tol * wscale:
        raise ValueError("w_i are not orthonormal")
    if np.abs(W @ G @ lp).max() > tol * np.sqrt(scale * wscale):
        raise ValueError("w_i are not orthogonal to l+")
    A = np.vstack((W @ G, lp @ G))
    b = np.zeros(A.shape[0])
    b[-1] = 1.0
    sv = np.linalg.svd(A, compute_uv=False)
    if sv.min() <= 1e-12 * sv.max():
        raise ValueError("degenerate frame: constraint system is rank deficient")
    zeta = np.linalg.lstsq(A, b, rcond=None)[0]
    eta = zeta - 0.5 * (zeta @ G @ zeta) * lp
    return NullFrame(x, lp, W, eta)


def frame_connection_matrix(chart, x, xdot, U, Udot) -> np.ndarray:
    """``U^{-1} (Udot + Gam(xdot) U)``: the connection form evaluated on the
    tangent vector ``(xdot, Udot)`` of the frame bundle at ``U``."""
    x = np.asarray(x, dtype=float)
    metric = _metric_of(chart)
    G = metric(x)
    gam = christoffels(metric, x)
    GamX = np.einsum("kij,i->kj", gam, np.asarray(xdot, dtype=float))
    return frame_inverse(U, G) @ (np.asarray(Udot) + GamX @ U)


def connection_form(
    chart: LorentzChart,
    frame_section: Callable[[np.ndarray], NullFrame],
    x,
    w,
    Y: Optional[AlgebraElement] = None,
    step: float = 1e-4,
    tol: float = 1e-6,
) -> AlgebraElement:
    """Connection form of the Levi-Civita connection on the tangent vector
    ``T s . w + xi_Y`` at the frame ``s(x)``.

    The derivative of the section along ``w`` is a Richardson-extrapolated
    central difference.
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    U = frame_section(x).matrix
    if np.any(w):
        Udot = richardson_diff(lambda p: frame_section(p).matrix, x, w, step)
        M = frame_connection_matrix(chart, x, w, U, Udot)
        out = AlgebraElement.from_matrix(M, tol=tol)
    else:
        out = AlgebraElement.zero(chart.m)
    if Y is not None:
        out = out + Y
    return out


def null_frame_section(
    chart: LorentzChart,
    lplus_field: Callable[[np.ndarray], np.ndarray],
    seeds: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> Callable[[np.ndarray], NullFrame]:
    """Smooth local section of null frames with prescribed ``l+``.

    A transversal null ``k`` is made from ``T_or``; seed vectors (coordinate
    directions by default) are projected onto the orthogonal complement of
    ``span(l+, k)`` and orthonormalized by Gram-Schmidt; the frame is then
    completed by :func:`complete_null_frame`.
    """

    def section(x):
        x = np.asarray(x, dtype=float)
        G = chart.G(x)
        lp = np.asarray(lplus_field(x), dtype=float)
        T = chart.time_orientation(x)
        c = T @ G @ lp
        k = (T - 0.5 * (T @ G @ T) / c * lp) / c
        cand = np.eye(chart.dim) if seeds is None else np.atleast_2d(seeds(x))
        ws = []
        for v in cand:
            v = v - (v @ G @ k) * lp - (v @ G @ lp) * k
            for u in ws:
                v = v - (v @ G @ u) * u
            nv = v @ G @ v
            if nv > 1e-8 * (1.0 + v @ v):
                ws.append(v / np.sqrt(nv))
            if len(ws) == chart.m:
                break
        if len(ws) < chart.m:
            raise ValueError("seed vectors do not span the screen")
        return complete_null_frame(chart, x, lp, np.array(ws))

    return section
