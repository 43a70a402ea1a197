"""Cartan connections on lightlike manifolds.

The admissible frame bundle ``Q`` of a normal-form chart consists of frames
``b = (Z(y), e_1, ..., e_m)`` with ``h(e_i, e_j) = delta_ij``; a frame is stored
as the ``(m+1) x (m+1)`` matrix ``B`` of its vectors in chart coordinates, so
``B[:, 0] = Z = (1, 0, ..., 0)``.  ``H`` acts on the right by
``b . sigma = B upper(sigma)``.

A tangent vector of ``Q`` at ``b`` is a pair ``(v, Bdot)`` with ``v`` tangent to
the base.  For a lightlike hypersurface ``psi: N -> M`` of a Lorentzian
manifold, frames lift to null frames ``Psi(b) = (T psi Z, T psi e_i, eta(b))``
and the candidate Cartan connection is the pull-back of the Levi-Civita
connection form, ``omega = Psi^{-1} (dPsi + Gam Psi)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .charts import LightlikeChart
from .fields import richardson_diff
from .lorentz import (
    LorentzChart,
    NullFrame,
    christoffels,
    complete_null_frame,
    frame_connection_matrix,
    frame_inverse,
    riemann_tensor,
)
from .mobius import (
    AlgebraElement,
    HElement,
    QuotientVector,
    ad_full,
    grading_element,
    minus_generator,
    quotient_metric,
    quotient_projection,
    random_h,
)

__all__ = [
    "LightlikeImmersion",
    "AdmissibleFrame",
    "CartanSample",
    "RankVerdict",
    "SolderingSample",
    "FlatnessReport",
    "PreservationReport",
    "CartanConnection",
    "PullbackConnection",
    "FlatModelConnection",
    "Diffeomorphism",
    "standard_frame",
    "retract_frame",
    "frame_action",
    "lift_frame",
    "covariant_derivative_z",
    "nabla_z_matrix",
    "expansion",
    "null_second_fundamental_form",
    "omega_eval",
    "tangent_basis",
    "omega_matrix",
    "omega_inverse",
    "cartan_rank_test",
    "quotient_iso",
    "extract_h_omega",
    "h_omega_matrix",
    "fundamental_field",
    "extract_z_omega",
    "soldering_eval",
    "curvature_function",
    "flatness_diagnostics",
    "horizontal_preservation_check",
    "kossowski_curvature",
    "RANK_COND_MAX",
    "CURVE_STEP",
]

RANK_COND_MAX = 1e8
CURVE_STEP = 1e-4
JAC_STEP = 1e-3


# ---------------------------------------------------------------------------
# Immersions and frames
# ---------------------------------------------------------------------------


@dataclass
class LightlikeImmersion:
    """Isometric immersion ``psi`` of a normal-form lightlike chart into a
    Lorentzian chart.  ``psi_jacobian`` is optional; when missing the
    differential is a Richardson-extrapolated central difference."""

    ambient: LorentzChart
    chart: LightlikeChart
    psi: Callable[[np.ndarray], np.ndarray]
    psi_jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = ""

    @property
    def m(self) -> int:
        return self.chart.m

    def point(self, y) -> np.ndarray:
        return np.asarray(self.psi(np.asarray(y, dtype=float)), dtype=float)

    def jacobian(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self.psi_jacobian is not None:
            return np.asarray(self.psi_jacobian(y), dtype=float)
        eye = np.eye(y.shape[0])
        return np.column_stack(
            [richardson_diff(self.psi, y, eye[k], JAC_STEP) for k in range(y.shape[0])]
        )

    def push(self, y, v) -> np.ndarray:
        return self.jacobian(y) @ np.asarray(v, dtype=float)

    def z_field(self, y) -> np.ndarray:
        """``T psi . Z`` at ``y``."""
        return self.jacobian(y)[:, 0]

    def isometry_residual(self, y) -> float:
        J = self.jacobian(y)
        G = self.ambient.G(self.point(y))
        return float(np.abs(J.T @ G @ J - self.chart.full_metric(y)).max())

    def orientation_ok(self, y) -> bool:
        x = self.point(y)
        return self.ambient.inner(x, self.z_field(y), self.ambient.time_orientation(x)) < 0


@dataclass(frozen=True)
class AdmissibleFrame:
    """Frame ``(Z(y), e_1, ..., e_m)``; ``B`` holds the vectors as columns."""

    y: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        y = np.array(self.y, dtype=float).reshape(-1)
        B = np.array(self.B, dtype=float)
        if B.shape != (y.shape[0], y.shape[0]):
            raise ValueError("frame matrix must be square of the chart dimension")
        y.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "B", B)

    @property
    def m(self) -> int:
        return self.y.shape[0] - 1

    @property
    def es(self) -> np.ndarray:
        return self.B[:, 1:]

    def admissibility_residual(self, chart: LightlikeChart) -> float:
        e0 = np.eye(self.m + 1)[0]
        gram = self.es.T @ chart.full_metric(self.y) @ self.es
        return float(max(np.abs(self.B[:, 0] - e0).max(), np.abs(gram - np.eye(self.m)).max()))


def _inv_sqrt(M: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    if w.min() <= 0:
        raise ValueError("frame vectors are degenerate for h")
    return (V / np.sqrt(w)) @ V.T


def standard_frame(chart: LightlikeChart, y) -> AdmissibleFrame:
    """``(Z, H^{-1/2} d_r)``: the symmetric orthonormalization of the coordinate frame."""
    y = np.asarray(y, dtype=float)
    m = chart.m
    B = np.zeros((m + 1, m + 1))
    B[0, 0] = 1.0
    B[1:, 1:] = _inv_sqrt(chart.spatial(y))
    return AdmissibleFrame(y, B)


def retract_frame(chart: LightlikeChart, y, B) -> AdmissibleFrame:
    """Nearest-style admissible frame at ``y``: set the first vector to ``Z`` and
    orthonormalize the rest symmetrically, ``E -> E (E^T h E)^{-1/2}``."""
    y = np.asarray(y, dtype=float)
    B = np.array(B, dtype=float)
    B[:, 0] = 0.0
    B[0, 0] = 1.0
    E = B[:, 1:]
    B[:, 1:] = E @ _inv_sqrt(E.T @ chart.full_metric(y) @ E)
    return AdmissibleFrame(y, B)


def frame_action(b: AdmissibleFrame, sigma: HElement) -> AdmissibleFrame:
    """Right action ``b . sigma``: ``e_j -> -(w^T g)_j Z + sum_i g_ij e_i``."""
    return AdmissibleFrame(b.y, b.B @ sigma.upper())


def lift_frame(imm: LightlikeImmersion, b: AdmissibleFrame) -> NullFrame:
    """``Psi(b) = (T psi Z, T psi e_1, ..., T psi e_m, eta(b))``."""
    J = imm.jacobian(b.y)
    P = J @ b.B
    return complete_null_frame(imm.ambient, imm.point(b.y), P[:, 0], P[:, 1:].T)


# ---------------------------------------------------------------------------
# Extrinsic invariants of the hypersurface
# ---------------------------------------------------------------------------


def covariant_derivative_z(imm: LightlikeImmersion, y, v) -> np.ndarray:
    """Ambient covariant derivative ``nabla_v (T psi Z)`` along ``psi``."""
    y = np.asarray(y, dtype=float)
    v = np.asarray(v, dtype=float)
    J = imm.jacobian(y)
    x = imm.point(y)
    if np.any(v):
        dz = richardson_diff(lambda p: imm.z_field(p), y, v, JAC_STEP)
    else:
        dz = np.zeros(x.shape[0])
    gam = christoffels(imm.ambient, x)
    return dz + np.einsum("kij,i,j->k", gam, J @ v, J[:, 0])


def nabla_z_matrix(imm: LightlikeImmersion, y) -> tuple:
    """Matrix of ``v -> nabla_v Z`` on ``T_y N`` and the tangency residual."""
    y = np.asarray(y, dtype=float)
    J = imm.jacobian(y)
    cols = np.column_stack(
        [covariant_derivative_z(imm, y, e) for e in np.eye(imm.m + 1)]
    )
    N, *_ = np.linalg.lstsq(J, cols, rcond=None)
    residual = float(np.abs(J @ N - cols).max())
    return N, residual


def expansion(imm: LightlikeImmersion, y, rtol: float = 1e-6) -> float:
    """``lambda`` with ``nabla_Z Z = lambda Z``, by least squares."""
    y = np.asarray(y, dtype=float)
    V = covariant_derivative_z(imm, y, np.eye(imm.m + 1)[0])
    Zx = imm.z_field(y)
    lam = float(Zx @ V / (Zx @ Zx))
    res = float(np.linalg.norm(V - lam * Zx))
    if res > rtol * (1.0 + np.linalg.norm(V)):
        raise ValueError(f"nabla_Z Z is not proportional to Z (residual {res:.3e})")
    return lam


def null_second_fundamental_form(imm: LightlikeImmersion, y, u, v) -> float:
    """``B_Z(u, v) = g(nabla_u Z, T psi v)``; depends only on classes mod ``Z``."""
    x = imm.point(y)
    return imm.ambient.inner(x, covariant_derivative_z(imm, y, u), imm.push(y, v))


def kossowski_curvature(imm: LightlikeImmersion, y, vs) -> float:
    """``det h(nabla_{v_i} Z, v_j) / det h(v_i, v_j)`` for a complement ``(v_i)``."""
    vs = np.atleast_2d(np.asarray(vs, dtype=float))
    den = np.linalg.det(vs @ imm.chart.full_metric(y) @ vs.T)
    if abs(den) <= 1e-14:
        raise ValueError("vectors do not span a complement of the radical")
    num = np.array([[null_second_fundamental_form(imm, y, a, b) for b in vs] for a in vs])
    return float(np.linalg.det(num) / den)


# ---------------------------------------------------------------------------
# Connections on Q
# ---------------------------------------------------------------------------


class CartanConnection:
    """A ``g``-valued one-form on the admissible frame bundle of ``chart``."""

    chart: LightlikeChart

    @property
    def m(self) -> int:
        return self.chart.m

    def omega(self, b: AdmissibleFrame, v, Bdot) -> AlgebraElement:
        raise NotImplementedError

    def section_derivative(self, b: AdmissibleFrame, v) -> np.ndarray:
        """``Bdot`` of the distinguished local section through ``b`` along ``v``."""
        raise NotImplementedError

    def frame(self, y, sigma: Optional[HElement] = None) -> AdmissibleFrame:
        b = standard_frame(self.chart, y)
        return b if sigma is None else frame_action(b, sigma)


class PullbackConnection(CartanConnection):
    """Pull-back of the Levi-Civita connection form by the null-frame lift."""

    def __init__(self, imm: LightlikeImmersion, step: float = CURVE_STEP):
        self.imm = imm
        self.chart = imm.chart
        self.step = step

    def lift_matrix(self, b: AdmissibleFrame) -> np.ndarray:
        return lift_frame(self.imm, b).matrix

    def omega_on_curve(self, curve: Callable[[float], AdmissibleFrame]) -> AlgebraElement:
        """Value of ``omega`` on the velocity of a curve of admissible frames at 0."""
        b0 = curve(0.0)
        U = self.lift_matrix(b0)
        t0 = np.zeros(1)
        e = np.ones(1)
        Udot = richardson_diff(lambda t: self.lift_matrix(curve(t[0])), t0, e, self.step)
        ydot = richardson_diff(lambda t: curve(t[0]).y, t0, e, self.step)
        xdot = self.imm.jacobian(b0.y) @ ydot
        M = frame_connection_matrix(self.imm.ambient, self.imm.point(b0.y), xdot, U, Udot)
        return AlgebraElement.from_matrix(M, tol=1e-6)

    def omega(self, b: AdmissibleFrame, v, Bdot) -> AlgebraElement:
        v = np.asarray(v, dtype=float)
        Bdot = np.asarray(Bdot, dtype=float)
        return self.omega_on_curve(
            lambda t: retract_frame(self.chart, b.y + t * v, b.B + t * Bdot)
        )

    def section_derivative(self, b: AdmissibleFrame, v) -> np.ndarray:
        # d/dt of E (E^T h(y + tv) E)^{-1/2} at t = 0, where E^T h E = I
        E = b.es
        dh = np.zeros((self.m + 1, self.m + 1))
        dh[1:, 1:] = np.einsum("k,kab->ab", np.asarray(v, dtype=float), self.chart.H.d1(b.y))
        out = np.zeros_like(b.B)
        out[:, 1:] = -0.5 * E @ (E.T @ dh @ E)
        return out


class FlatModelConnection(CartanConnection):
    """Model connection on the trivial bundle over ``h = 0 + g_{R^m}``.

    A frame ``B = [[1, a^T], [0, g]]`` corresponds to ``sigma = (w = -g a, g)``
    and ``omega((r, Y), xi_X) = Ad(sigma^{-1})(r E + sum Y_i E_i) + X``.
    """

    def __init__(self, chart: LightlikeChart):
        self.chart = chart

    def sigma_of(self, b: AdmissibleFrame) -> HElement:
        g = b.B[1:, 1:]
        a = b.B[0, 1:]
        return HElement(-g @ a, g)

    def omega(self, b: AdmissibleFrame, v, Bdot) -> AlgebraElement:
        v = np.asarray(v, dtype=float)
        m = self.m
        sigma = self.sigma_of(b)
        base = AlgebraElement(v[0], v[1:], np.zeros((m, m)), np.zeros(m))
        out = ad_full(sigma.inverse(), base)
        V = np.linalg.solve(b.B, np.asarray(Bdot, dtype=float))
        A = V[1:, 1:]
        X = AlgebraElement(0.0, np.zeros(m), 0.5 * (A - A.T), V[0, 1:])
        return out + X

    def section_derivative(self, b: AdmissibleFrame, v) -> np.ndarray:
        # the trivialization section x -> (x, sigma) is constant
        return np.zeros_like(b.B)


def _h_basis(m: int) -> list:
    """Basis of ``h``: the g_1 rows ``e_i`` and the skew matrices ``E_ij``."""
    out = []
    for i in range(m):
        Z = np.zeros(m)
        Z[i] = 1.0
        out.append(AlgebraElement(0.0, np.zeros(m), np.zeros((m, m)), Z))
    for i, j in zip(*np.triu_indices(m, 1)):
        A = np.zeros((m, m))
        A[i, j], A[j, i] = 1.0, -1.0
        out.append(AlgebraElement(0.0, np.zeros(m), A, np.zeros(m)))
    return out


def fundamental_field(b: AdmissibleFrame, X: AlgebraElement) -> np.ndarray:
    """``Bdot`` of ``xi_X(b) = d/dt b . exp(tX)`` for ``X`` in ``h``."""
    return b.B @ X.matrix[:-1, :-1]


def tangent_basis(conn: CartanConnection, b: AdmissibleFrame) -> list:
    """``m+1`` section directions followed by the fundamental fields of ``h``."""
    n = conn.m + 1
    out = [(e, conn.section_derivative(b, e)) for e in np.eye(n)]
    out += [(np.zeros(n), fundamental_field(b, X)) for X in _h_basis(conn.m)]
    return out


def omega_matrix(conn: CartanConnection, b: AdmissibleFrame) -> np.ndarray:
    """Square matrix of ``omega(b)`` on :func:`tangent_basis`."""
    return np.column_stack([conn.omega(b, v, Bd).vector() for v, Bd in tangent_basis(conn, b)])


def omega_inverse(
    conn: CartanConnection, b: AdmissibleFrame, X: AlgebraElement, Om: np.ndarray = None
) -> tuple:
    """Tangent vector ``(v, Bdot)`` with ``omega(b)(v, Bdot) = X``."""
    if Om is None:
        Om = omega_matrix(conn, b)
    coef = np.linalg.solve(Om, X.vector())
    basis = tangent_basis(conn, b)
    v = sum(c * t[0] for c, t in zip(coef, basis))
    Bd = sum(c * t[1] for c, t in zip(coef, basis))
    return v, Bd


@dataclass(frozen=True)
class CartanSample:
    """``omega(b)(T s . v + xi_Y(b))`` with its graded pieces and the
    independent closed forms of its grading and g_{-1} components."""

    frame: AdmissibleFrame
    v: np.ndarray
    Y: AlgebraElement
    value: AlgebraElement
    z_closed: float
    minus_closed: np.ndarray

    @property
    def closed_form_residual(self) -> float:
        return float(
            max(abs(self.value.a - self.z_closed), np.abs(self.value.X - self.minus_closed).max())
        )


def omega_eval(
    conn: PullbackConnection, b: AdmissibleFrame, v, Y: Optional[AlgebraElement] = None
) -> CartanSample:
    v = np.asarray(v, dtype=float)
    if Y is None:
        Y = AlgebraElement.zero(conn.m)
    if not Y.in_h:
        raise ValueError("vertical part must lie in h")
    Bdot = conn.section_derivative(b, v) + fundamental_field(b, Y)
    value = conn.omega(b, v, Bdot)
    imm = conn.imm
    nz = covariant_derivative_z(imm, b.y, v)
    x = imm.point(b.y)
    G = imm.ambient.G(x)
    eta = lift_frame(imm, b).lminus
    z_closed = float(nz @ G @ eta)
    minus_closed = (imm.jacobian(b.y) @ b.es).T @ G @ nz
    return CartanSample(b, v, Y, value, z_closed, minus_closed)


@dataclass(frozen=True)
class RankVerdict:
    is_cartan: bool
    min_singular: float
    condition: float
    independent_verdict: Optional[bool]

    @property
    def consistent(self) -> bool:
        return self.independent_verdict is None or self.independent_verdict == self.is_cartan


def cartan_rank_test(conn: CartanConnection, b: AdmissibleFrame) -> RankVerdict:
    """Invertibility of ``omega(b)``.  For pull-back connections the verdict is
    compared with invertibility of ``v -> nabla_v Z`` on ``T_y N``."""
    sv = np.linalg.svd(omega_matrix(conn, b), compute_uv=False)
    cond = float(sv.max() / sv.min()) if sv.min() > 0 else np.inf
    ok = cond < RANK_COND_MAX
    indep = None
    if isinstance(conn, PullbackConnection):
        N, _ = nabla_z_matrix(conn.imm, b.y)
        nsv = np.linalg.svd(N, compute_uv=False)
        indep = bool(nsv.min() > nsv.max() / RANK_COND_MAX)
    return RankVerdict(bool(ok), float(sv.min()), cond, indep)


def quotient_iso(conn: CartanConnection, b: AdmissibleFrame) -> np.ndarray:
    """Matrix of ``v -> proj(omega(b)(T s . v))`` from ``T_y N`` to ``g/h``."""
    cols = []
    for e in np.eye(conn.m + 1):
        w = conn.omega(b, e, conn.section_derivative(b, e))
        cols.append(quotient_projection(w).vector())
    return np.column_stack(cols)


def _require_cartan(conn, b):
    verdict = cartan_rank_test(conn, b)
    if not verdict.is_cartan:
        raise ValueError(
            f"omega is not a Cartan connection at this frame (condition {verdict.condition:.3e})"
        )


def extract_h_omega(
    conn: CartanConnection, y, u, v, b: Optional[AdmissibleFrame] = None, check: bool = True
) -> float:
    """``h^omega(u, v) = q(proj omega(xi_u), proj omega(xi_v))`` for lifts ``xi``."""
    b = conn.frame(y) if b is None else b
    if check:
        _require_cartan(conn, b)
    phi = quotient_iso(conn, b)
    return quotient_metric(
        QuotientVector.from_vector(phi @ np.asarray(u, dtype=float)),
        QuotientVector.from_vector(phi @ np.asarray(v, dtype=float)),
    )


def h_omega_matrix(conn: CartanConnection, b: AdmissibleFrame) -> np.ndarray:
    """Gram matrix of ``h^omega`` in chart coordinates at ``b.y``."""
    phi = quotient_iso(conn, b)
    return phi[1:].T @ phi[1:]


def extract_z_omega(conn: CartanConnection, y, b: Optional[AdmissibleFrame] = None) -> np.ndarray:
    """``Z^omega = T p . omega(b)^{-1}(E)``."""
    b = conn.frame(y) if b is None else b
    Om = omega_matrix(conn, b)
    sv = np.linalg.svd(Om, compute_uv=False)
    if sv.min() <= 0 or sv.max() / sv.min() >= RANK_COND_MAX:
        raise ValueError("omega is not a Cartan connection at this frame")
    v, _ = omega_inverse(conn, b, grading_element(conn.m), Om)
    return v


@dataclass(frozen=True)
class SolderingSample:
    frame_value: QuotientVector
    connection_value: QuotientVector

    @property
    def residual(self) -> float:
        return float(np.abs(self.frame_value.vector() - self.connection_value.vector()).max())


def soldering_eval(conn: CartanConnection, b: AdmissibleFrame, v, Bdot) -> SolderingSample:
    """Both descriptions of the soldering form on ``(v, Bdot)``: the frame
    coordinates ``b^{-1} v`` and ``proj(omega(b)(v, Bdot))``.  They coincide
    when ``Q`` is the frame bundle of ``(h^omega, Z^omega)``."""
    frame_value = QuotientVector.from_vector(np.linalg.solve(b.B, np.asarray(v, dtype=float)))
    return SolderingSample(frame_value, quotient_projection(conn.omega(b, v, Bdot)))


def curvature_function(
    conn: PullbackConnection, b: AdmissibleFrame, X1: QuotientVector, X2: QuotientVector,
    phi: Optional[np.ndarray] = None,
) -> AlgebraElement:
    """``K(b)(X1, X2) = Psi(b)^{-1} R(T psi v1, T psi v2) Psi(b)`` where
    ``v_i`` is the base vector with quotient coordinates ``X_i``."""
    imm = conn.imm
    if phi is None:
        phi = quotient_iso(conn, b)
    v1 = np.linalg.solve(phi, X1.vector())
    v2 = np.linalg.solve(phi, X2.vector())
    x = imm.point(b.y)
    J = imm.jacobian(b.y)
    R = riemann_tensor(imm.ambient, x)
    Rm = np.einsum("abcd,c,d->ab", R, J @ v1, J @ v2)
    U = lift_frame(imm, b).matrix
    K = frame_inverse(U, imm.ambient.G(x)) @ Rm @ U
    return AlgebraElement.from_matrix(K, tol=1e-5)


@dataclass(frozen=True)
class FlatnessReport:
    """Model flatness (``K = 0``), correspondence-space flatness
    (``K(E, .) = 0``) and, when either holds, the check ``h^omega = lambda^2 h``."""

    k_max: float
    k_grading_max: float
    model_flat: bool
    correspondence_flat: bool
    h_ratio_residual: Optional[float]
    tol: float
    samples: int


def flatness_diagnostics(
    conn: PullbackConnection, samples: int, seed: int, tol: float = 1e-6
) -> FlatnessReport:
    rng = np.random.default_rng(seed)
    m = conn.m
    basis = [QuotientVector.from_vector(e) for e in np.eye(m + 1)]
    k_max = 0.0
    kE_max = 0.0
    pts = conn.chart.sample_points(samples, rng)
    cache = []
    for y in pts:
        b = conn.frame(y, random_h(rng, m))
        phi = quotient_iso(conn, b)
        for i in range(m + 1):
            for j in range(i + 1, m + 1):
                k = curvature_function(conn, b, basis[i], basis[j], phi).norm()
                k_max = max(k_max, k)
                if i == 0:
                    kE_max = max(kE_max, k)
        cache.append((y, b, phi))
    model_flat = k_max <= tol
    corr_flat = kE_max <= tol
    ratio = None
    if model_flat or corr_flat:
        ratio = 0.0
        for y, b, phi in cache:
            lam = expansion(conn.imm, y)
            hom = phi[1:].T @ phi[1:]
            ref = lam**2 * conn.chart.full_metric(y)
            ratio = max(ratio, float(np.abs(hom - ref).max() / (1.0 + np.abs(ref).max())))
    return FlatnessReport(k_max, kE_max, model_flat, corr_flat, ratio, tol, samples)


# ---------------------------------------------------------------------------
# Automorphism certification
# ---------------------------------------------------------------------------


@dataclass
class Diffeomorphism:
    """A map of the base chart with its Jacobian."""

    apply: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    name: str = ""


@dataclass(frozen=True)
class PreservationReport:
    max_residual: float
    isometry_residual: float
    samples: int
    residuals: tuple = field(default=())


def _isometry_residual(conn: CartanConnection, f: Diffeomorphism, y) -> float:
    b = conn.frame(y)
    fy = f.apply(y)
    D = f.jacobian(y)
    hb = h_omega_matrix(conn, b)
    ha = h_omega_matrix(conn, conn.frame(fy))
    r1 = np.abs(D.T @ ha @ D - hb).max()
    z0 = extract_z_omega(conn, y, b)
    z1 = extract_z_omega(conn, fy)
    r2 = np.abs(D @ z0 - z1).max()
    return float(max(r1, r2))


def horizontal_preservation_check(
    conn: CartanConnection,
    f: Diffeomorphism,
    samples: int,
    seed: int,
    isometry_tol: float = 1e-6,
) -> PreservationReport:
    """Residual of ``TF . omega^{-1}(E_j) = omega^{-1}(E_j) o F`` for ``j = 0..m``,
    where ``F(b) = T f . b``.  ``f`` must preserve ``(h^omega, Z^omega)``."""
    rng = np.random.default_rng(seed)
    m = conn.m
    gens = [grading_element(m)] + [minus_generator(m, i) for i in range(m)]
    pts = conn.chart.sample_points(samples, rng)
    iso = max(_isometry_residual(conn, f, y) for y in pts)
    if iso > isometry_tol:
        raise ValueError(f"map is not an isometry of (h^omega, Z^omega): residual {iso:.3e}")
    out = []
    for y in pts:
        b = conn.frame(y, random_h(rng, m))
        fy = f.apply(b.y)
        D = f.jacobian(b.y)
        Fb = AdmissibleFrame(fy, D @ b.B)
        Om_b = omega_matrix(conn, b)
        Om_F = omega_matrix(conn, Fb)
        worst = 0.0
        for X in gens:
            v, Bd = omega_inverse(conn, b, X, Om_b)
            if np.any(v):
                dD = richardson_diff(f.jacobian, b.y, v, JAC_STEP)
            else:
                dD = np.zeros_like(D)
            Tv = D @ v
            TBd = dD @ b.B + D @ Bd
            v2, Bd2 = omega_inverse(conn, Fb, X, Om_F)
            worst = max(worst, float(np.abs(Tv - v2).max()), float(np.abs(TBd - Bd2).max()))
        out.append(worst)
    return PreservationReport(float(max(out)), iso, samples, tuple(out))
