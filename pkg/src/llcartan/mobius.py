"""The Moebius group ``O+(m+1,1)`` in the null basis, its parabolic-type
subgroup ``H`` (a copy of the Euclidean group), the graded Lie algebra

    g = g_{-1} + g_0 + g_1,   Y = [[a, Z, 0], [X, A, -Z^T], [0, -X^T, -a]],

adjoint actions, the exponential map and the Maurer-Cartan form.

All matrices are written in the null basis ``(l, e_1, ..., e_m, n)`` whose
Gram matrix is ``S`` (see :mod:`llcartan.mink`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
import scipy.linalg

from .mink import ConePoint, MinkVector, null_basis_matrix, s_matrix, canonical_metric

__all__ = [
    "AlgebraElement",
    "GroupElement",
    "HElement",
    "QuotientVector",
    "Grading",
    "grading_element",
    "minus_generator",
    "grade",
    "bracket",
    "quotient_projection",
    "quotient_metric",
    "ad_quotient",
    "ad_full",
    "ad_grading_closed_form",
    "ad_minus_closed_form",
    "non_reductivity_witness",
    "rank_one_witness",
    "injectivity_witness",
    "InjectivityReport",
    "exp",
    "maurer_cartan",
    "TwoParameterFamily",
    "random_two_parameter_family",
    "structure_equation_residual",
    "cone_action",
    "SphereConformalMap",
    "model_isometry",
    "random_h",
    "random_algebra",
    "random_group",
    "upper_block",
    "to_canonical",
]

GROUP_TOL = 1e-10
ALGEBRA_TOL = 1e-12
TANGENT_TOL = 1e-8


def _skew_index(m: int):
    return np.triu_indices(m, 1)


# ---------------------------------------------------------------------------
# Lie algebra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AlgebraElement:
    """Element of the Moebius Lie algebra, stored through its graded blocks.

    ``X`` is the g_{-1} column, ``(a, A)`` the g_0 part and ``Zrow`` the g_1 row.
    """

    a: float
    X: np.ndarray
    A: np.ndarray
    Zrow: np.ndarray

    def __post_init__(self):
        X = np.array(self.X, dtype=float).reshape(-1)
        m = X.shape[0]
        A = np.array(self.A, dtype=float).reshape(m, m)
        Z = np.array(self.Zrow, dtype=float).reshape(-1)
        if Z.shape[0] != m:
            raise ValueError("X and Zrow must have the same length")
        if np.abs(A + A.T).max(initial=0.0) > ALGEBRA_TOL * (1.0 + np.abs(A).max(initial=0.0)):
            raise ValueError("A must be skew-symmetric")
        for arr in (X, A, Z):
            arr.setflags(write=False)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "Zrow", Z)

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        m = self.m
        return (m + 1) * (m + 2) // 2

    @classmethod
    def zero(cls, m: int) -> "AlgebraElement":
        return cls(0.0, np.zeros(m), np.zeros((m, m)), np.zeros(m))

    @property
    def matrix(self) -> np.ndarray:
        m = self.m
        Y = np.zeros((m + 2, m + 2))
        Y[0, 0] = self.a
        Y[-1, -1] = -self.a
        Y[1:-1, 0] = self.X
        Y[-1, 1:-1] = -self.X
        Y[1:-1, 1:-1] = self.A
        Y[0, 1:-1] = self.Zrow
        Y[1:-1, -1] = -self.Zrow
        return Y

    @classmethod
    def from_matrix(cls, Y, tol: float = 1e-9) -> "AlgebraElement":
        """Read the blocks of ``Y``; raises if ``Y`` is not in the algebra."""
        Y = np.asarray(Y, dtype=float)
        n = Y.shape[0]
        m = n - 2
        s = s_matrix(m)
        scale = 1.0 + np.abs(Y).max()
        if np.abs(Y.T @ s + s @ Y).max() > tol * scale:
            raise ValueError("matrix does not lie in the Lie algebra")
        A = Y[1:-1, 1:-1]
        return cls(Y[0, 0], Y[1:-1, 0], 0.5 * (A - A.T), Y[0, 1:-1])

    def residual(self) -> float:
        """``|Y^T S + S Y|``; zero up to rounding for every stored element."""
        Y = self.matrix
        s = s_matrix(self.m)
        return float(np.abs(Y.T @ s + s @ Y).max())

    def vector(self) -> np.ndarray:
        """Coordinates ``(a, X, Zrow, A_{i<j})`` of length ``(m+1)(m+2)/2``."""
        iu = _skew_index(self.m)
        return np.concatenate(([self.a], self.X, self.Zrow, self.A[iu]))

    @classmethod
    def from_vector(cls, vec) -> "AlgebraElement":
        vec = np.asarray(vec, dtype=float)
        n = vec.shape[0]
        m = int(round((-3 + np.sqrt(1 + 8 * n)) / 2))
        if (m + 1) * (m + 2) // 2 != n:
            raise ValueError("vector length is not (m+1)(m+2)/2")
        A = np.zeros((m, m))
        iu = _skew_index(m)
        A[iu] = vec[1 + 2 * m:]
        A = A - A.T
        return cls(vec[0], vec[1:1 + m], A, vec[1 + m:1 + 2 * m])

    def _combine(self, other: "AlgebraElement", alpha: float) -> "AlgebraElement":
        if other.m != self.m:
            raise ValueError("dimension mismatch")
        return AlgebraElement(
            self.a + alpha * other.a,
            self.X + alpha * other.X,
            self.A + alpha * other.A,
            self.Zrow + alpha * other.Zrow,
        )

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self._combine(other, 1.0)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self._combine(other, -1.0)

    def __mul__(self, c: float) -> "AlgebraElement":
        return AlgebraElement(c * self.a, c * self.X, c * self.A, c * self.Zrow)

    __rmul__ = __mul__

    def __neg__(self) -> "AlgebraElement":
        return self * -1.0

    def norm(self) -> float:
        return float(np.abs(self.matrix).max())

    @property
    def in_h(self) -> bool:
        """True when the g_{-1} part and the grading part vanish."""
        return self.a == 0.0 and not np.any(self.X)


def grading_element(m: int) -> AlgebraElement:
    """``E = diag(1, 0, ..., 0, -1)``; ``ad E`` acts as ``j`` on ``g_j``."""
    return AlgebraElement(1.0, np.zeros(m), np.zeros((m, m)), np.zeros(m))


def minus_generator(m: int, i: int) -> AlgebraElement:
    """``E_i``: the g_{-1} element with ``X = e_i`` (0-based ``i``)."""
    X = np.zeros(m)
    X[i] = 1.0
    return AlgebraElement(0.0, X, np.zeros((m, m)), np.zeros(m))


class Grading(NamedTuple):
    minus: np.ndarray
    zero: tuple
    plus: np.ndarray

    def parts(self) -> tuple:
        m = self.minus.shape[0]
        zm, zz = np.zeros(m), np.zeros((m, m))
        a, A = self.zero
        return (
            AlgebraElement(0.0, self.minus, zz, zm),
            AlgebraElement(a, zm, A, zm),
            AlgebraElement(0.0, zm, zz, self.plus),
        )


def grade(Y: AlgebraElement) -> Grading:
    return Grading(Y.X.copy(), (Y.a, Y.A.copy()), Y.Zrow.copy())


def bracket(Y1: AlgebraElement, Y2: AlgebraElement) -> AlgebraElement:
    if Y1.m != Y2.m:
        raise ValueError("dimension mismatch")
    M1, M2 = Y1.matrix, Y2.matrix
    return AlgebraElement.from_matrix(M1 @ M2 - M2 @ M1)


# ---------------------------------------------------------------------------
# Quotient g/h
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuotientVector:
    """Class of an algebra element modulo h, written as ``(a, X)``."""

    a: float
    X: np.ndarray

    def __post_init__(self):
        X = np.array(self.X, dtype=float).reshape(-1)
        X.setflags(write=False)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "X", X)

    @property
    def m(self) -> int:
        return self.X.shape[0]

    def vector(self) -> np.ndarray:
        return np.concatenate(([self.a], self.X))

    @classmethod
    def from_vector(cls, vec) -> "QuotientVector":
        vec = np.asarray(vec, dtype=float)
        return cls(vec[0], vec[1:])

    def lift(self) -> AlgebraElement:
        """Representative ``aE + sum X_i E_i`` in ``g_{-1} + z(g_0)``."""
        m = self.m
        return AlgebraElement(self.a, self.X, np.zeros((m, m)), np.zeros(m))


def quotient_projection(Y: AlgebraElement) -> QuotientVector:
    return QuotientVector(Y.a, Y.X)


def quotient_metric(u: QuotientVector, v: QuotientVector) -> float:
    """Degenerate metric ``q((a,X),(b,Y)) = <X, Y>`` on ``g/h``."""
    return float(u.X @ v.X)


# ---------------------------------------------------------------------------
# Groups
# ---------------------------------------------------------------------------


def to_canonical(matrix: np.ndarray) -> np.ndarray:
    """Conjugate a null-basis matrix into canonical Minkowski coordinates."""
    m = matrix.shape[0] - 2
    c = null_basis_matrix(m)
    cinv = s_matrix(m) @ c.T @ canonical_metric(m)
    return c @ matrix @ cinv


@dataclass(frozen=True)
class GroupElement:
    """An element of ``O+(m+1,1)`` written in the null basis."""

    matrix: np.ndarray

    def __post_init__(self):
        M = np.array(self.matrix, dtype=float)
        n = M.shape[0]
        if M.shape != (n, n) or n < 4:
            raise ValueError("group elements are square matrices of size m+2 >= 4")
        s = s_matrix(n - 2)
        scale = 1.0 + np.abs(M).max() ** 2
        if np.abs(M.T @ s @ M - s).max() > GROUP_TOL * scale:
            raise ValueError("matrix does not preserve the Lorentz metric")
        # first column in canonical coordinates must be future pointing
        col = null_basis_matrix(n - 2) @ M[:, 0]
        if col[0] <= 0:
            raise ValueError("matrix is not time-orientation preserving")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @property
    def m(self) -> int:
        return self.matrix.shape[0] - 2

    @classmethod
    def identity(cls, m: int) -> "GroupElement":
        return cls(np.eye(m + 2))

    def inverse(self) -> "GroupElement":
        s = s_matrix(self.m)
        return GroupElement(s @ self.matrix.T @ s)

    def __matmul__(self, other) -> "GroupElement":
        return GroupElement(self.matrix @ _as_group(other).matrix)

    def canonical(self) -> np.ndarray:
        return to_canonical(self.matrix)


@dataclass(frozen=True)
class HElement:
    """``sigma = [[1, -w^T g, -|w|^2/2], [0, g, w], [0, 0, 1]]`` with ``g`` orthogonal."""

    w: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=float).reshape(-1)
        m = w.shape[0]
        g = np.array(self.g, dtype=float).reshape(m, m)
        if np.abs(g.T @ g - np.eye(m)).max() > 1e-10:
            raise ValueError("g must be orthogonal")
        w.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "g", g)

    @property
    def m(self) -> int:
        return self.w.shape[0]

    @classmethod
    def identity(cls, m: int) -> "HElement":
        return cls(np.zeros(m), np.eye(m))

    @property
    def matrix(self) -> np.ndarray:
        m = self.m
        M = np.eye(m + 2)
        M[0, 1:-1] = -self.w @ self.g
        M[0, -1] = -0.5 * self.w @ self.w
        M[1:-1, 1:-1] = self.g
        M[1:-1, -1] = self.w
        return M

    def group(self) -> GroupElement:
        return GroupElement(self.matrix)

    @classmethod
    def from_matrix(cls, M, tol: float = 1e-9) -> "HElement":
        M = np.asarray(M, dtype=float)
        out = cls(M[1:-1, -1], M[1:-1, 1:-1])
        if np.abs(out.matrix - M).max() > tol * (1.0 + np.abs(M).max()):
            raise ValueError("matrix is not in H")
        return out

    def __matmul__(self, other: "HElement") -> "HElement":
        # composition stays in H: (w1, g1)(w2, g2) = (w1 + g1 w2, g1 g2)
        return HElement(self.w + self.g @ other.w, self.g @ other.g)

    def inverse(self) -> "HElement":
        gt = self.g.T
        return HElement(-gt @ self.w, gt)

    def upper(self) -> np.ndarray:
        """Upper-left ``(m+1)x(m+1)`` block; it is the matrix of the quotient action."""
        return upper_block(self.matrix)


def upper_block(M: np.ndarray) -> np.ndarray:
    return np.asarray(M)[:-1, :-1]


def _as_group(sigma) -> GroupElement:
    if isinstance(sigma, GroupElement):
        return sigma
    if isinstance(sigma, HElement):
        return sigma.group()
    return GroupElement(np.asarray(sigma, dtype=float))


# ---------------------------------------------------------------------------
# Adjoint actions
# ---------------------------------------------------------------------------


def ad_quotient(sigma: HElement, v: QuotientVector) -> QuotientVector:
    """Induced action of H on ``g/h``: ``(a, X) -> (a - <w, gX>, gX)``."""
    gX = sigma.g @ v.X
    return QuotientVector(v.a - sigma.w @ gX, gX)


def ad_full(sigma, Y: AlgebraElement) -> AlgebraElement:
    """``Ad[sigma](Y) = sigma Y sigma^{-1}``."""
    sg = _as_group(sigma)
    if sg.m != Y.m:
        raise ValueError("dimension mismatch")
    return AlgebraElement.from_matrix(sg.matrix @ Y.matrix @ sg.inverse().matrix)


def ad_grading_closed_form(sigma: HElement) -> AlgebraElement:
    """Closed form of ``Ad[sigma](E)``: the grading element plus the g_1 row ``w^T``."""
    m = sigma.m
    return AlgebraElement(1.0, np.zeros(m), np.zeros((m, m)), sigma.w)


def ad_minus_closed_form(sigma: HElement, i: int) -> AlgebraElement:
    """Closed form of ``Ad[sigma](E_i)`` for ``sigma`` in H.

    With ``u = g e_i`` and ``c = <w, u>``: the grading part is ``-c``, the
    g_{-1} part is ``u``, the o(m) part is ``u w^T - w u^T`` and the g_1 row is
    ``-c w^T + |w|^2 u^T / 2``.
    """
    w, g = sigma.w, sigma.g
    u = g[:, i]
    c = float(w @ u)
    return AlgebraElement(
        -c,
        u,
        np.outer(u, w) - np.outer(w, u),
        -c * w + 0.5 * (w @ w) * u,
    )


def non_reductivity_witness(sigma: HElement) -> float:
    """Size of the g_1 component of ``Ad[sigma](E)``.

    A nonzero value shows that ``g_{-1} + z(g_0)`` is not ``Ad(H)``-stable.
    """
    return float(np.abs(ad_full(sigma, grading_element(sigma.m)).Zrow).max())


def rank_one_witness(m: int) -> np.ndarray:
    """A rank-one matrix in the Euclidean algebra embedded in h.

    It is the element with ``Zrow = e_1`` and ``A = 0``.
    """
    Z = np.zeros(m)
    Z[0] = 1.0
    return AlgebraElement(0.0, np.zeros(m), np.zeros((m, m)), Z).matrix


@dataclass(frozen=True)
class InjectivityReport:
    m: int
    trials: int
    violations: int
    min_displacement: float
    max_deviation: float


def injectivity_witness(m: int, trials: int, seed: int) -> InjectivityReport:
    """Search for ``v`` moved by each random non-identity sigma in H.

    The candidates are the basis ``(0, e_j)`` of ``g/h``; a sigma fixing all of
    them would be a violation of injectivity of the quotient action.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    rng = np.random.default_rng(seed)
    violations = 0
    min_disp = np.inf
    max_dev = 0.0
    for _ in range(trials):
        sigma = random_h(rng, m)
        if np.allclose(sigma.matrix, np.eye(m + 2)):
            continue
        best = 0.0
        for j in range(m):
            v = QuotientVector(0.0, np.eye(m)[j])
            moved = ad_quotient(sigma, v)
            best = max(best, float(np.abs(moved.vector() - v.vector()).max()))
        max_dev = max(max_dev, best)
        min_disp = min(min_disp, best)
        if best <= 1e-12:
            violations += 1
    return InjectivityReport(m, trials, violations, float(min_disp), max_dev)


# ---------------------------------------------------------------------------
# Exponential and Maurer-Cartan form
# ---------------------------------------------------------------------------


def exp(Y: AlgebraElement) -> GroupElement:
    return GroupElement(scipy.linalg.expm(Y.matrix))


def maurer_cartan(sigma, xi) -> AlgebraElement:
    """``omega(sigma)(xi) = sigma^{-1} xi = S sigma^T S xi``."""
    sg = _as_group(sigma)
    xi = np.asarray(xi, dtype=float)
    s = s_matrix(sg.m)
    M = sg.matrix
    scale = 1.0 + np.abs(M).max() * np.abs(xi).max()
    if np.abs(xi.T @ s @ M + M.T @ s @ xi).max() > TANGENT_TOL * scale:
        raise ValueError("xi is not tangent to the group at sigma")
    return AlgebraElement.from_matrix(s @ M.T @ s @ xi, tol=1e-7)


@dataclass(frozen=True)
class TwoParameterFamily:
    """``sigma(u, v) = sigma0 exp(u A) exp(v B) exp(u v C)`` with exact partials."""

    sigma0: GroupElement
    A: AlgebraElement
    B: AlgebraElement
    C: AlgebraElement

    def _factors(self, u, v):
        ea = scipy.linalg.expm(u * self.A.matrix)
        eb = scipy.linalg.expm(v * self.B.matrix)
        ec = scipy.linalg.expm(u * v * self.C.matrix)
        return ea, eb, ec

    def __call__(self, u: float, v: float) -> np.ndarray:
        ea, eb, ec = self._factors(u, v)
        return self.sigma0.matrix @ ea @ eb @ ec

    def partials(self, u: float, v: float) -> tuple:
        ea, eb, ec = self._factors(u, v)
        A, B, C = self.A.matrix, self.B.matrix, self.C.matrix
        s0 = self.sigma0.matrix
        du = s0 @ (ea @ A @ eb @ ec + ea @ eb @ (v * C) @ ec)
        dv = s0 @ (ea @ eb @ B @ ec + ea @ eb @ (u * C) @ ec)
        return du, dv

    def omega(self, u: float, v: float) -> tuple:
        """``(omega(d_u), omega(d_v))`` from the exact tangent vectors."""
        sg = GroupElement(self(u, v))
        du, dv = self.partials(u, v)
        return maurer_cartan(sg, du), maurer_cartan(sg, dv)


def random_two_parameter_family(rng: np.random.Generator, m: int, scale: float = 0.7) -> TwoParameterFamily:
    return TwoParameterFamily(
        random_group(rng, m),
        random_algebra(rng, m, scale),
        random_algebra(rng, m, scale),
        random_algebra(rng, m, scale),
    )


def structure_equation_residual(family: TwoParameterFamily, u: float, v: float, step: float) -> float:
    """``|d omega(d_u, d_v) + [omega(d_u), omega(d_v)]|`` with the exterior
    derivative taken by central differences of step ``step``."""
    wu, wv = family.omega(u, v)
    dwv_du = (family.omega(u + step, v)[1].matrix - family.omega(u - step, v)[1].matrix) / (2 * step)
    dwu_dv = (family.omega(u, v + step)[0].matrix - family.omega(u, v - step)[0].matrix) / (2 * step)
    res = dwv_du - dwu_dv + bracket(wu, wv).matrix
    return float(np.abs(res).max())


# ---------------------------------------------------------------------------
# Actions on the cone and on the sphere
# ---------------------------------------------------------------------------


def cone_action(sigma, v: ConePoint) -> ConePoint:
    """Linear action on the future cone, written in canonical coordinates."""
    sg = _as_group(sigma)
    if sg.m != v.m:
        raise ValueError("dimension mismatch")
    return ConePoint(MinkVector(sg.canonical() @ v.coords, v.vector.convention))


@dataclass(frozen=True)
class SphereConformalMap:
    """A conformal map of ``S^m`` with ``Phi^* g = e^{2 phi} g``."""

    apply: Callable[[np.ndarray], np.ndarray]
    log_factor: Callable[[np.ndarray], float]

    @classmethod
    def identity(cls) -> "SphereConformalMap":
        return cls(lambda x: np.asarray(x, dtype=float), lambda x: 0.0)

    @classmethod
    def rotation(cls, R) -> "SphereConformalMap":
        R = np.asarray(R, dtype=float)
        return cls(lambda x: R @ np.asarray(x, dtype=float), lambda x: 0.0)

    @classmethod
    def from_group(cls, sigma) -> "SphereConformalMap":
        """Sphere action of a group element and its conformal factor.

        ``Phi(x) = pi(sigma (1, x))`` and ``e^{phi(x)} = 1 / (sigma(1, x))_0``.
        """
        L = _as_group(sigma).canonical()

        def image(x):
            return L @ np.concatenate(([1.0], np.asarray(x, dtype=float)))

        return cls(
            lambda x: (lambda y: y[1:] / y[0])(image(x)),
            lambda x: -float(np.log(image(x)[0])),
        )


def model_isometry(Phi: SphereConformalMap, x, s: float) -> tuple:
    """``f(x, s) = (Phi(x), s e^{-phi(x)})`` on ``S^m x R_{>0}``."""
    x = np.asarray(x, dtype=float)
    if abs(np.linalg.norm(x) - 1.0) > 1e-9:
        raise ValueError("sphere point must have unit norm")
    if s <= 0:
        raise ValueError("scale s must be positive")
    return Phi.apply(x), s * float(np.exp(-Phi.log_factor(x)))


# ---------------------------------------------------------------------------
# Random sampling (always seeded by the caller)
# ---------------------------------------------------------------------------


def random_orthogonal(rng: np.random.Generator, m: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(m, m)))
    q = q * np.sign(np.diag(r))
    if rng.random() < 0.5:
        q[:, 0] = -q[:, 0]
    return q


def random_h(rng: np.random.Generator, m: int) -> HElement:
    return HElement(rng.uniform(-1.0, 1.0, size=m), random_orthogonal(rng, m))


def random_algebra(rng: np.random.Generator, m: int, scale: float = 1.0) -> AlgebraElement:
    A = rng.normal(size=(m, m))
    return AlgebraElement(
        scale * rng.normal(),
        scale * rng.normal(size=m),
        scale * (A - A.T) / 2,
        scale * rng.normal(size=m),
    )


def random_group(rng: np.random.Generator, m: int, scale: float = 0.5) -> GroupElement:
    """``exp(Y) sigma`` with random ``Y`` and random ``sigma`` in H."""
    return exp(random_algebra(rng, m, scale)) @ random_h(rng, m)
