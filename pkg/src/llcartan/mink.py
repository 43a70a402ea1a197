"""Lorentz-Minkowski linear algebra, the future lightlike cone and its
projection onto the round sphere.

Vectors of ``L^{m+2}`` are stored either in canonical coordinates, where the
metric is ``diag(-1, 1, ..., 1)``, or in the null basis ``(l, e_1, ..., e_m, n)``
whose Gram matrix is the anti-diagonal block matrix ``S``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BasisKind",
    "MinkBasisConvention",
    "MinkVector",
    "ConePoint",
    "canonical_metric",
    "s_matrix",
    "null_basis_matrix",
    "mink_inner",
    "basis_change",
    "is_lightlike",
    "sphere_projection",
    "project_to_sphere",
    "cone_embed",
    "cone_metric",
    "LIGHTLIKE_RTOL",
]

LIGHTLIKE_RTOL = 1e-9
_UNIT_TOL = 1e-9


class BasisKind(enum.Enum):
    CANONICAL = "canonical"
    SBASIS = "sbasis"


def canonical_metric(m: int) -> np.ndarray:
    """Gram matrix ``diag(-1, 1, ..., 1)`` of size ``m + 2``."""
    g = np.eye(m + 2)
    g[0, 0] = -1.0
    return g


def s_matrix(m: int) -> np.ndarray:
    """Gram matrix of the null basis, ``[[0,0,1],[0,I_m,0],[1,0,0]]``."""
    s = np.zeros((m + 2, m + 2))
    s[0, -1] = s[-1, 0] = 1.0
    s[1:-1, 1:-1] = np.eye(m)
    return s


def null_basis_matrix(m: int) -> np.ndarray:
    """Columns are the null basis vectors written in canonical coordinates.

    ``l = (1, 0, ..., 0, 1)/sqrt2`` and ``n = (-1, 0, ..., 0, 1)/sqrt2`` so that
    ``<l, n> = 1``; the middle columns are the canonical spatial vectors.
    Multiplying S-coordinates by this matrix yields canonical coordinates.
    """
    c = np.eye(m + 2)
    r = 1.0 / np.sqrt(2.0)
    c[:, 0] = 0.0
    c[:, -1] = 0.0
    c[0, 0], c[-1, 0] = r, r
    c[0, -1], c[-1, -1] = -r, r
    return c


@dataclass(frozen=True)
class MinkBasisConvention:
    m: int
    kind: BasisKind = BasisKind.CANONICAL

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ValueError(f"dimension m must be an integer >= 2, got {self.m}")

    @property
    def dim(self) -> int:
        return self.m + 2

    @property
    def metric(self) -> np.ndarray:
        if self.kind is BasisKind.CANONICAL:
            return canonical_metric(self.m)
        return s_matrix(self.m)


@dataclass(frozen=True)
class MinkVector:
    coords: np.ndarray
    convention: MinkBasisConvention

    def __post_init__(self):
        c = np.array(self.coords, dtype=float).reshape(-1)
        if c.shape[0] != self.convention.dim:
            raise ValueError(
                f"expected {self.convention.dim} coordinates, got {c.shape[0]}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @classmethod
    def canonical(cls, coords) -> "MinkVector":
        c = np.asarray(coords, dtype=float)
        return cls(c, MinkBasisConvention(c.shape[0] - 2, BasisKind.CANONICAL))

    @classmethod
    def sbasis(cls, coords) -> "MinkVector":
        c = np.asarray(coords, dtype=float)
        return cls(c, MinkBasisConvention(c.shape[0] - 2, BasisKind.SBASIS))


def mink_inner(u: MinkVector, v: MinkVector) -> float:
    if u.convention != v.convention:
        raise ValueError("vectors carry different conventions or dimensions")
    return float(u.coords @ u.convention.metric @ v.coords)


def basis_change(v: MinkVector, target: MinkBasisConvention) -> MinkVector:
    """Rewrite ``v`` in the ``target`` basis; inner products are preserved."""
    if target.m != v.convention.m:
        raise ValueError("dimension mismatch")
    if target.kind is v.convention.kind:
        raise ValueError("source and target conventions coincide")
    c = null_basis_matrix(target.m)
    if target.kind is BasisKind.CANONICAL:
        return MinkVector(c @ v.coords, target)
    # c is orthogonal up to the metric: c^{-1} = S c^T G
    cinv = s_matrix(target.m) @ c.T @ canonical_metric(target.m)
    return MinkVector(cinv @ v.coords, target)


def is_lightlike(coords, metric: np.ndarray, rtol: float = LIGHTLIKE_RTOL) -> bool:
    c = np.asarray(coords, dtype=float)
    return abs(c @ metric @ c) <= rtol * (1.0 + c @ c)


@dataclass(frozen=True)
class ConePoint:
    """A point of the future lightlike cone, stored canonically."""

    vector: MinkVector
    rtol: float = field(default=LIGHTLIKE_RTOL, compare=False)

    def __post_init__(self):
        if self.vector.convention.kind is not BasisKind.CANONICAL:
            raise ValueError("cone points are stored in canonical coordinates")
        c = self.vector.coords
        if c[0] <= 0:
            raise ValueError("cone point must have positive time component")
        if not is_lightlike(c, self.vector.convention.metric, self.rtol):
            raise ValueError("vector is not lightlike within tolerance")

    @classmethod
    def from_coords(cls, coords) -> "ConePoint":
        return cls(MinkVector.canonical(coords))

    @property
    def coords(self) -> np.ndarray:
        return self.vector.coords

    @property
    def m(self) -> int:
        return self.vector.convention.m


def sphere_projection(coords) -> np.ndarray:
    """Raw projection ``v -> v[1:]/v[0]`` on arrays (no validation)."""
    c = np.asarray(coords, dtype=float)
    return c[1:] / c[0]


def project_to_sphere(v: ConePoint) -> np.ndarray:
    return sphere_projection(v.coords)


def _check_unit(x: np.ndarray) -> None:
    if abs(np.linalg.norm(x) - 1.0) > _UNIT_TOL:
        raise ValueError("sphere point must have unit norm")


def cone_embed(x, s: float) -> ConePoint:
    """The identification ``S^m x R_{>0} -> N``, ``(x, s) -> (s, s x)``."""
    x = np.asarray(x, dtype=float)
    _check_unit(x)
    if s <= 0:
        raise ValueError("scale s must be positive")
    return ConePoint.from_coords(np.concatenate(([s], s * x)))


def cone_metric(v: ConePoint, w1: MinkVector, w2: MinkVector, tol: float = 1e-9) -> float:
    """Degenerate metric induced on the cone, evaluated on tangent vectors."""
    for w in (w1, w2):
        if w.convention != v.vector.convention:
            raise ValueError("tangent vectors must be canonical and of matching dimension")
        scale = 1.0 + np.linalg.norm(v.coords) * np.linalg.norm(w.coords)
        if abs(mink_inner(v.vector, w)) > tol * scale:
            raise ValueError("vector is not tangent to the cone at v")
    return mink_inner(w1, w2)
