"""Complex quadric model of the oriented 2-plane Grassmannian.

An oriented 2-plane with orthonormal frame (v, w) maps to the projective
class of z = v + i w; orthonormality forces sum z_j^2 = 0, the equation of
the quadric Q in CP^{k+1} (ambient dimension n = k + 2).  Rotating the
frame in its plane multiplies z by a phase, so the class is well defined.
The affine chart removes the tangent hyperplane z_1 - i z_2 = 0 and is a
biholomorphism onto C^k.  For n = 4 the quadric splits as a product of two
round 2-spheres of radius 1/sqrt(2), realized here through the self-dual /
anti-self-dual decomposition of the plucker vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ChartDomainError,
    InvalidInputError,
    NotOnQuadricError,
    UnsupportedGradeError,
)
from .exterior import Frame, PVector, is_simple
from .grassmann import GrassmannPoint

QUADRIC_RESIDUAL_TOL = 1e-10

# rows: orthonormal basis of the self-dual / anti-self-dual halves of
# Lambda^2(R^4), in the lexicographic coordinate order (12,13,14,23,24,34)
_S = 1.0 / np.sqrt(2.0)
SELF_DUAL_BASIS = np.array(
    [
        [_S, 0, 0, 0, 0, _S],
        [0, _S, 0, 0, -_S, 0],
        [0, 0, _S, _S, 0, 0],
    ]
)
ANTI_SELF_DUAL_BASIS = np.array(
    [
        [_S, 0, 0, 0, 0, -_S],
        [0, _S, 0, 0, _S, 0],
        [0, 0, _S, -_S, 0, 0],
    ]
)


@dataclass(frozen=True)
class ProjectivePoint:
    """Nonzero homogeneous representative in C^{k+2}; equality is projective."""

    z: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z, dtype=complex)
        if z.ndim != 1:
            raise InvalidInputError("homogeneous coordinates must be a 1-d vector")
        if np.linalg.norm(z) <= 1e-12:
            raise InvalidInputError("homogeneous representative is numerically zero")
        z = z.copy()
        z.flags.writeable = False
        object.__setattr__(self, "z", z)

    @property
    def k(self) -> int:
        return self.z.shape[0] - 2


def projectively_equal(a: ProjectivePoint, b: ProjectivePoint, tol: float = 1e-10) -> bool:
    overlap = abs(np.vdot(a.z, b.z)) / (np.linalg.norm(a.z) * np.linalg.norm(b.z))
    return bool(1.0 - overlap < tol)


def quadric_residual(z: np.ndarray) -> float:
    z = np.asarray(z, dtype=complex)
    return float(abs(np.sum(z * z)) / (np.linalg.norm(z) ** 2))


@dataclass(frozen=True)
class QuadricPoint(ProjectivePoint):
    """Projective point satisfying sum z_j^2 = 0 within tolerance."""

    def __post_init__(self):
        super().__post_init__()
        res = quadric_residual(self.z)
        if res > QUADRIC_RESIDUAL_TOL:
            raise NotOnQuadricError(f"quadric residual {res:.3e} exceeds {QUADRIC_RESIDUAL_TOL:g}")


@dataclass(frozen=True)
class ChartPoint:
    """Affine chart coordinates xi in C^k."""

    xi: np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=complex)
        if xi.ndim != 1:
            raise InvalidInputError("chart coordinates must be a 1-d vector")
        if not np.all(np.isfinite(xi.view(float))):
            raise InvalidInputError("chart coordinates must be finite")
        xi = xi.copy()
        xi.flags.writeable = False
        object.__setattr__(self, "xi", xi)


def grassmann_to_quadric(w: GrassmannPoint) -> QuadricPoint:
    if w.p != 2:
        raise UnsupportedGradeError("the quadric model applies to 2-planes only")
    v, u = w.frame.vectors
    return QuadricPoint(v + 1j * u)


def quadric_to_grassmann(q: QuadricPoint) -> GrassmannPoint:
    """Oriented 2-plane of a quadric point.

    On the quadric, |Re z| = |Im z| and Re z is orthogonal to Im z for any
    representative, so a single real rescale makes (Re z, Im z) an
    orthonormal frame.
    """
    z = q.z * (np.sqrt(2.0) / np.linalg.norm(q.z))
    x, y = z.real, z.imag
    # tiny residual cleanup keeps the frame inside its 1e-9 tolerance
    x = x / np.linalg.norm(x)
    y = y - (x @ y) * x
    y = y / np.linalg.norm(y)
    return GrassmannPoint(Frame(np.stack([x, y])))


def ho_chart(q: QuadricPoint) -> ChartPoint:
    """Affine chart xi_j = z_{j+2} / (z_1 - i z_2) away from that hyperplane."""
    denom = q.z[0] - 1j * q.z[1]
    if abs(denom) <= 1e-10 * np.linalg.norm(q.z):
        raise ChartDomainError("point lies on (or too close to) the chart hyperplane")
    return ChartPoint(q.z[2:] / denom)


def ho_chart_inv(xi: ChartPoint) -> QuadricPoint:
    """Inverse chart, gauged so the hyperplane factor (z_1 - i z_2)/2 is 1."""
    s = np.sum(xi.xi * xi.xi)
    z = np.concatenate(([1.0 - s, 1j * (1.0 + s)], 2.0 * xi.xi))
    return QuadricPoint(z)


def hyperplane_margins(q: ProjectivePoint) -> tuple[float, float]:
    """Scale-invariant distances |z_1 -+ i z_2| / |z| to the two tangent
    hyperplanes; the first vanishes exactly on the chart hyperplane."""
    nrm = np.linalg.norm(q.z)
    m_h = abs(q.z[0] - 1j * q.z[1]) / nrm
    m_hp = abs(q.z[0] + 1j * q.z[1]) / nrm
    return float(m_h), float(m_hp)


def fs_distance(a: ProjectivePoint, b: ProjectivePoint) -> float:
    """Geodesic distance of the scaled Fubini-Study metric (line element
    carries a leading factor 2, hence the sqrt(2))."""
    if a.z.shape != b.z.shape:
        raise InvalidInputError("projective points have different dimensions")
    c = abs(np.vdot(a.z, b.z)) / (np.linalg.norm(a.z) * np.linalg.norm(b.z))
    return float(np.sqrt(2.0) * np.arccos(np.clip(c, 0.0, 1.0)))


def split_s2xs2(w: GrassmannPoint | PVector) -> tuple[np.ndarray, np.ndarray]:
    """Split a unit simple 2-vector in R^4 into its pair of unit 3-vectors
    on the two sphere factors (self-dual and anti-self-dual parts, each of
    norm 1/sqrt(2), rescaled to unit length)."""
    if isinstance(w, GrassmannPoint):
        if (w.p, w.n) != (2, 4):
            raise InvalidInputError("the sphere-product split requires G+(2, 4)")
        pv = w.plucker
    else:
        if (w.p, w.n) != (2, 4):
            raise InvalidInputError("the sphere-product split requires grade 2 in R^4")
        if not is_simple(w, 1e-8) or abs(np.linalg.norm(w.coords) - 1.0) > 1e-8:
            raise InvalidInputError("plucker vector must be simple and of unit norm")
        pv = w
    a = np.sqrt(2.0) * (SELF_DUAL_BASIS @ pv.coords)
    b = np.sqrt(2.0) * (ANTI_SELF_DUAL_BASIS @ pv.coords)
    return a, b


def unsplit_s2xs2(a: np.ndarray, b: np.ndarray) -> GrassmannPoint:
    """Inverse of split_s2xs2: recover the oriented plane from factor points."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    for v in (a, b):
        if v.shape != (3,) or abs(np.linalg.norm(v) - 1.0) > 1e-9:
            raise InvalidInputError("factor points must be unit 3-vectors")
    coords = (SELF_DUAL_BASIS.T @ a + ANTI_SELF_DUAL_BASIS.T @ b) / np.sqrt(2.0)
    # factor the simple 2-vector: image of its antisymmetric matrix is the plane
    idx = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
    B = np.zeros((4, 4))
    for c, (i, j) in zip(coords, idx):
        B[i, j] = c
        B[j, i] = -c
    U, s, _ = np.linalg.svd(B)
    plane = GrassmannPoint.from_vectors(U[:, :2].T)
    if plane.plucker.coords @ coords < 0:
        plane = GrassmannPoint(Frame(plane.frame.vectors[::-1].copy()))
    return plane


def product_region_contains(
    a: np.ndarray,
    b: np.ndarray,
    axis_a: np.ndarray,
    axis_b: np.ndarray,
    epsilon: float,
) -> bool:
    """Both factors stay at least epsilon away from their antipodal axis
    pairs: |<a, axis_a>| <= cos(eps) and likewise for b."""
    if not 0.0 < epsilon < np.pi / 2:
        raise InvalidInputError(f"epsilon must lie in (0, pi/2), got {epsilon}")
    ca = abs(float(np.dot(a, axis_a)))
    cb = abs(float(np.dot(b, axis_b)))
    return ca <= np.cos(epsilon) and cb <= np.cos(epsilon)
