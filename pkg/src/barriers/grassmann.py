"""Oriented Grassmannian G+(p, n): tangent normal form, explicit geodesics,
principal-angle distance, convex balls, and the codimension-2 barrier region.

Conventions
-----------
* A point is an oriented p-plane, stored as an orthonormal frame (rows) plus
  its unit simple p-vector; frames related by an SO(p) rotation represent the
  same point.
* A tangent at w is a p x (n-p) coefficient matrix A against the basis
  eta_{i,alpha} = e_1 ^ ... ^ n_alpha (slot i) ^ ... ^ e_p.  Its SVD
  A = U diag(rates) V^T rotates the frames so the tangent becomes a sum of
  single-slot rotations e_i -> n_i with speeds rates[i]; geodesics rotate
  each slot by rates[i] * t.
* Oriented principal angles are the SVD angles of the p x p alignment
  matrix, with the largest angle reflected to pi - theta when the alignment
  determinant is negative (orientation mismatch).  This yields the minimal
  angle set: theta_1 + theta_2 <= pi always.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import InvalidInputError, ZeroTangentError
from .exterior import Frame, PVector, gram_schmidt, multi_indices, plucker

_UNIT_TOL = 1e-9


@dataclass(frozen=True)
class GrassmannPoint:
    """Oriented p-plane in R^n with its cached unit plucker vector."""

    frame: Frame
    plucker: PVector = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "plucker", plucker(self.frame))

    @property
    def p(self) -> int:
        return self.frame.p

    @property
    def n(self) -> int:
        return self.frame.n

    @classmethod
    def from_vectors(cls, vectors) -> "GrassmannPoint":
        """Span of (possibly non-orthonormal) vectors, orientation preserved."""
        return cls(gram_schmidt(vectors))

    def normal_frame(self) -> Frame:
        """Deterministic orthonormal basis of the orthogonal complement,
        completed from standard basis vectors in order."""
        F = self.frame.vectors
        rows = [F[i] for i in range(self.p)]
        normals = []
        for k in range(self.n):
            cand = np.zeros(self.n)
            cand[k] = 1.0
            for r in rows:
                cand = cand - (r @ cand) * r
            nrm = np.linalg.norm(cand)
            if nrm > 1e-8:
                cand /= nrm
                rows.append(cand)
                normals.append(cand)
            if len(normals) == self.n - self.p:
                break
        return Frame(np.stack(normals))

    def rotated(self, rotation: np.ndarray) -> "GrassmannPoint":
        """Re-gauge the frame by a special-orthogonal p x p matrix."""
        R = np.asarray(rotation, dtype=float)
        if abs(np.linalg.det(R) - 1.0) > 1e-9:
            raise InvalidInputError("gauge rotation must have determinant +1")
        return GrassmannPoint(Frame(R @ self.frame.vectors))


def same_oriented_plane(w1: GrassmannPoint, w2: GrassmannPoint, tol: float = 1e-9) -> bool:
    return abs(float(w1.plucker.coords @ w2.plucker.coords) - 1.0) <= tol


@dataclass(frozen=True)
class GrassmannTangent:
    """Tangent vector at `base` with its rotation normal form.

    coeffs[i, alpha] multiplies eta_{i, alpha} built from base.frame and
    `normals` (defaults to the deterministic completion).  The normal form
    fields come from the SVD of coeffs with the left factor forced into
    SO(p) so the rotated frame keeps the base orientation.
    """

    base: GrassmannPoint
    coeffs: np.ndarray
    normals: Frame | None = None
    rank: int = field(init=False)
    rates: np.ndarray = field(init=False)
    rotated_span_frame: np.ndarray = field(init=False)
    rotated_normal_frame: np.ndarray = field(init=False)

    def __post_init__(self):
        A = np.asarray(self.coeffs, dtype=float)
        p, q = self.base.p, self.base.n - self.base.p
        if A.shape != (p, q):
            raise InvalidInputError(f"coefficient matrix must be {p} x {q}, got {A.shape}")
        if np.linalg.norm(A) <= 1e-12:
            raise ZeroTangentError("tangent coefficients are numerically zero")
        normals = self.normals if self.normals is not None else self.base.normal_frame()
        if normals.p != q or normals.n != self.base.n:
            raise InvalidInputError("normal frame has the wrong shape")
        if np.abs(normals.vectors @ self.base.frame.vectors.T).max() >= _UNIT_TOL:
            raise InvalidInputError("normal frame is not orthogonal to the base plane")
        object.__setattr__(self, "normals", normals)
        A = A.copy()
        A.flags.writeable = False
        object.__setattr__(self, "coeffs", A)

        U, s, Vt = np.linalg.svd(A)
        if np.linalg.det(U) < 0:
            # force the span rotation into SO(p); flipping the paired Vt row
            # keeps U S Vt = A, and for p > q the last U column is a null
            # direction of A^T needing no compensation.  Normal-frame
            # orientation is free gauge.
            U = U.copy()
            U[:, -1] *= -1.0
            if p <= q:
                Vt = Vt.copy()
                Vt[p - 1, :] *= -1.0
        rank = int(np.sum(s > 1e-12))
        object.__setattr__(self, "rank", rank)
        rates = s[:rank].copy()
        rates.flags.writeable = False
        object.__setattr__(self, "rates", rates)
        span_rot = U.T @ self.base.frame.vectors  # rows: rotated plane frame
        norm_rot = Vt @ normals.vectors  # rows: rotated normal frame
        span_rot.flags.writeable = False
        norm_rot.flags.writeable = False
        object.__setattr__(self, "rotated_span_frame", span_rot)
        object.__setattr__(self, "rotated_normal_frame", norm_rot)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def reconstruct_coeffs(self) -> np.ndarray:
        """Rebuild the coefficient matrix from the normal-form data."""
        p, q = self.coeffs.shape
        U = self.base.frame.vectors @ self.rotated_span_frame.T  # p x p
        Vt = self.rotated_normal_frame @ self.normals.vectors.T  # q x q
        S = np.zeros((p, q))
        S[: self.rank, : self.rank] = np.diag(self.rates)
        return U @ S @ Vt

    def as_pvector(self) -> PVector:
        """The tangent as a p-vector: sum of coefficients times eta basis."""
        etas = eta_basis(self.base, self.normals)
        coords = np.zeros_like(etas[0].coords)
        flat = self.coeffs.ravel()
        for c, eta in zip(flat, etas):
            coords = coords + c * eta.coords
        return PVector(self.base.n, self.base.p, coords)


def eta_basis(w: GrassmannPoint, normal_frame: Frame | None = None) -> list[PVector]:
    """Tangent basis eta_{i, alpha}: replace frame slot i by normal alpha.

    Ordered row-major in (i, alpha), matching the coefficient layout of
    GrassmannTangent.
    """
    normals = normal_frame if normal_frame is not None else w.normal_frame()
    if np.abs(normals.vectors @ w.frame.vectors.T).max() >= _UNIT_TOL:
        raise InvalidInputError("normal frame is not orthogonal to the plane")
    if normals.p != w.n - w.p:
        raise InvalidInputError("normal frame does not span the orthogonal complement")
    out = []
    F = w.frame.vectors
    for i in range(w.p):
        for alpha in range(w.n - w.p):
            rows = F.copy()
            rows[i] = normals.vectors[alpha]
            out.append(PVector(w.n, w.p, _wedge_rows(rows)))
    return out


def _wedge_rows(rows: np.ndarray) -> np.ndarray:
    p, n = rows.shape
    coords = np.empty(comb(n, p))
    for k, I in enumerate(multi_indices(n, p)):
        coords[k] = np.linalg.det(rows[:, I])
    return coords


def geodesic_point(X: GrassmannTangent, t: float) -> GrassmannPoint:
    """Point at arc length t along the geodesic leaving X.base in direction X.

    Requires |X| = 1 for arc-length parametrization; other norms are
    rescaled with a warning.
    """
    scale = X.norm
    if abs(scale - 1.0) >= _UNIT_TOL:
        warnings.warn(
            f"tangent norm {scale:.6g} != 1; rescaling to unit speed", RuntimeWarning
        )
    rates = X.rates / scale
    E = X.rotated_span_frame.copy()
    N = X.rotated_normal_frame
    for i in range(X.rank):
        s = rates[i] * t
        E[i] = np.cos(s) * X.rotated_span_frame[i] + np.sin(s) * N[i]
    return GrassmannPoint(Frame(E))


def principal_angles(w1: GrassmannPoint, w2: GrassmannPoint) -> np.ndarray:
    """Oriented principal angles, descending.

    SVD angles of the alignment matrix, computed through the sine for the
    well-aligned directions (stable near zero); a negative alignment
    determinant reflects the largest angle to pi - theta.
    """
    if (w1.p, w1.n) != (w2.p, w2.n):
        raise InvalidInputError("points live on different Grassmannians")
    F1, F2 = w1.frame.vectors, w2.frame.vectors
    M = F1 @ F2.T
    cos_vals = np.clip(np.linalg.svd(M, compute_uv=False), 0.0, 1.0)  # descending
    # complementary factor has singular values sin(theta), ascending order
    # when paired with descending cosines
    comp = F2 - (F2 @ F1.T) @ F1
    sin_vals = np.sort(np.linalg.svd(comp, compute_uv=False)[: w1.p])
    theta = np.where(
        cos_vals > 0.7, np.arcsin(np.clip(sin_vals, 0.0, 1.0)), np.arccos(cos_vals)
    )
    theta = np.sort(theta)[::-1]
    if np.linalg.det(M) < 0:
        theta[0] = np.pi - theta[0]
        theta = np.sort(theta)[::-1]
    return theta


def geodesic_distance(w1: GrassmannPoint, w2: GrassmannPoint) -> float:
    return float(np.linalg.norm(principal_angles(w1, w2)))


def t_max(X: GrassmannTangent) -> float:
    """Convexity bound pi / (2 (r1 + r2)) along a unit direction, where r1,
    r2 are the two largest rotation rates (r2 = 0 for rank one)."""
    if abs(X.norm - 1.0) >= _UNIT_TOL:
        raise InvalidInputError("t_max is defined for unit tangents")
    r1 = X.rates[0]
    r2 = X.rates[1] if X.rank >= 2 else 0.0
    return float(np.pi / (2.0 * (r1 + r2)))


def _two_largest_sum(theta: np.ndarray) -> float:
    return float(theta[0] + (theta[1] if len(theta) >= 2 else 0.0))


def ball_membership(
    w: GrassmannPoint, w2: GrassmannPoint, shrink: float = 0.0, tol: float = 1e-9
) -> str:
    """Classify w2 against the convex ball at w: 'inside', 'boundary', or
    'outside'.

    The ball is {theta_1 + theta_2 <= pi/2}: along a unit geodesic the two
    largest angles grow as r1 t and r2 t, so t <= t_max is exactly
    theta_1 + theta_2 <= pi/2.  `shrink` tightens the threshold.
    """
    if shrink < 0 or shrink >= np.pi / 2:
        raise InvalidInputError("shrink must lie in [0, pi/2)")
    s = _two_largest_sum(principal_angles(w, w2))
    level = np.pi / 2 - shrink
    if abs(s - level) <= tol:
        return "boundary"
    return "inside" if s < level else "outside"


@dataclass(frozen=True)
class GrassmannBarrierRegion:
    """Codimension-2 barrier region at w0 with thickness epsilon.

    Excluded set: planes whose oriented angle pair (theta_1, theta_2) to w0
    degenerates, theta_1 = theta_2 or theta_1 + theta_2 = pi.  On
    G+(2, 4) = S^2 x S^2 these are the two ruling families through +-w0,
    i.e. the two tangent hyperplane sections of the quadric model; the
    angle gaps theta_1 - theta_2 and pi - (theta_1 + theta_2) are the
    per-factor distances to them.
    """

    w0: GrassmannPoint
    X1: GrassmannTangent
    epsilon: float

    def __post_init__(self):
        if not 0.0 < self.epsilon < np.pi / 2:
            raise InvalidInputError(f"epsilon must lie in (0, pi/2), got {self.epsilon}")
        if self.X1.rank != 1:
            raise InvalidInputError("sweep direction must have rank 1")
        if abs(self.X1.norm - 1.0) >= _UNIT_TOL:
            raise InvalidInputError("sweep direction must have unit norm")
        if self.X1.base is not self.w0 and not same_oriented_plane(self.X1.base, self.w0):
            raise InvalidInputError("sweep direction must be based at w0")


def barrier_margin(w0: GrassmannPoint, w2: GrassmannPoint) -> float:
    """Distance (in per-factor angle units) from w2 to the barrier set of w0:
    min(theta_1 - theta_2, pi - theta_1 - theta_2)."""
    theta = principal_angles(w0, w2)
    s = _two_largest_sum(theta)
    gap = float(theta[0] - theta[1]) if len(theta) >= 2 else float(theta[0])
    return min(gap, np.pi - s)


def main_region_contains(
    w0: GrassmannPoint,
    X1: GrassmannTangent,
    epsilon: float,
    w2: GrassmannPoint,
) -> bool:
    """Membership of w2 in the barrier region of w0 with thickness epsilon.

    True iff both angle gaps stay at least epsilon:
    theta_1 - theta_2 >= epsilon and theta_1 + theta_2 <= pi - epsilon.
    The geodesic endpoints of any equal-rate two-slot rotation at w0 have
    theta_1 = theta_2 and are therefore excluded for every epsilon > 0.
    """
    region = GrassmannBarrierRegion(w0, X1, epsilon)
    return barrier_margin(region.w0, w2) >= epsilon


def sweep_angle_range(
    w0: GrassmannPoint,
    X1: GrassmannTangent,
    w2: GrassmannPoint,
    grid: int = 2048,
    refine_tol: float = 1e-10,
) -> tuple[float, float]:
    """Min and max over t in [0, 2pi) of s(t) = theta_1 + theta_2 between the
    sweep point at parameter t and w2.

    Grid scan plus golden-section refinement of each extremum.
    """
    if X1.rank != 1:
        raise InvalidInputError("sweep direction must have rank 1")
    if abs(X1.norm - 1.0) >= _UNIT_TOL:
        raise InvalidInputError("sweep direction must have unit norm")

    E = X1.rotated_span_frame
    N = X1.rotated_normal_frame

    def sweep_point(t: float) -> GrassmannPoint:
        rows = E.copy()
        rows[0] = np.cos(t) * E[0] + np.sin(t) * N[0]
        return GrassmannPoint(Frame(rows))

    def s(t: float) -> float:
        return _two_largest_sum(principal_angles(sweep_point(t), w2))

    ts = np.linspace(0.0, 2 * np.pi, grid, endpoint=False)
    vals = np.array([s(t) for t in ts])

    def golden(fun, a, b):
        phi = (np.sqrt(5.0) - 1.0) / 2.0
        c = b - phi * (b - a)
        d = a + phi * (b - a)
        fc, fd = fun(c), fun(d)
        while abs(b - a) > refine_tol:
            if fc < fd:
                b, d, fd = d, c, fc
                c = b - phi * (b - a)
                fc = fun(c)
            else:
                a, c, fc = c, d, fd
                d = a + phi * (b - a)
                fd = fun(d)
        return fun(0.5 * (a + b))

    step = 2 * np.pi / grid
    kmin = int(np.argmin(vals))
    kmax = int(np.argmax(vals))
    smin = golden(s, ts[kmin] - step, ts[kmin] + step)
    smax = -golden(lambda t: -s(t), ts[kmax] - step, ts[kmax] + step)
    return min(smin, float(vals.min())), max(smax, float(vals.max()))


def sweep_crossing_contains(
    w0: GrassmannPoint,
    X1: GrassmannTangent,
    epsilon: float,
    w2: GrassmannPoint,
    grid: int = 2048,
) -> bool:
    """Leaf-crossing test: some sweep leaf shrunk by epsilon passes through
    w2, i.e. the continuous s(t) attains pi/2 - epsilon.

    On G+(1, m+1) = S^m this is exactly the tube-region membership test.
    """
    if not 0.0 < epsilon < np.pi / 2:
        raise InvalidInputError(f"epsilon must lie in (0, pi/2), got {epsilon}")
    smin, smax = sweep_angle_range(w0, X1, w2, grid=grid)
    level = np.pi / 2 - epsilon
    return smin <= level <= smax


def random_point(n: int, p: int, rng: np.random.Generator) -> GrassmannPoint:
    return GrassmannPoint.from_vectors(rng.standard_normal((p, n)))


def random_unit_tangent(w: GrassmannPoint, rng: np.random.Generator) -> GrassmannTangent:
    A = rng.standard_normal((w.p, w.n - w.p))
    return GrassmannTangent(w, A / np.linalg.norm(A))
