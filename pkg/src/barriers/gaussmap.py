"""Parametric minimal submanifolds of round spheres, their Gauss maps, and
hypothesis audits against barrier regions.

An immersion is a callable from parameters to a point of S^m in R^{m+1},
with analytic partial derivatives where the builder knows them and central
finite differences otherwise.  The hypersurface Gauss map sends a point to
its unit normal inside the sphere; in codimension 2 the Gauss map returns
the oriented normal 2-plane as a point of G+(2, m+1) in ambient
coordinates.  Normal orientation is fixed by a positive determinant of
(position, tangent frame, normal frame).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateInputError, InvalidInputError
from .exterior import Frame
from .grassmann import GrassmannBarrierRegion, GrassmannPoint, barrier_margin
from .sphere import SpherePoint, SphereTubeRegion, subsphere_distance

_FD_STEP = 1e-4


@dataclass
class ParametricImmersion:
    """Smooth immersion of a k-parameter domain into S^m subset R^{m+1}."""

    kind: str
    n_params: int
    ambient_dim: int
    evaluator: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray] | None = None
    periods: tuple[float, ...] | None = None

    def position(self, params) -> np.ndarray:
        x = np.asarray(self.evaluator(np.asarray(params, dtype=float)), dtype=float)
        if abs(np.linalg.norm(x) - 1.0) > 1e-10:
            raise InvalidInputError("immersion left the unit sphere")
        return x

    def tangents(self, params) -> np.ndarray:
        """Rows are the partial derivatives at the given parameters."""
        params = np.asarray(params, dtype=float)
        if self.jacobian is not None:
            return np.asarray(self.jacobian(params), dtype=float)
        out = np.empty((self.n_params, self.ambient_dim))
        for a in range(self.n_params):
            plus = params.copy()
            minus = params.copy()
            plus[a] += _FD_STEP
            minus[a] -= _FD_STEP
            out[a] = (self.evaluator(plus) - self.evaluator(minus)) / (2 * _FD_STEP)
        return out

    def parameter_grid(self, resolution: int) -> np.ndarray:
        """Uniform grid over one period box (or [0, pi] boxes for equators)."""
        periods = self.periods or tuple([np.pi] * self.n_params)
        axes = []
        for period in periods:
            # keep away from coordinate degeneracies at the box ends
            offset = 0.5 * period / resolution
            axes.append(np.linspace(offset, period - offset, resolution))
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


def equator_immersion(k: int, m: int) -> ParametricImmersion:
    """Totally geodesic S^k inside S^m (last m - k coordinates zero),
    parametrized by spherical angles."""
    if not 1 <= k < m:
        raise InvalidInputError("equator needs 1 <= k < m")

    def fn(t):
        x = np.zeros(m + 1)
        s = 1.0
        for a in range(k):
            x[a] = s * np.cos(t[a])
            s *= np.sin(t[a])
        x[k] = s
        return x

    periods = tuple([np.pi] * (k - 1) + [2 * np.pi])
    return ParametricImmersion("equator", k, m + 1, fn, periods=periods)


def clifford_torus_point(u: float, v: float):
    """Position, tangent pair, and unit normal (inside S^3) of the square
    torus at (u, v)."""
    s = 1.0 / np.sqrt(2.0)
    pos = s * np.array([np.cos(u), np.sin(u), np.cos(v), np.sin(v)])
    tu = s * np.array([-np.sin(u), np.cos(u), 0.0, 0.0])
    tv = s * np.array([0.0, 0.0, -np.sin(v), np.cos(v)])
    normal = s * np.array([np.cos(u), np.sin(u), -np.cos(v), -np.sin(v)])
    return pos, np.stack([tu, tv]), normal


def clifford_torus_immersion() -> ParametricImmersion:
    def fn(t):
        return clifford_torus_point(t[0], t[1])[0]

    def jac(t):
        return clifford_torus_point(t[0], t[1])[1]

    return ParametricImmersion(
        "clifford-torus", 2, 4, fn, jacobian=jac, periods=(2 * np.pi, 2 * np.pi)
    )


def generalized_clifford_immersion(p: int, q: int) -> ParametricImmersion:
    """Minimal product S^p(sqrt(p/(p+q))) x S^q(sqrt(q/(p+q))) in S^{p+q+1}."""
    if p < 1 or q < 1:
        raise InvalidInputError("factor dimensions must be at least 1")
    ra = np.sqrt(p / (p + q))
    rb = np.sqrt(q / (p + q))

    def sphere_coords(angles, dim):
        x = np.zeros(dim + 1)
        s = 1.0
        for a in range(dim):
            x[a] = s * np.cos(angles[a])
            s *= np.sin(angles[a])
        x[dim] = s
        return x

    def fn(t):
        return np.concatenate(
            [ra * sphere_coords(t[:p], p), rb * sphere_coords(t[p:], q)]
        )

    periods = tuple([np.pi] * (p - 1) + [2 * np.pi] + [np.pi] * (q - 1) + [2 * np.pi])
    return ParametricImmersion("generalized-clifford", p + q, p + q + 2, fn, periods=periods)


def from_callable(
    kind: str,
    n_params: int,
    ambient_dim: int,
    evaluator,
    jacobian=None,
    periods=None,
) -> ParametricImmersion:
    """User-supplied immersion; derivatives fall back to finite differences."""
    return ParametricImmersion(kind, n_params, ambient_dim, evaluator, jacobian, periods)


def include_equatorially(imm: ParametricImmersion) -> ParametricImmersion:
    """View an immersion into S^m as one into S^{m+1} via the equator
    (append a zero coordinate)."""

    def fn(t):
        return np.concatenate([imm.evaluator(t), [0.0]])

    jac = None
    if imm.jacobian is not None:

        def jac(t):
            J = imm.jacobian(t)
            return np.concatenate([J, np.zeros((J.shape[0], 1))], axis=1)

    return ParametricImmersion(
        imm.kind + "+equator", imm.n_params, imm.ambient_dim + 1, fn, jac, imm.periods
    )


def _normal_space(imm: ParametricImmersion, params, codim: int) -> np.ndarray:
    """Orthonormal basis (rows) of the normal space inside the sphere's
    tangent space, oriented so det(tangents, position, normals) > 0."""
    x = imm.position(params)
    T = imm.tangents(params)
    span = np.vstack([T, x[None, :]])
    smin = np.linalg.svd(span, compute_uv=False)[-1]
    if smin < 1e-10:
        raise DegenerateInputError("tangent frame is degenerate at these parameters")
    # orthonormalize the span, then complete with standard basis vectors
    q_span = np.linalg.qr(span.T)[0].T
    rows = [q_span[i] for i in range(len(q_span))]
    normals = []
    dim = imm.ambient_dim
    for k in range(dim):
        cand = np.zeros(dim)
        cand[k] = 1.0
        for r in rows:
            cand -= (r @ cand) * r
        nrm = np.linalg.norm(cand)
        if nrm > 1e-8:
            cand /= nrm
            rows.append(cand)
            normals.append(cand)
        if len(normals) == codim:
            break
    if len(normals) != codim:
        raise DegenerateInputError("could not complete a normal frame")
    N = np.stack(normals)
    if np.linalg.det(np.vstack([x[None, :], T, N])) < 0:
        N = N.copy()
        N[0] = -N[0]
    return N


def hypersurface_gauss(imm: ParametricImmersion, params) -> SpherePoint:
    """Unit normal of a codimension-1 immersion, as a point of the sphere."""
    if imm.ambient_dim - 2 != imm.n_params:
        raise InvalidInputError("hypersurface Gauss map needs codimension 1")
    return SpherePoint(_normal_space(imm, params, 1)[0])


def normal_plane_gauss(imm: ParametricImmersion, params) -> GrassmannPoint:
    """Oriented normal 2-plane of a codimension-2 immersion, in ambient
    coordinates (a point of G+(2, m+1))."""
    if imm.ambient_dim - 3 != imm.n_params:
        raise InvalidInputError("normal-plane Gauss map needs codimension 2")
    return GrassmannPoint(Frame(_normal_space(imm, params, 2)))


def mean_curvature_norm(imm: ParametricImmersion, params) -> float:
    """Norm of the mean curvature vector (trace of the second fundamental
    form) of the immersion as a submanifold of the sphere.

    Central differences of the tangent field with step 1e-4; the position
    and tangent directions are projected out of the second derivatives, so
    only the sphere-normal component contributes.
    """
    params = np.asarray(params, dtype=float)
    x = imm.position(params)
    T = imm.tangents(params)
    k = imm.n_params
    g = T @ T.T
    if np.linalg.cond(g) > 1e12:
        raise DegenerateInputError("first fundamental form is singular")
    ginv = np.linalg.inv(g)

    second = np.empty((k, k, imm.ambient_dim))
    for a in range(k):
        plus = params.copy()
        minus = params.copy()
        plus[a] += _FD_STEP
        minus[a] -= _FD_STEP
        second[a] = (imm.tangents(plus) - imm.tangents(minus)) / (2 * _FD_STEP)
    # symmetrize mixed partials from the two difference orders
    second = 0.5 * (second + second.transpose(1, 0, 2))

    span = np.vstack([T, x[None, :]])
    q_span = np.linalg.qr(span.T)[0]  # columns orthonormal

    H = np.zeros(imm.ambient_dim)
    for a in range(k):
        for b in range(k):
            vec = second[a, b]
            vec = vec - q_span @ (q_span.T @ vec)
            H += ginv[a, b] * vec
    return float(np.linalg.norm(H))


@dataclass
class GaussAudit:
    """Hypothesis audit of a Gauss image against a barrier region."""

    kind: str
    grid: int
    epsilon: float
    min_margin: float
    worst_point: tuple[float, ...]
    h1_zero_asserted: bool
    verdict: str
    margins: np.ndarray | None = None
    params: np.ndarray | None = None

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "grid": self.grid,
            "epsilon": self.epsilon,
            "min_margin": self.min_margin,
            "worst_point": list(self.worst_point),
            "h1_zero_asserted": self.h1_zero_asserted,
            "verdict": self.verdict,
        }


def _margin_at(imm, region, params) -> float:
    if isinstance(region, SphereTubeRegion):
        gauss = hypersurface_gauss(imm, params)
        return subsphere_distance(gauss, region.barrier_flag) - region.epsilon
    if isinstance(region, GrassmannBarrierRegion):
        gauss = normal_plane_gauss(imm, params)
        return barrier_margin(region.w0, gauss) - region.epsilon
    raise InvalidInputError(f"unsupported region type {type(region).__name__}")


def gauss_image_audit(
    imm: ParametricImmersion,
    region: SphereTubeRegion | GrassmannBarrierRegion,
    grid: int,
    h1_zero_asserted: bool,
) -> GaussAudit:
    """Evaluate the Gauss map on a parameter grid and report the smallest
    signed margin to the barrier together with the hypothesis verdict."""
    if isinstance(region, SphereTubeRegion):
        if region.ambient_dim != imm.ambient_dim:
            raise InvalidInputError("region ambient dimension does not match the Gauss target")
        if imm.ambient_dim - 2 != imm.n_params:
            raise InvalidInputError("sphere regions audit codimension-1 immersions")
    elif isinstance(region, GrassmannBarrierRegion):
        if region.w0.n != imm.ambient_dim:
            raise InvalidInputError("region ambient dimension does not match the Gauss target")
        if imm.ambient_dim - 3 != imm.n_params:
            raise InvalidInputError("plane regions audit codimension-2 immersions")
    else:
        raise InvalidInputError(f"unsupported region type {type(region).__name__}")

    pts = imm.parameter_grid(grid)
    margins = np.array([_margin_at(imm, region, p) for p in pts])
    worst = int(np.argmin(margins))
    min_margin = float(margins[worst])
    if not h1_zero_asserted:
        # the topological hypothesis is named first, regardless of margins
        verdict = "topological hypothesis failed: H1(M) = 0 not asserted"
    elif min_margin <= 0:
        verdict = "gauss-image hypothesis failed: image meets the barrier thickening"
    else:
        verdict = "hypotheses-met (conclusion: totally geodesic expected)"
    return GaussAudit(
        kind=imm.kind,
        grid=grid,
        epsilon=region.epsilon,
        min_margin=min_margin,
        worst_point=tuple(float(v) for v in pts[worst]),
        h1_zero_asserted=h1_zero_asserted,
        verdict=verdict,
        margins=margins,
        params=pts,
    )
