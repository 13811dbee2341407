"""Round-sphere geometry and barrier regions built from great-circle sweepouts.

A tube region on S^m is the complement of the open epsilon-neighborhood of
the codimension-2 subsphere orthogonal to a great circle's plane.  The same
set is swept out by the boundaries of the convex balls B(Gamma(t), pi/2 - eps)
centered along the circle, with antipodal centers identified: a point at
distance pi/2 + eps from Gamma(t) lies on the leaf of -Gamma(t).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    DegenerateInputError,
    InsufficientSamplingError,
    InvalidInputError,
)

_UNIT_TOL = 1e-9


def _as_unit(coords, tol=_UNIT_TOL):
    x = np.asarray(coords, dtype=float)
    if x.ndim != 1:
        raise InvalidInputError("expected a 1-d coordinate vector")
    if abs(np.linalg.norm(x) - 1.0) >= tol:
        raise InvalidInputError(f"vector norm {np.linalg.norm(x):.12f} is not 1 within {tol:g}")
    x = x.copy()
    x.flags.writeable = False
    return x


@dataclass(frozen=True)
class SpherePoint:
    """Unit vector in R^{m+1}."""

    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", _as_unit(self.coords))

    @property
    def ambient_dim(self) -> int:
        return self.coords.shape[0]


@dataclass(frozen=True)
class SubsphereFlag:
    """Ordered orthonormal normals z_0..z_a cutting out the subsphere
    {x : <z_i, x> = 0 for all i}.  An empty flag cuts out the whole sphere."""

    normals: np.ndarray

    def __post_init__(self):
        Z = np.asarray(self.normals, dtype=float)
        if Z.size == 0 and Z.ndim != 2:
            Z = Z.reshape(0, 0)
        if Z.ndim != 2:
            raise InvalidInputError("normals must form a (count, ambient) array")
        if len(Z):
            gram = Z @ Z.T
            if np.abs(gram - np.eye(len(Z))).max() >= _UNIT_TOL:
                raise InvalidInputError("flag normals are not orthonormal within 1e-9")
        Z = Z.copy()
        Z.flags.writeable = False
        object.__setattr__(self, "normals", Z)

    def __len__(self) -> int:
        return len(self.normals)


@dataclass(frozen=True)
class GreatCircle:
    """Unit-speed closed geodesic t -> cos(t) base + sin(t) direction."""

    base: SpherePoint
    direction: np.ndarray

    def __post_init__(self):
        v = _as_unit(self.direction)
        if v.shape != self.base.coords.shape:
            raise InvalidInputError("base point and direction live in different dimensions")
        if abs(float(v @ self.base.coords)) >= _UNIT_TOL:
            raise InvalidInputError("direction must be tangent: <V, base> = 0 within 1e-9")
        object.__setattr__(self, "direction", v)

    def point(self, t: float) -> np.ndarray:
        return np.cos(t) * self.base.coords + np.sin(t) * self.direction


@dataclass(frozen=True)
class SphereTubeRegion:
    """Barrier region on S^m determined by a great circle and a thickness.

    Membership: distance to the codimension-2 barrier subsphere (the one
    orthogonal to both circle spanners) is at least epsilon.  Leaves of the
    equivalent sweepout are distance spheres of radius pi/2 - epsilon
    around circle points, antipodal centers identified.
    """

    circle: GreatCircle
    epsilon: float
    ball_radius: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.epsilon < np.pi / 2:
            raise InvalidInputError(f"epsilon must lie in (0, pi/2), got {self.epsilon}")
        # leaves must stay strictly convex: radius < convexity radius pi/2
        object.__setattr__(self, "ball_radius", np.pi / 2 - self.epsilon)

    @property
    def barrier_flag(self) -> SubsphereFlag:
        return SubsphereFlag(np.stack([self.circle.base.coords, self.circle.direction]))

    @property
    def ambient_dim(self) -> int:
        return self.circle.base.ambient_dim


def sphere_distance(x: SpherePoint, y: SpherePoint) -> float:
    if x.ambient_dim != y.ambient_dim:
        raise InvalidInputError("points live on spheres of different dimension")
    return float(np.arccos(np.clip(x.coords @ y.coords, -1.0, 1.0)))


def circle_point(circle: GreatCircle, t: float) -> SpherePoint:
    return SpherePoint(circle.point(t) / np.linalg.norm(circle.point(t)))


def subsphere_distance(x: SpherePoint, flag: SubsphereFlag) -> float:
    """Geodesic distance from x to {y : <z_i, y> = 0 for all flag normals}.

    Equals arcsin of the norm of the projection onto span(normals); an
    empty flag gives 0.
    """
    if len(flag) == 0:
        return 0.0
    if flag.normals.shape[1] != x.ambient_dim:
        raise InvalidInputError("flag normals and point have different ambient dimensions")
    proj = flag.normals @ x.coords
    return float(np.arcsin(np.clip(np.linalg.norm(proj), 0.0, 1.0)))


def tube_region_contains(region: SphereTubeRegion, x: SpherePoint, slack: float = 1e-12) -> bool:
    """Closed-form membership: barrier distance >= epsilon (minus slack)."""
    if x.ambient_dim != region.ambient_dim:
        raise InvalidInputError("point dimension does not match region")
    return subsphere_distance(x, region.barrier_flag) >= region.epsilon - slack


def _circle_distances(region: SphereTubeRegion, x: SpherePoint, ts: np.ndarray) -> np.ndarray:
    c = region.circle
    dots = np.cos(ts) * float(c.base.coords @ x.coords) + np.sin(ts) * float(
        c.direction @ x.coords
    )
    return np.arccos(np.clip(dots, -1.0, 1.0))


def sweepout_leaf_find(
    region: SphereTubeRegion,
    x: SpherePoint,
    grid: int = 4096,
    tol: float = 1e-9,
) -> list[float]:
    """Parameters t in [0, 2pi) whose leaf boundary passes through x.

    Scans dist(x, Gamma(t)) - ball_radius for sign changes on a uniform
    grid and refines each by bisection.  A point at distance
    pi/2 + epsilon from Gamma(t) is picked up automatically at t + pi,
    where the distance to the antipodal center equals the leaf radius.
    Returns an empty list exactly when x lies in the barrier thickening.
    """
    ts = np.linspace(0.0, 2 * np.pi, grid, endpoint=False)
    level = region.ball_radius
    g = _circle_distances(region, x, ts) - level

    def gfun(t):
        return float(_circle_distances(region, x, np.array([t]))[0] - level)

    roots: list[float] = []
    for k in range(grid):
        a = ts[k]
        b = a + 2 * np.pi / grid
        ga, gb = g[k], g[(k + 1) % grid]
        if ga == 0.0:
            roots.append(a)
            continue
        if ga * gb < 0:
            lo, hi, glo = a, b, ga
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                gm = gfun(mid)
                if gm == 0.0:
                    lo = hi = mid
                elif glo * gm < 0:
                    hi = mid
                else:
                    lo, glo = mid, gm
            roots.append(0.5 * (lo + hi) % (2 * np.pi))
    roots.sort()
    deduped: list[float] = []
    for r in roots:
        if not deduped or min(abs(r - deduped[-1]), 2 * np.pi - abs(r - deduped[-1])) > 10 * tol:
            deduped.append(r)
    if len(deduped) >= 2:
        wrap = deduped[0] + 2 * np.pi - deduped[-1]
        if wrap <= 10 * tol:
            deduped.pop()
    return deduped


def build_maximal_set_region(
    interior_flag: SubsphereFlag, x0: SpherePoint, epsilon: float
) -> SphereTubeRegion:
    """Region from a recursively flagged subsphere chain.

    The circle goes through a deterministically chosen point xbar (first
    standard basis vector with a usable component orthogonal to
    span{x0, flag normals}, normalized) and satisfies Gamma(pi/2) = x0, so
    the direction vector is x0 itself.  Every circle point stays
    orthogonal to all flag normals.
    """
    dim = x0.ambient_dim
    if len(interior_flag) and interior_flag.normals.shape[1] != dim:
        raise InvalidInputError("flag normals and x0 have different ambient dimensions")
    if len(interior_flag):
        if np.abs(interior_flag.normals @ x0.coords).max() >= _UNIT_TOL:
            raise InvalidInputError("x0 must be orthogonal to every flag normal")
    span = x0.coords[None, :]
    if len(interior_flag):
        span = np.vstack([span, interior_flag.normals])
    xbar = None
    for k in range(dim):
        cand = np.zeros(dim)
        cand[k] = 1.0
        cand = cand - span.T @ (span @ cand)
        nrm = np.linalg.norm(cand)
        if nrm > 1e-8:
            xbar = cand / nrm
            break
    if xbar is None:
        raise DegenerateInputError(
            "no unit vector orthogonal to x0 and all flag normals exists"
        )
    circle = GreatCircle(SpherePoint(xbar), x0.coords)
    return SphereTubeRegion(circle, epsilon)


class UnionFind:
    """Union-find with path compression, enough to count components."""

    def __init__(self, size: int):
        self.parent = list(range(size))
        self.count = size

    def find(self, a: int) -> int:
        p = a
        while p != self.parent[p]:
            p = self.parent[p]
        while a != p:
            self.parent[a], a = p, self.parent[a]
        return p

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra
            self.count -= 1


def sample_sphere(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples on S^dim as a (count, dim+1) array."""
    raw = rng.standard_normal((count, dim + 1))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def sample_region(
    region: SphereTubeRegion, count: int, rng: np.random.Generator, batch: int | None = None
) -> np.ndarray:
    """Rejection-sample `count` uniform points of the region."""
    dim = region.ambient_dim - 1
    flag = region.barrier_flag.normals
    batch = batch or max(4 * count, 1024)
    chunks: list[np.ndarray] = []
    have = 0
    while have < count:
        raw = sample_sphere(dim, batch, rng)
        dist = np.arcsin(np.clip(np.linalg.norm(raw @ flag.T, axis=1), 0.0, 1.0))
        good = raw[dist >= region.epsilon]
        chunks.append(good)
        have += len(good)
    return np.concatenate(chunks)[:count]


def region_disconnection_check(
    region: SphereTubeRegion,
    t0: float | None,
    samples: int = 10000,
    seed: int = 42,
    neighbors: int = 12,
    cutoff_factor: float = 3.5,
    leaf_clearance: float | None = None,
    return_labels: bool = False,
):
    """Count connected components of the sampled region, optionally with a
    leaf removed.

    Works in the antipodal quotient: graph distances are
    min(d(x, y), d(x, -y)), and the removed leaf is the full quotient
    class {dist to Gamma(t0) = ball_radius} u {= pi - ball_radius}.  The
    clearance around the leaf defaults to the edge cutoff so that no graph
    edge can bridge the removed band; the cutoff itself is
    cutoff_factor * (median nearest-neighbor spacing).
    """
    if samples < 1000:
        raise InvalidInputError("need at least 10^3 samples")
    rng = np.random.default_rng(seed)
    X = sample_region(region, samples, rng)
    n = len(X)

    tree = cKDTree(np.vstack([X, -X]))
    nn_chord = np.median(tree.query(X, k=2)[0][:, 1])
    spacing = 2 * np.arcsin(min(1.0, nn_chord / 2))
    cutoff = cutoff_factor * spacing
    clearance = max(1e-2, cutoff) if leaf_clearance is None else leaf_clearance

    if t0 is None:
        keep = np.ones(n, dtype=bool)
    elif clearance >= region.epsilon:
        # the band swallowed by the removal would merge with the barrier
        # tube; more samples shrink the spacing-driven clearance
        raise InsufficientSamplingError(
            f"leaf clearance {clearance:.3f} >= epsilon {region.epsilon}; "
            "increase `samples` to resolve the leaf removal"
        )
    else:
        center = region.circle.point(t0)
        f = np.arccos(np.clip(X @ center, -1.0, 1.0))
        f_quot = np.minimum(f, np.pi - f)
        keep = np.abs(f_quot - region.ball_radius) >= clearance
    idx = np.nonzero(keep)[0]
    if len(idx) < 100:
        raise InsufficientSamplingError(
            f"only {len(idx)} samples survive leaf removal; increase `samples`"
        )

    chord_cut = 2 * np.sin(min(cutoff, np.pi) / 2)
    dist, nbr = tree.query(X[idx], k=neighbors + 2)
    pos = -np.ones(n, dtype=int)
    pos[idx] = np.arange(len(idx))
    uf = UnionFind(len(idx))
    for row in range(len(idx)):
        i = idx[row]
        for d, jraw in zip(dist[row], nbr[row]):
            j = jraw % n
            if j == i or d > chord_cut or pos[j] < 0:
                continue
            uf.union(row, pos[j])
    if not return_labels:
        return uf.count
    labels = np.fromiter((uf.find(a) for a in range(len(idx))), dtype=int)
    _, labels = np.unique(labels, return_inverse=True)
    return uf.count, X[idx], labels
