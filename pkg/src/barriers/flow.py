"""Discrete Dirichlet energy, tension field, and projected gradient flow for
maps from compact meshed domains into spheres and sphere products.

The energy is the chordal one, E = 1/2 sum_e w_e |phi(u) - phi(v)|^2, and
the tension field is the mass-normalized graph Laplacian projected onto the
target's tangent space; for isometrically embedded targets the projection
supplies the curvature term of the Euler-Lagrange equation.  Updates are
Jacobi style: every vertex moves from the previous iterate, then the whole
map is re-projected onto the target.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .errors import ConfigError, InvalidInputError
from .sphere import SphereTubeRegion, SpherePoint, subsphere_distance

DEFAULT_TENSION_TOL = 1e-6
DEFAULT_OSCILLATION_TOL = 1e-2
DEFAULT_STEP = {"torus-grid": 0.2, "icosphere": 0.1}


# ---------------------------------------------------------------------------
# domains


@dataclass
class DomainMesh:
    """Weighted mesh of a compact surface.

    vertices holds parameter coordinates for the flat torus and embedded
    positions for the icosphere; edges/weights/masses define the discrete
    Dirichlet energy and Laplacian.
    """

    tag: str
    vertices: np.ndarray
    edges: np.ndarray
    weights: np.ndarray
    masses: np.ndarray
    faces: list[tuple[int, ...]]
    params: dict = field(default_factory=dict)
    _laplacian: sparse.csr_matrix | None = field(default=None, repr=False)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - len(self.edges) + len(self.faces)

    def laplacian(self) -> sparse.csr_matrix:
        """Graph Laplacian W - D (negative semidefinite convention)."""
        if self._laplacian is None:
            n = self.n_vertices
            i, j = self.edges[:, 0], self.edges[:, 1]
            w = self.weights
            rows = np.concatenate([i, j, i, j])
            cols = np.concatenate([j, i, i, j])
            vals = np.concatenate([w, w, -w, -w])
            self._laplacian = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))
        return self._laplacian


def torus_grid(nu: int, nv: int) -> DomainMesh:
    """Flat periodic grid on [0, 2pi)^2 with the 4-neighbor stencil.

    Edge weights h_v/h_u (u-edges) and h_u/h_v (v-edges) make the Laplacian
    consistent for any aspect ratio; they reduce to the uniform unit
    weights on square grids.  Vertex mass is the cell area.
    """
    if nu < 8 or nv < 8:
        raise ConfigError("torus grid needs nu, nv >= 8")
    hu, hv = 2 * np.pi / nu, 2 * np.pi / nv
    ii, jj = np.meshgrid(np.arange(nu), np.arange(nv), indexing="ij")
    verts = np.stack([ii.ravel() * hu, jj.ravel() * hv], axis=1)

    def vid(i, j):
        return (i % nu) * nv + (j % nv)

    edges = []
    weights = []
    for i in range(nu):
        for j in range(nv):
            edges.append((vid(i, j), vid(i + 1, j)))
            weights.append(hv / hu)
            edges.append((vid(i, j), vid(i, j + 1)))
            weights.append(hu / hv)
    faces = [
        (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1))
        for i in range(nu)
        for j in range(nv)
    ]
    masses = np.full(nu * nv, hu * hv)
    return DomainMesh(
        "torus-grid",
        verts,
        np.asarray(edges, dtype=int),
        np.asarray(weights, dtype=float),
        masses,
        faces,
        params={"nu": nu, "nv": nv},
    )


def icosphere(level: int) -> DomainMesh:
    """Subdivided icosahedron projected to the unit sphere, with cotangent
    edge weights and barycentric lumped vertex masses."""
    if level < 2:
        raise ConfigError("icosphere needs level >= 2")
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
            (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
            (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
        ],
        dtype=float,
    )
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [tuple(v) for v in verts]
    for _ in range(level):
        cache: dict[tuple[int, int], int] = {}
        new_faces = []

        def midpoint(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = np.asarray(verts[a]) + np.asarray(verts[b])
                m /= np.linalg.norm(m)
                verts.append(tuple(m))
                cache[key] = len(verts) - 1
            return cache[key]

        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    V = np.asarray(verts)
    n = len(V)

    weight_map: dict[tuple[int, int], float] = {}
    masses = np.zeros(n)
    for a, b, c in faces:
        pa, pb, pc = V[a], V[b], V[c]
        area = 0.5 * np.linalg.norm(np.cross(pb - pa, pc - pa))
        for v in (a, b, c):
            masses[v] += area / 3.0
        for (i, j, k) in ((a, b, c), (b, c, a), (c, a, b)):
            # cotangent at vertex k, opposite edge (i, j)
            u, v = V[i] - V[k], V[j] - V[k]
            cot = float(u @ v) / np.linalg.norm(np.cross(u, v))
            key = (min(i, j), max(i, j))
            weight_map[key] = weight_map.get(key, 0.0) + 0.5 * cot
    edges = np.asarray(sorted(weight_map), dtype=int)
    weights = np.asarray([weight_map[tuple(e)] for e in edges])
    return DomainMesh("icosphere", V, edges, weights, masses, faces, params={"level": level})


def build_domain(kind: str, **params) -> DomainMesh:
    if kind == "torus-grid":
        return torus_grid(int(params["nu"]), int(params["nv"]))
    if kind == "icosphere":
        return icosphere(int(params["level"]))
    raise ConfigError(f"unknown domain kind {kind!r}")


def mesh_area(mesh: DomainMesh) -> float:
    return float(mesh.masses.sum())


# ---------------------------------------------------------------------------
# targets


class SphereTarget:
    """Round unit sphere S^m embedded in R^{m+1}."""

    kind = "sphere"

    def __init__(self, dim: int):
        if dim < 1:
            raise ConfigError("sphere dimension must be >= 1")
        self.dim = dim
        self.ambient = dim + 1

    def project(self, values: np.ndarray) -> np.ndarray:
        return values / np.linalg.norm(values, axis=-1, keepdims=True)

    def tangent_project(self, values: np.ndarray, vectors: np.ndarray) -> np.ndarray:
        rad = np.einsum("ij,ij->i", values, vectors)[:, None]
        return vectors - rad * values

    def membership_residual(self, values: np.ndarray) -> float:
        return float(np.abs(np.linalg.norm(values, axis=-1) - 1.0).max())

    def pair_distances(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        dots = np.einsum("ij,ij->i", a, b)
        return np.arccos(np.clip(dots, -1.0, 1.0))

    def all_distances(self, values: np.ndarray) -> np.ndarray:
        return np.arccos(np.clip(values @ values.T, -1.0, 1.0))


class ProductSpheresTarget:
    """Product of two round spheres, each of radius `scale`, embedded in the
    concatenation of their ambient spaces."""

    kind = "product-spheres"

    def __init__(self, dim_a: int, dim_b: int, scale: float = 1.0):
        self.dim_a, self.dim_b, self.scale = dim_a, dim_b, scale
        self.split_at = dim_a + 1
        self.ambient = dim_a + dim_b + 2

    def _factors(self, values):
        return values[..., : self.split_at], values[..., self.split_at :]

    def project(self, values: np.ndarray) -> np.ndarray:
        a, b = self._factors(values)
        a = self.scale * a / np.linalg.norm(a, axis=-1, keepdims=True)
        b = self.scale * b / np.linalg.norm(b, axis=-1, keepdims=True)
        return np.concatenate([a, b], axis=-1)

    def tangent_project(self, values: np.ndarray, vectors: np.ndarray) -> np.ndarray:
        out = vectors.copy()
        for sl in (slice(None, self.split_at), slice(self.split_at, None)):
            v, x = vectors[:, sl], values[:, sl]
            rad = np.einsum("ij,ij->i", x, v)[:, None] / self.scale**2
            out[:, sl] = v - rad * x
        return out

    def membership_residual(self, values: np.ndarray) -> float:
        a, b = self._factors(values)
        ra = np.abs(np.linalg.norm(a, axis=-1) - self.scale).max()
        rb = np.abs(np.linalg.norm(b, axis=-1) - self.scale).max()
        return float(max(ra, rb))

    def pair_distances(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        xa, xb = self._factors(x)
        ya, yb = self._factors(y)
        tha = np.arccos(np.clip(np.einsum("ij,ij->i", xa, ya) / self.scale**2, -1.0, 1.0))
        thb = np.arccos(np.clip(np.einsum("ij,ij->i", xb, yb) / self.scale**2, -1.0, 1.0))
        return self.scale * np.sqrt(tha**2 + thb**2)

    def all_distances(self, values: np.ndarray) -> np.ndarray:
        a, b = self._factors(values)
        tha = np.arccos(np.clip(a @ a.T / self.scale**2, -1.0, 1.0))
        thb = np.arccos(np.clip(b @ b.T / self.scale**2, -1.0, 1.0))
        return self.scale * np.sqrt(tha**2 + thb**2)


def grassmann_2_4_target() -> ProductSpheresTarget:
    """G+(2, 4) as the product of two 2-spheres of radius 1/sqrt(2); factor
    coordinates are the split_s2xs2 pair scaled by 1/sqrt(2)."""
    return ProductSpheresTarget(2, 2, scale=1.0 / np.sqrt(2.0))


# ---------------------------------------------------------------------------
# regions for constrained flow


@dataclass(frozen=True)
class ProductTubeRegion:
    """Per-factor pole avoidance on a product of 2-spheres."""

    axis_a: np.ndarray
    axis_b: np.ndarray
    epsilon: float

    def __post_init__(self):
        if not 0.0 < self.epsilon < np.pi / 2:
            raise InvalidInputError("epsilon must lie in (0, pi/2)")
        for name in ("axis_a", "axis_b"):
            v = np.asarray(getattr(self, name), dtype=float)
            if abs(np.linalg.norm(v) - 1.0) > 1e-9:
                raise InvalidInputError(f"{name} must be a unit vector")
            v = v.copy()
            v.flags.writeable = False
            object.__setattr__(self, name, v)


def retract_into_region(
    x: SpherePoint, region: SphereTubeRegion, fallback_rng: np.random.Generator | None = None
) -> SpherePoint:
    """Pull a sphere point back onto the closed region {barrier distance >= eps}.

    Points already inside are returned unchanged; others are moved to the
    distance-epsilon shell along the barrier-normal component.  A point with
    no normal component is pushed in a direction drawn from the fallback rng.
    """
    out = _retract_rows(
        x.coords[None, :], region, fallback_rng or np.random.default_rng(0)
    )
    return SpherePoint(out[0])


def _retract_rows(
    values: np.ndarray, region: SphereTubeRegion, rng: np.random.Generator
) -> np.ndarray:
    Z = region.barrier_flag.normals  # (2, ambient)
    proj = values @ Z.T  # components on the barrier-normal span
    pnorm = np.linalg.norm(proj, axis=1)
    dist = np.arcsin(np.clip(pnorm, 0.0, 1.0))
    bad = dist < region.epsilon
    if not np.any(bad):
        return values
    out = values.copy()
    eps = region.epsilon
    for i in np.nonzero(bad)[0]:
        p_part = proj[i] @ Z
        if pnorm[i] < 1e-12:
            coeff = rng.standard_normal(2)
            p_part = (coeff / np.linalg.norm(coeff)) @ Z
        else:
            p_part = p_part / pnorm[i]
        q_part = out[i] - (out[i] @ Z.T) @ Z
        qn = np.linalg.norm(q_part)
        if qn < 1e-12:
            # entirely inside the barrier span: already at distance pi/2
            continue
        out[i] = np.sin(eps) * p_part + np.cos(eps) * q_part / qn
    return out


def _retract_rows_product(
    values: np.ndarray, region: ProductTubeRegion, target: ProductSpheresTarget,
    rng: np.random.Generator,
) -> np.ndarray:
    out = values.copy()
    eps = region.epsilon
    for sl, axis in (
        (slice(None, target.split_at), region.axis_a),
        (slice(target.split_at, None), region.axis_b),
    ):
        block = out[:, sl] / target.scale
        c = block @ axis
        bad = np.abs(c) > np.cos(eps)
        for i in np.nonzero(bad)[0]:
            pole = np.sign(c[i]) * axis
            trans = block[i] - (block[i] @ pole) * pole
            tn = np.linalg.norm(trans)
            if tn < 1e-12:
                trans = rng.standard_normal(block.shape[1])
                trans -= (trans @ pole) * pole
                tn = np.linalg.norm(trans)
            block[i] = np.cos(eps) * pole + np.sin(eps) * trans / tn
        out[:, sl] = target.scale * block
    return out


# ---------------------------------------------------------------------------
# maps, energy, tension


@dataclass
class DiscreteMap:
    """One target point per mesh vertex."""

    values: np.ndarray

    @classmethod
    def validated(cls, values: np.ndarray, target) -> "DiscreteMap":
        values = np.asarray(values, dtype=float)
        if target.membership_residual(values) > 1e-9:
            raise InvalidInputError("map values violate the target membership invariant")
        return cls(values)


def dirichlet_energy(mesh: DomainMesh, values: np.ndarray) -> float:
    diff = values[mesh.edges[:, 0]] - values[mesh.edges[:, 1]]
    return float(0.5 * np.sum(mesh.weights * np.einsum("ij,ij->i", diff, diff)))


def tension_field(mesh: DomainMesh, values: np.ndarray, target) -> np.ndarray:
    """Mass-normalized Laplacian projected to the target tangent spaces."""
    raw = mesh.laplacian() @ values
    raw /= mesh.masses[:, None]
    return target.tangent_project(values, raw)


def max_tension(mesh: DomainMesh, values: np.ndarray, target) -> float:
    return float(np.linalg.norm(tension_field(mesh, values, target), axis=1).max())


def oscillation(
    values: np.ndarray, target, seed: int = 42, pair_budget: int = 1_000_000
) -> float:
    """Largest pairwise geodesic distance of the image; all pairs below 2000
    vertices, a seeded random pair sample above."""
    n = len(values)
    if n <= 1:
        return 0.0
    if n < 2000:
        return float(target.all_distances(values).max())
    rng = np.random.default_rng(seed)
    i = rng.integers(0, n, size=pair_budget)
    j = rng.integers(0, n, size=pair_budget)
    return float(target.pair_distances(values[i], values[j]).max())


# ---------------------------------------------------------------------------
# the flow


@dataclass
class FlowConfig:
    step: float = 0.2
    max_iters: int = 50_000
    tension_tol: float = DEFAULT_TENSION_TOL
    oscillation_tol: float = DEFAULT_OSCILLATION_TOL
    mode: str = "free"  # or "region-constrained"
    region: SphereTubeRegion | ProductTubeRegion | None = None
    seed: int = 42

    def __post_init__(self):
        if self.step <= 0:
            raise ConfigError("step must be positive")
        if self.tension_tol <= 0 or self.oscillation_tol <= 0:
            raise ConfigError("tolerances must be positive")
        if self.mode not in ("free", "region-constrained"):
            raise ConfigError(f"unknown flow mode {self.mode!r}")
        if self.mode == "region-constrained" and self.region is None:
            raise ConfigError("region-constrained mode needs a region")


@dataclass
class FlowTrace:
    iterations: np.ndarray
    energy: np.ndarray
    max_tension: np.ndarray
    oscillation: np.ndarray
    step: np.ndarray
    barrier_events: list[tuple[int, int, float]]
    status: str
    final_values: np.ndarray

    @property
    def iters(self) -> int:
        return int(self.iterations[-1])

    def summary(self) -> dict:
        return {
            "status": self.status,
            "iters": self.iters,
            "final_energy": float(self.energy[-1]),
            "initial_energy": float(self.energy[0]),
            "final_oscillation": float(self.oscillation[-1]),
            "barrier_events": len(self.barrier_events),
        }


def _region_violations(values: np.ndarray, region, target) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(region, SphereTubeRegion):
        Z = region.barrier_flag.normals
        dist = np.arcsin(np.clip(np.linalg.norm(values @ Z.T, axis=1), 0.0, 1.0))
    else:
        a = values[:, : target.split_at] / target.scale
        b = values[:, target.split_at :] / target.scale
        da = np.arccos(np.clip(np.abs(a @ region.axis_a), -1.0, 1.0))
        db = np.arccos(np.clip(np.abs(b @ region.axis_b), -1.0, 1.0))
        dist = np.minimum(da, db)
    bad = dist < region.epsilon - 1e-12
    return bad, region.epsilon - dist


def flow_step(
    mesh: DomainMesh,
    values: np.ndarray,
    target,
    step: float,
    region=None,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """One explicit step: move along the tension field, project to the
    target, then (if a region is given) retract into it."""
    tau = tension_field(mesh, values, target)
    cand = target.project(values + step * tau)
    if region is not None:
        rng = rng or np.random.default_rng(0)
        if isinstance(region, SphereTubeRegion):
            cand = _retract_rows(cand, region, rng)
        else:
            cand = _retract_rows_product(cand, region, target, rng)
    return cand


def run_flow(mesh: DomainMesh, init: DiscreteMap, target, config: FlowConfig) -> FlowTrace:
    """Fixed-step descent with halving on energy increase.

    Terminates when the max tension norm drops below tension_tol, the
    iteration budget runs out, or the step underflows 1e-8; the terminal
    map is classified constant iff its oscillation is below
    oscillation_tol.
    """
    values = np.asarray(init.values, dtype=float)
    if target.membership_residual(values) > 1e-9:
        raise InvalidInputError("initial map violates the target membership invariant")
    rng = np.random.default_rng(config.seed)
    region = config.region if config.mode == "region-constrained" else None
    watch_region = config.region  # free mode still logs barrier events

    cols = {k: [] for k in ("it", "E", "tau", "osc", "step")}
    events: list[tuple[int, int, float]] = []
    step = config.step
    status = "max-iters"
    energy = dirichlet_energy(mesh, values)

    for it in range(config.max_iters + 1):
        tau_max = max_tension(mesh, values, target)
        osc = oscillation(values, target, seed=config.seed)
        cols["it"].append(it)
        cols["E"].append(energy)
        cols["tau"].append(tau_max)
        cols["osc"].append(osc)
        cols["step"].append(step)

        if watch_region is not None:
            bad, depth = _region_violations(values, watch_region, target)
            for v in np.nonzero(bad)[0]:
                events.append((int(v), it, float(depth[v])))

        if tau_max < config.tension_tol:
            status = (
                "converged-constant" if osc < config.oscillation_tol else "converged-nonconstant"
            )
            break
        if it == config.max_iters:
            status = "max-iters"
            break

        while True:
            cand = flow_step(mesh, values, target, step, region=region, rng=rng)
            cand_energy = dirichlet_energy(mesh, cand)
            if cand_energy <= energy:
                values, energy = cand, cand_energy
                break
            step *= 0.5
            if step < 1e-8:
                status = "stalled-flow"
                break
        if status == "stalled-flow":
            break

    return FlowTrace(
        iterations=np.asarray(cols["it"], dtype=int),
        energy=np.asarray(cols["E"]),
        max_tension=np.asarray(cols["tau"]),
        oscillation=np.asarray(cols["osc"]),
        step=np.asarray(cols["step"]),
        barrier_events=events,
        status=status,
        final_values=values,
    )


# ---------------------------------------------------------------------------
# initializations


def constant_map(mesh: DomainMesh, target, point: np.ndarray) -> DiscreteMap:
    values = np.tile(np.asarray(point, dtype=float), (mesh.n_vertices, 1))
    return DiscreteMap.validated(values, target)


def identity_map(mesh: DomainMesh, target: SphereTarget) -> DiscreteMap:
    if mesh.tag != "icosphere" or target.ambient != 3:
        raise ConfigError("identity initialization needs an icosphere domain and an S^2 target")
    return DiscreteMap.validated(mesh.vertices.copy(), target)


def great_circle_map(mesh: DomainMesh, target: SphereTarget) -> DiscreteMap:
    """(u, v) -> (cos u, sin u, 0, ...) on a torus grid."""
    if mesh.tag != "torus-grid":
        raise ConfigError("great-circle initialization needs a torus grid")
    u = mesh.vertices[:, 0]
    values = np.zeros((mesh.n_vertices, target.ambient))
    values[:, 0] = np.cos(u)
    values[:, 1] = np.sin(u)
    return DiscreteMap.validated(values, target)


def product_cap_map(
    mesh: DomainMesh,
    target: ProductSpheresTarget,
    center_a: np.ndarray,
    center_b: np.ndarray,
    radius: float,
    rng: np.random.Generator,
) -> DiscreteMap:
    """Independent random caps on the two factors (radius in factor angle)."""
    fa = SphereTarget(target.dim_a)
    fb = SphereTarget(target.dim_b)
    va = cap_map(mesh, fa, center_a, radius, rng).values
    vb = cap_map(mesh, fb, center_b, radius, rng).values
    values = np.concatenate([target.scale * va, target.scale * vb], axis=1)
    return DiscreteMap.validated(values, target)


def cap_map(
    mesh: DomainMesh,
    target: SphereTarget,
    center: np.ndarray,
    radius: float,
    rng: np.random.Generator,
) -> DiscreteMap:
    """Random values in the geodesic cap of the given radius around center."""
    c = np.asarray(center, dtype=float)
    c = c / np.linalg.norm(c)
    d = target.ambient
    basis = [c]
    for k in range(d):
        cand = np.zeros(d)
        cand[k] = 1.0
        for b in basis:
            cand -= (b @ cand) * b
        nrm = np.linalg.norm(cand)
        if nrm > 1e-8:
            basis.append(cand / nrm)
        if len(basis) == d:
            break
    tangent = np.stack(basis[1:])  # (d-1, d)
    n = mesh.n_vertices
    r = radius * np.sqrt(rng.uniform(size=n))
    dirs = rng.standard_normal((n, d - 1))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    values = np.cos(r)[:, None] * c + np.sin(r)[:, None] * (dirs @ tangent)
    return DiscreteMap.validated(values, target)
