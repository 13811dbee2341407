"""Numerical geometry of convex-ball sweepout barriers on spheres and
oriented Grassmannians, with discrete harmonic-map flow experiments."""

from . import errors
from .exterior import (
    Frame,
    PVector,
    gram_schmidt,
    is_simple,
    pinner,
    plucker,
    pnorm,
    pvector_wedge,
    wedge,
)
from .flow import (
    DiscreteMap,
    DomainMesh,
    FlowConfig,
    FlowTrace,
    ProductSpheresTarget,
    ProductTubeRegion,
    SphereTarget,
    build_domain,
    cap_map,
    constant_map,
    dirichlet_energy,
    flow_step,
    grassmann_2_4_target,
    great_circle_map,
    icosphere,
    identity_map,
    max_tension,
    oscillation,
    retract_into_region,
    run_flow,
    tension_field,
    torus_grid,
)
from .gaussmap import (
    GaussAudit,
    ParametricImmersion,
    clifford_torus_immersion,
    clifford_torus_point,
    equator_immersion,
    gauss_image_audit,
    generalized_clifford_immersion,
    hypersurface_gauss,
    include_equatorially,
    mean_curvature_norm,
    normal_plane_gauss,
)
from .grassmann import (
    GrassmannBarrierRegion,
    GrassmannPoint,
    GrassmannTangent,
    ball_membership,
    barrier_margin,
    eta_basis,
    geodesic_distance,
    geodesic_point,
    main_region_contains,
    principal_angles,
    random_point,
    random_unit_tangent,
    same_oriented_plane,
    sweep_angle_range,
    sweep_crossing_contains,
    t_max,
)
from .quadric import (
    ChartPoint,
    ProjectivePoint,
    QuadricPoint,
    fs_distance,
    grassmann_to_quadric,
    ho_chart,
    ho_chart_inv,
    hyperplane_margins,
    product_region_contains,
    projectively_equal,
    quadric_residual,
    quadric_to_grassmann,
    split_s2xs2,
    unsplit_s2xs2,
)
from .sphere import (
    GreatCircle,
    SpherePoint,
    SphereTubeRegion,
    SubsphereFlag,
    build_maximal_set_region,
    circle_point,
    region_disconnection_check,
    sample_region,
    sample_sphere,
    sphere_distance,
    subsphere_distance,
    sweepout_leaf_find,
    tube_region_contains,
)

__version__ = "0.1.0"
