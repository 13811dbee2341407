"""Command-line harness: `barriers <module> <verb> [--config FILE]
[--seed N] [--out DIR] [--no-plot]`.

Every command writes CSV and JSON reports (and a figure, unless --no-plot)
into the output directory.  Exit codes: 0 success, 1 numeric failure,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import flow as flow_mod
from . import gaussmap, plots
from .config import (
    COMMAND_KEYS,
    ExperimentConfig,
    default_config,
    parse_config,
    serialize_config,
    unit_vector,
)
from .errors import BarriersError, ConfigError
from .exterior import Frame
from .grassmann import (
    GrassmannPoint,
    GrassmannTangent,
    geodesic_distance,
    geodesic_point,
    main_region_contains,
    principal_angles,
    random_point,
    sweep_angle_range,
    t_max,
)
from .quadric import (
    grassmann_to_quadric,
    ho_chart,
    ho_chart_inv,
    hyperplane_margins,
    projectively_equal,
    quadric_residual,
    quadric_to_grassmann,
)
from .report import FLOW_TRACE_HEADER, flow_trace_rows, fmt17, write_csv, write_json
from .sphere import (
    GreatCircle,
    SpherePoint,
    SphereTubeRegion,
    region_disconnection_check,
    sample_sphere,
    subsphere_distance,
    sweepout_leaf_find,
    tube_region_contains,
)


def _standard_point(n: int, p: int, rng: np.random.Generator) -> GrassmannPoint:
    """Random oriented p-plane: standard frame conjugated by a seeded rotation."""
    return random_point(n, p, rng)


def _two_slot_tangent(w: GrassmannPoint) -> GrassmannTangent:
    A = np.zeros((w.p, w.n - w.p))
    A[0, 0] = np.sqrt(0.5)
    A[1, 1] = np.sqrt(0.5)
    return GrassmannTangent(w, A)


def _rank_one_tangent(w: GrassmannPoint) -> GrassmannTangent:
    A = np.zeros((w.p, w.n - w.p))
    A[0, 0] = 1.0
    return GrassmannTangent(w, A)


# ---------------------------------------------------------------------------
# command handlers (return exit code)


def _cmd_grassmann_geodesic(cfg: ExperimentConfig, out: Path, plot: bool) -> int:
    rng = np.random.default_rng(cfg.seed)
    p, n = cfg["grassmann.p"], cfg["grassmann.n"]
    if p >= n:
        raise ConfigError("grassmann.p must be below grassmann.n")
    w = _standard_point(n, p, rng)
    A = rng.standard_normal((p, n - p))
    X = GrassmannTangent(w, A / np.linalg.norm(A))
    horizon = 0.9 * t_max(X)
    ts = np.linspace(0.0, horizon, cfg["grassmann.steps"])
    rows = []
    dists = []
    worst = 0.0
    for t in ts:
        wt = geodesic_point(X, float(t))
        d = geodesic_distance(w, wt)
        dists.append(d)
        worst = max(worst, abs(d - t))
        theta = principal_angles(w, wt)
        rows.append([float(t), d] + [float(v) for v in theta])
    header = ["t", "distance"] + [f"theta{i + 1}" for i in range(p)]
    write_csv(out / "grassmann_geodesic.csv", header, rows)
    write_json(
        out / "grassmann_geodesic.json",
        {
            "p": p,
            "n": n,
            "seed": cfg.seed,
            "t_max": t_max(X),
            "rates": [float(v) for v in X.rates],
            "max_unit_speed_error": worst,
        },
    )
    if plot:
        plots.geodesic_figure(ts, np.asarray(dists), out / "grassmann_geodesic.png")
    print(f"max |distance - t| over [0, 0.9 t_max]: {fmt17(worst)}")
    return 0


def _cmd_grassmann_tmax(cfg: ExperimentConfig, out: Path, plot: bool) -> int:
    rates = np.asarray(cfg["grassmann.rates"], dtype=float)
    if np.any(rates <= 0):
        raise ConfigError("grassmann.rates must be positive")
    if abs(np.linalg.norm(rates) - 1.0) > 1e-9:
        raise ConfigError("grassmann.rates must have unit Euclidean norm")
    r = len(rates)
    w = GrassmannPoint(Frame(np.eye(2 * r)[:r]))
    X = GrassmannTangent(w, np.diag(sorted(rates, reverse=True)))
    value = t_max(X)
    write_json(
        out / "grassmann_tmax.json",
        {"rates": [float(v) for v in rates], "t_max": value, "seed": cfg.seed},
    )
    print(fmt17(value))
    return 0


def _cmd_grassmann_region(cfg: ExperimentConfig, out: Path, plot: bool) -> int:
    rng = np.random.default_rng(cfg.seed)
    p, n, eps = cfg["grassmann.p"], cfg["grassmann.n"], cfg["grassmann.epsilon"]
    count = cfg["grassmann.count"]
    w0 = _standard_point(n, p, rng)
    X1 = _rank_one_tangent(w0)
    X2 = _two_slot_tangent(w0)
    tX2 = t_max(X2)
    exclusion_ok = True
    for sgn in (+1.0, -1.0):
        endpoint = geodesic_point(X2, sgn * tX2)
        if main_region_contains(w0, X1, eps, endpoint):
            exclusion_ok = False
    rows = []
    sums, gaps, members = [], [], []
    for k in range(count):
        w2 = random_point(n, p, rng)
        theta = principal_angles(w0, w2)
        s = float(theta[0] + theta[1])
        gap = float(theta[0] - theta[1])
        member = main_region_contains(w0, X1, eps, w2)
        smin, smax = sweep_angle_range(w0, X1, w2, grid=256)
        rows.append([k, float(theta[0]), float(theta[1]), s, gap, member, smin, smax])
        sums.append(s)
        gaps.append(gap)
        members.append(member)
    write_csv(
        out / "grassmann_region.csv",
        ["index", "theta1", "theta2", "sum", "gap", "member", "sweep_min", "sweep_max"],
        rows,
    )
    write_json(
        out / "grassmann_region.json",
        {
            "p": p,
            "n": n,
            "epsilon": eps,
            "seed": cfg.seed,
            "count": count,
            "members": int(sum(members)),
            "two_slot_endpoints_excluded": exclusion_ok,
            "t_x2": tX2,
        },
    )
    if plot:
        plots.angle_scatter(
            np.asarray(sums), np.asarray(gaps), eps, members, out / "grassmann_region.png"
        )
    print(f"members: {sum(members)}/{count}; endpoints excluded: {exclusion_ok}")
    return 0 if exclusion_ok else 1


def _sphere_region_from_cfg(m: int, eps: float) -> SphereTubeRegion:
    base = np.eye(m + 1)[0]
    direction = np.eye(m + 1)[1]
    return SphereTubeRegion(GreatCircle(SpherePoint(base), direction), eps)


def _cmd_sphere_region(cfg: ExperimentConfig, out: Path, plot: bool) -> int:
    rng = np.random.default_rng(cfg.seed)
    m, eps = cfg["sphere.m"], cfg["sphere.epsilon"]
    band = cfg["sphere.band"]
    region = _sphere_region_from_cfg(m, eps)
    pts = sample_sphere(m, cfg["sphere.samples"], rng)
    rows = []
    mism = 0
    checked = 0
    dists = []
    for k, coords in enumerate(pts):
        x = SpherePoint(coords)
        d = subsphere_distance(x, region.barrier_flag)
        inside = tube_region_contains(region, x)
        leaves = sweepout_leaf_find(region, x)
        in_band = abs(d - eps) <= band
        agree = inside == (len(leaves) > 0)
        if not in_band:
            checked += 1
            if not agree:
                mism += 1
        rows.append([k, d, inside, len(leaves), in_band])
        dists.append(d)
    write_csv(
        out / "sphere_region.csv",
        ["index", "barrier_distance", "contains", "leaf_count", "in_boundary_band"],
        rows,
    )
    write_json(
        out / "sphere_region.json",
        {
            "m": m,
            "epsilon": eps,
            "seed": cfg.seed,
            "samples": len(pts),
            "band": band,
            "checked": checked,
            "mismatches": mism,
        },
    )
    if plot:
        plots.margin_histogram(np.asarray(dists), eps, out / "sphere_region.png")
    print(f"membership agreement: {checked - mism}/{checked} outside band")
    return 0 if mism == 0 else 1


def _cmd_sphere_disconnect(cfg: ExperimentConfig, out: Path, plot: bool) -> int:
    m, eps = cfg["sphere.m"], cfg["sphere.epsilon"]
    region = _sphere_region_from_cfg(m, eps)
    count, pts, labels = region_disconnection_check(
        region,
        cfg["sphere.t0"],
        samples=cfg["sphere.samples"],
        seed=cfg.seed,
        neighbors=cfg["sphere.neighbors"],
        cutoff_factor=cfg["sphere.cutoff_factor"],
        return_labels=True,
    )
    intact = region_disconnection_check(
        region,
        None,
        samples=cfg["sphere.samples"],
        seed=cfg.seed,
        neighbors=cfg["sphere.neighbors"],
        cutoff_factor=cfg["sphere.cutoff_factor"],
    )
    rows = [[k] + [float(v) for v in pts[k]] + [int(labels[k])] for k in range(len(pts))]
    write_csv(
        out / "sphere_disconnect.csv",
        ["index"] + [f"x{i}" for i in range(m + 1)] + ["component"],
        rows,
    )
    write_json(
        out / "sphere_disconnect.json",
        {
            "m": m,
            "epsilon": eps,
            "seed": cfg.seed,
            "samples": cfg["sphere.samples"],
            "t0": cfg["sphere.t0"],
            "components_leaf_removed": count,
            "components_intact": intact,
        },
    )
    if plot:
        plots.disconnect_figure(pts, labels, out / "sphere_disconnect.png")
    print(f"components: {count} (leaf removed), {intact} (intact)")
    return 0


def _cmd_quadric_roundtrip(cfg: ExperimentConfig, out: Path, plot: bool) -> int:
    rng = np.random.default_rng(cfg.seed)
    k, count = cfg["quadric.k"], cfg["quadric.count"]
    n = k + 2
    rows = []
    worst_res = worst_chart = worst_plane = 0.0
    skipped = 0
    residuals = []
    for i in range(count):
        w = random_point(n, 2, rng)
        q = grassmann_to_quadric(w)
        res = quadric_residual(q.z)
        plane_err = geodesic_distance(w, quadric_to_grassmann(q))
        try:
            xi = ho_chart(q)
            q2 = ho_chart_inv(xi)
            chart_ok = projectively_equal(q, q2)
            chart_err = 0.0 if chart_ok else 1.0
            overlap = abs(np.vdot(q.z, q2.z)) / (np.linalg.norm(q.z) * np.linalg.norm(q2.z))
            chart_err = 1.0 - min(1.0, overlap)
        except BarriersError:
            skipped += 1
            chart_err = float("nan")
        rows.append([i, res, plane_err, chart_err])
        residuals.append(res)
        worst_res = max(worst_res, res)
        worst_plane = max(worst_plane, plane_err)
        if chart_err == chart_err:
            worst_chart = max(worst_chart, chart_err)
    write_csv(
        out / "quadric_roundtrip.csv",
        ["index", "quadric_residual", "plane_roundtrip", "chart_roundtrip"],
        rows,
    )
    ok = worst_res < 1e-10 and worst_chart < 1e-10 and worst_plane < 1e-10
    write_json(
        out / "quadric_roundtrip.json",
        {
            "k": k,
            "count": count,
            "seed": cfg.seed,
            "max_quadric_residual": worst_res,
            "max_chart_roundtrip": worst_chart,
            "max_plane_roundtrip": worst_plane,
            "chart_skipped_near_hyperplane": skipped,
            "within_tolerance": ok,
        },
    )
    if plot:
        plots.residual_histogram(residuals, out / "quadric_roundtrip.png")
    print(
        f"max residual {worst_res:.3e}, chart {worst_chart:.3e}, plane {worst_plane:.3e}"
        f" ({skipped} skipped near hyperplane)"
    )
    return 0 if ok else 1


def _cmd_quadric_chart(cfg: ExperimentConfig, out: Path, plot: bool) -> int:
    rng = np.random.default_rng(cfg.seed)
    k, count = cfg["quadric.k"], cfg["quadric.count"]
    rows = []
    residuals = []
    for i in range(count):
        xi = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        from .quadric import ChartPoint

        q = ho_chart_inv(ChartPoint(xi))
        m_h, m_hp = hyperplane_margins(q)
        back = ho_chart(q)
        err = float(np.abs(back.xi - xi).max())
        res = quadric_residual(q.z)
        rows.append([i, m_h, m_hp, res, err])
        residuals.append(res)
    write_csv(
        out / "quadric_chart.csv",
        ["index", "margin_h", "margin_hprime", "quadric_residual", "chart_roundtrip"],
        rows,
    )
    worst = max(r[4] for r in rows)
    write_json(
        out / "quadric_chart.json",
        {"k": k, "count": count, "seed": cfg.seed, "max_chart_roundtrip": worst},
    )
    if plot:
        plots.residual_histogram(residuals, out / "quadric_chart.png", title="quadric residuals")
    print(f"max chart round trip {worst:.3e}")
    return 0 if worst < 1e-10 else 1


def _build_flow_pieces(cfg: ExperimentConfig, seed: int):
    domain = cfg["flow.domain"]
    if domain == "torus-grid":
        mesh = flow_mod.torus_grid(cfg["flow.nu"], cfg["flow.nv"])
    else:
        mesh = flow_mod.icosphere(cfg["flow.level"])
    step = cfg["flow.step"] or flow_mod.DEFAULT_STEP[domain]

    target_kind = cfg["flow.target"]
    if target_kind == "sphere":
        target = flow_mod.SphereTarget(cfg["flow.target_dim"])
    elif target_kind == "grassmann-2-4":
        target = flow_mod.grassmann_2_4_target()
    else:
        target = flow_mod.ProductSpheresTarget(2, 2, scale=1.0)

    region = None
    if cfg["flow.mode"] == "region-constrained":
        eps = cfg["region.epsilon"]
        if target_kind == "sphere":
            base = unit_vector(cfg["region.base"], "region.base")
            direction = np.asarray(cfg["region.direction"], dtype=float)
            if base.shape[0] != target.ambient or direction.shape[0] != target.ambient:
                raise ConfigError("region vectors must match the target ambient dimension")
            direction = direction - (direction @ base) * base
            nrm = np.linalg.norm(direction)
            if nrm < 1e-9:
                raise ConfigError("region.direction is parallel to region.base")
            region = SphereTubeRegion(GreatCircle(SpherePoint(base), direction / nrm), eps)
        else:
            axis_a = unit_vector(cfg["region.base"][:3], "region.base")
            axis_b = unit_vector(cfg["region.direction"][:3], "region.direction")
            region = flow_mod.ProductTubeRegion(axis_a, axis_b, eps)

    rng = np.random.default_rng(seed)
    init_kind = cfg["flow.init"]
    if init_kind == "identity":
        init = flow_mod.identity_map(mesh, target)
    elif init_kind == "great-circle":
        init = flow_mod.great_circle_map(mesh, target)
    elif init_kind == "constant":
        if target_kind == "sphere":
            point = (
                region.circle.base.coords
                if isinstance(region, SphereTubeRegion)
                else np.eye(target.ambient)[0]
            )
            init = flow_mod.constant_map(mesh, target, point)
        else:
            a = _orthogonal_unit(region.axis_a if region else np.eye(3)[2])
            b = _orthogonal_unit(region.axis_b if region else np.eye(3)[2])
            init = flow_mod.constant_map(
                mesh, target, np.concatenate([target.scale * a, target.scale * b])
            )
    else:  # cap
        radius = cfg["flow.cap_radius"]
        if target_kind == "sphere":
            center = (
                region.circle.base.coords
                if isinstance(region, SphereTubeRegion)
                else np.eye(target.ambient)[0]
            )
            init = flow_mod.cap_map(mesh, target, center, radius, rng)
        else:
            a = _orthogonal_unit(region.axis_a if region else np.eye(3)[2])
            b = _orthogonal_unit(region.axis_b if region else np.eye(3)[2])
            init = flow_mod.product_cap_map(mesh, target, a, b, radius, rng)

    config = flow_mod.FlowConfig(
        step=step,
        max_iters=cfg["flow.max_iters"],
        tension_tol=cfg["flow.tension_tol"],
        oscillation_tol=cfg["flow.oscillation_tol"],
        mode=cfg["flow.mode"],
        region=region,
        seed=seed,
    )
    return mesh, target, init, config


def _orthogonal_unit(axis: np.ndarray) -> np.ndarray:
    for k in range(len(axis)):
        cand = np.zeros(len(axis))
        cand[k] = 1.0
        cand -= (cand @ axis) * axis
        nrm = np.linalg.norm(cand)
        if nrm > 1e-8:
            return cand / nrm
    raise ConfigError("could not build a point orthogonal to the region axis")


def _cmd_flow_run(cfg: ExperimentConfig, out: Path, plot: bool) -> int:
    runs = cfg["flow.runs"]

    def one(run_idx: int):
        seed = cfg.seed + run_idx
        mesh, target, init, config = _build_flow_pieces(cfg, seed)
        trace = flow_mod.run_flow(mesh, init, target, config)
        suffix = f"_run{run_idx}" if runs > 1 else ""
        write_csv(out / f"flow_trace{suffix}.csv", FLOW_TRACE_HEADER, flow_trace_rows(trace))
        write_json(out / f"flow_summary{suffix}.json", {"seed": seed, **trace.summary()})
        if plot:
            plots.flow_figure(trace, out / f"flow{suffix}.png")
        return run_idx, trace.status, trace.summary()

    if runs == 1:
        results = [one(0)]
    else:
        max_workers = int(os.environ.get("BARRIERS_THREADS", "0")) or min(runs, os.cpu_count() or 1)
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(one, range(runs)))
    for run_idx, status, summary in results:
        print(
            f"run {run_idx}: {status} after {summary['iters']} iterations, "
            f"final energy {fmt17(summary['final_energy'])}"
        )
    return 0


def _cmd_gauss_audit(cfg: ExperimentConfig, out: Path, plot: bool) -> int:
    kind = cfg["gauss.kind"]
    if kind == "clifford-torus":
        imm = gaussmap.clifford_torus_immersion()
    elif kind == "equator":
        imm = gaussmap.equator_immersion(cfg["gauss.k"], cfg["gauss.m"])
    else:
        imm = gaussmap.generalized_clifford_immersion(cfg["gauss.p"], cfg["gauss.q"])
    base = unit_vector(cfg["region.base"], "region.base")
    direction = np.asarray(cfg["region.direction"], dtype=float)
    if base.shape[0] != imm.ambient_dim or direction.shape[0] != imm.ambient_dim:
        raise ConfigError(
            f"region vectors must have dimension {imm.ambient_dim} for kind {kind!r}"
        )
    direction = direction - (direction @ base) * base
    nrm = np.linalg.norm(direction)
    if nrm < 1e-9:
        raise ConfigError("region.direction is parallel to region.base")
    region = SphereTubeRegion(
        GreatCircle(SpherePoint(base), direction / nrm), cfg["gauss.epsilon"]
    )
    audit = gaussmap.gauss_image_audit(imm, region, cfg["gauss.grid"], cfg["gauss.h1_zero"])
    # audit consistency: recomputing the margin at the worst point must agree
    recomputed = gaussmap._margin_at(imm, region, np.asarray(audit.worst_point))
    if abs(recomputed - audit.min_margin) > 1e-9:
        raise BarriersError("audit worst-point margin failed to reproduce")
    write_json(out / "gauss_audit.json", audit.to_json_dict())
    rows = [
        [i] + [float(v) for v in audit.params[i]] + [float(audit.margins[i])]
        for i in range(len(audit.margins))
    ]
    write_csv(
        out / "gauss_audit.csv",
        ["index"] + [f"param{i}" for i in range(imm.n_params)] + ["margin"],
        rows,
    )
    if plot:
        plots.audit_heatmap(audit.params, audit.margins, cfg["gauss.grid"], out / "gauss_audit.png")
    print(f"min margin {fmt17(audit.min_margin)}; verdict: {audit.verdict}")
    return 0


_HANDLERS = {
    ("grassmann", "geodesic"): _cmd_grassmann_geodesic,
    ("grassmann", "tmax"): _cmd_grassmann_tmax,
    ("grassmann", "region"): _cmd_grassmann_region,
    ("sphere", "region"): _cmd_sphere_region,
    ("sphere", "disconnect"): _cmd_sphere_disconnect,
    ("quadric", "roundtrip"): _cmd_quadric_roundtrip,
    ("quadric", "chart"): _cmd_quadric_chart,
    ("flow", "run"): _cmd_flow_run,
    ("gauss", "audit"): _cmd_gauss_audit,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="barriers",
        description="Barrier-region experiments on spheres and oriented Grassmannians.",
    )
    sub = parser.add_subparsers(dest="module", required=True)
    verbs: dict[str, list[str]] = {}
    for module, verb in _HANDLERS:
        verbs.setdefault(module, []).append(verb)
    for module, verblist in verbs.items():
        msub = sub.add_parser(module).add_subparsers(dest="verb", required=True)
        for verb in verblist:
            vp = msub.add_parser(verb)
            vp.add_argument("--config", type=Path, default=None, help="key-value config file")
            vp.add_argument("--seed", type=int, default=None, help="override the config seed")
            vp.add_argument("--out", type=Path, default=Path("out"), help="output directory")
            vp.add_argument("--no-plot", action="store_true", help="skip figure rendering")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = (args.module, args.verb)
    try:
        if args.config is not None:
            if not args.config.exists():
                raise ConfigError(f"config file {args.config} does not exist")
            cfg = parse_config(command, args.config.read_text(encoding="utf-8"))
        else:
            cfg = default_config(command)
        if args.seed is not None:
            cfg.values["seed"] = int(args.seed)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{args.module}_{args.verb}_config.txt").write_text(
            serialize_config(cfg), encoding="utf-8"
        )
        return _HANDLERS[command](cfg, out, not args.no_plot)
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 2
    except BarriersError as exc:
        print(f"error: numeric: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
