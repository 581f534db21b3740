"""Command-line surface: fit, map, eval, boundary, reconstruct, sample-domain,
plot, audit.

Configuration is JSON with a fixed schema (unknown keys rejected); every
default matches the values the method was reported with. Logs go to stderr,
data products only to files. Exit codes: 0 success, 1 runtime numeric
failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io as pcio
from .domains import PRESETS, Domain, load_domain, preset_domain
from .geometry import angle_distortion, sampling_gap_estimate
from .losses import LegConfig, ObjectiveConfig, audit_theorem_bound, lambda_pair_from_inverse
from .meshing import (
    InverseInterpolator,
    boundary_edges,
    delaunay,
    prune_long_faces,
    reconstruct_surface,
)
from .neural import NetworkSpec, forward, load_checkpoint, save_checkpoint
from .optimizer import RmsPropConfig, StageConfig, _chunked_hausdorff, train
from .svgplot import histogram_svg, line_series_svg, scatter_svg
from .boltzmann import extremum_error_and_bound

log = logging.getLogger("pcparam")


class ConfigError(Exception):
    """Anything wrong with arguments, config files, or input paths."""


# ---------------------------------------------------------------------------
# run configuration
# ---------------------------------------------------------------------------

_MODES = ("shape_matching", "free_boundary", "fixed_boundary", "landmark")

_DEFAULTS = {
    "mode": "fixed_boundary",
    "seed": 0,
    "domain": {"preset": "square"},
    "objective": {"beta1": 5.0, "beta2": 1.0, "beta3": 1.0},
    "stage": {
        "epochs": 10000,
        "batch_points": 1024,
        "batch_domain": 1024,
        "sigma": 0.5,
        "alpha_init": 2.0,
        "alpha_final": 20.0,
        "sigma_min": 0.001,
        "alpha_max": 100.0,
        "epochs_min": 1000,
    },
    "optimizer": {"learning_rate": 1e-4, "rho": 0.99, "momentum": 0.9, "eps": 1e-8},
    "domain_size": 4096,
    "fixed_domain_pool": False,
    "eval_sample_size": 4096,
    "eval_mesh": None,
}

_TOP_KEYS = {
    "input", "output_dir", "mode", "seed", "domain", "objective", "stage",
    "optimizer", "map_net", "lambda_net", "landmarks", "domain_size",
    "fixed_domain_pool", "eval_sample_size", "eval_mesh",
}
_NET_KEYS = {"hidden_widths", "omega"}


def _check_keys(section: dict, allowed: set, where: str) -> None:
    for key in section:
        if key not in allowed:
            label = f"{where}.{key}" if where else key
            raise ConfigError(f"unknown config key {label!r}")


def _merge_section(cfg: dict, name: str) -> dict:
    given = cfg.get(name, {})
    if not isinstance(given, dict):
        raise ConfigError(f"config key {name!r} must be an object")
    _check_keys(given, set(_DEFAULTS[name]), name)
    return {**_DEFAULTS[name], **given}


def _validate_landmarks(entries) -> list[dict]:
    if not isinstance(entries, list):
        raise ConfigError("config key 'landmarks' must be a list")
    out = []
    for k, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise ConfigError(f"landmarks[{k}] must be an object")
        _check_keys(entry, {"rows", "target"}, f"landmarks[{k}]")
        rows = entry.get("rows")
        target = entry.get("target")
        if not (isinstance(rows, list) and rows and
                all(isinstance(i, int) and not isinstance(i, bool) and i >= 0 for i in rows)):
            raise ConfigError(f"landmarks[{k}].rows must be a non-empty list of indices")
        if not (isinstance(target, list) and target and
                all(isinstance(p, list) and len(p) == 2 for p in target)):
            raise ConfigError(f"landmarks[{k}].target must be a non-empty list of [x, y]")
        out.append({"rows": list(rows), "target": [[float(a), float(b)] for a, b in target]})
    return out


def load_run_config(path, out_dir_override=None) -> dict:
    """Parse + validate a fit config file; returns the merged dict.

    Net widths stay unresolved (they depend on the cloud dimension); use
    finalize_config for the full effective form.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    _check_keys(raw, _TOP_KEYS, "")

    cfg: dict = {}
    if "input" not in raw:
        raise ConfigError("config key 'input' is required")
    cfg["input"] = str(raw["input"])
    out_dir = out_dir_override or raw.get("output_dir")
    if not out_dir:
        raise ConfigError("config key 'output_dir' is required (or pass --out-dir)")
    cfg["output_dir"] = str(out_dir)

    cfg["mode"] = raw.get("mode", _DEFAULTS["mode"])
    if cfg["mode"] not in _MODES:
        raise ConfigError(f"mode must be one of {_MODES}, got {cfg['mode']!r}")
    seed = raw.get("seed", _DEFAULTS["seed"])
    if not (isinstance(seed, int) and not isinstance(seed, bool) and seed >= 0):
        raise ConfigError(f"seed must be a non-negative integer, got {seed!r}")
    cfg["seed"] = seed

    domain = raw.get("domain", _DEFAULTS["domain"])
    if not isinstance(domain, dict):
        raise ConfigError("config key 'domain' must be an object")
    _check_keys(domain, {"preset", "file"}, "domain")
    if len(domain) != 1:
        raise ConfigError("domain needs exactly one of 'preset' or 'file'")
    if "preset" in domain and domain["preset"] not in PRESETS:
        raise ConfigError(f"domain preset must be one of {PRESETS}, got {domain['preset']!r}")
    cfg["domain"] = dict(domain)

    cfg["objective"] = _merge_section(raw, "objective")
    cfg["stage"] = _merge_section(raw, "stage")
    cfg["optimizer"] = _merge_section(raw, "optimizer")

    for name in ("map_net", "lambda_net"):
        if name in raw:
            net = raw[name]
            if not isinstance(net, dict):
                raise ConfigError(f"config key {name!r} must be an object")
            _check_keys(net, _NET_KEYS, name)
            widths = net.get("hidden_widths")
            if widths is not None and not (
                isinstance(widths, list) and widths
                and all(isinstance(w, int) and not isinstance(w, bool) and w >= 1 for w in widths)
            ):
                raise ConfigError(f"{name}.hidden_widths must be a list of positive integers")
            cfg[name] = {k: net[k] for k in net}

    if "landmarks" in raw:
        cfg["landmarks"] = _validate_landmarks(raw["landmarks"])

    for name in ("domain_size", "eval_sample_size"):
        val = raw.get(name, _DEFAULTS[name])
        if not (isinstance(val, int) and not isinstance(val, bool) and val >= 1):
            raise ConfigError(f"{name} must be a positive integer, got {val!r}")
        cfg[name] = val
    pool = raw.get("fixed_domain_pool", _DEFAULTS["fixed_domain_pool"])
    if not isinstance(pool, bool):
        raise ConfigError(f"fixed_domain_pool must be a boolean, got {pool!r}")
    cfg["fixed_domain_pool"] = pool
    mesh = raw.get("eval_mesh", _DEFAULTS["eval_mesh"])
    if mesh is not None and not isinstance(mesh, str):
        raise ConfigError(f"eval_mesh must be a path or null, got {mesh!r}")
    cfg["eval_mesh"] = mesh
    return cfg


def finalize_config(cfg: dict, input_dim: int) -> dict:
    """Resolve net defaults for the cloud dimension and apply mode forcing."""
    eff = json.loads(json.dumps(cfg))  # deep copy of plain JSON data
    map_widths = [256] * 5 if input_dim == 3 else [64] * 3
    net = eff.setdefault("map_net", {})
    net.setdefault("hidden_widths", map_widths)
    net.setdefault("omega", 1.0)
    lnet = eff.setdefault("lambda_net", {})
    lnet.setdefault("hidden_widths", [128] * 3)
    lnet.setdefault("omega", 1.0)

    mode = eff["mode"]
    obj = eff["objective"]
    landmarks = eff.get("landmarks", [])
    if mode == "shape_matching":
        obj["beta1"] = 0.0
        obj["beta3"] = 0.0
    elif mode == "free_boundary":
        obj["beta2"] = 0.0
        obj["beta3"] = 0.0
    elif mode == "fixed_boundary":
        obj["beta3"] = 0.0
    if mode != "landmark" and landmarks:
        raise ConfigError(f"landmarks are only allowed in landmark mode, not {mode!r}")
    if mode == "landmark" and not landmarks:
        raise ConfigError("landmark mode needs a non-empty 'landmarks' list")
    if mode in ("free_boundary", "fixed_boundary", "landmark") and obj["beta1"] <= 0:
        raise ConfigError(f"{mode} mode needs beta1 > 0")
    if mode in ("shape_matching", "fixed_boundary", "landmark") and obj["beta2"] <= 0:
        raise ConfigError(f"{mode} mode needs beta2 > 0")
    if mode == "landmark" and obj["beta3"] <= 0:
        raise ConfigError("landmark mode needs beta3 > 0")
    return eff


def _domain_from_config(domain_cfg: dict) -> Domain:
    if "preset" in domain_cfg:
        return preset_domain(domain_cfg["preset"])
    try:
        return load_domain(domain_cfg["file"])
    except OSError as exc:
        raise ConfigError(f"cannot read domain file: {exc}") from exc


def _load_cloud_checked(path) -> np.ndarray:
    try:
        return pcio.load_cloud(path)
    except OSError as exc:
        raise ConfigError(f"cannot read cloud {path}: {exc}") from exc


def _load_checkpoint_checked(path) -> tuple[NetworkSpec, np.ndarray]:
    try:
        return load_checkpoint(path)
    except OSError as exc:
        raise ConfigError(f"cannot read checkpoint {path}: {exc}") from exc


def _mesh_vertices_for(cloud: np.ndarray, mesh):
    """Reconcile a loaded (always 3-column) mesh with a 2-d training cloud."""
    from .geometry import TriangleMesh

    if cloud.shape[1] == 2 and mesh.vertices.shape[1] == 3:
        if (mesh.vertices[:, 2] == 0.0).all():
            return TriangleMesh(mesh.vertices[:, :2].copy(), mesh.triangles)
    return mesh


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_fit(args) -> int:
    cfg = load_run_config(args.config, out_dir_override=args.out_dir)
    cloud = _load_cloud_checked(cfg["input"])
    eff = finalize_config(cfg, cloud.shape[1])
    if args.print_effective_config:
        sys.stdout.write(json.dumps(eff, indent=1, sort_keys=True) + "\n")
        return 0

    domain = _domain_from_config(eff["domain"])
    try:
        objective = ObjectiveConfig(**eff["objective"])
        stage = StageConfig(**eff["stage"])
        optimizer = RmsPropConfig(**eff["optimizer"])
        map_spec = NetworkSpec(
            input_dim=cloud.shape[1],
            hidden_widths=tuple(eff["map_net"]["hidden_widths"]),
            output_dim=2,
            output_activation="linear",
            omega=float(eff["map_net"]["omega"]),
        )
        lambda_spec = None
        if objective.beta1 > 0:
            lambda_spec = NetworkSpec(
                input_dim=cloud.shape[1],
                hidden_widths=tuple(eff["lambda_net"]["hidden_widths"]),
                output_dim=1,
                output_activation="softplus",
                omega=float(eff["lambda_net"]["omega"]),
            )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    landmarks = [np.array(e["rows"], dtype=np.int64) for e in eff.get("landmarks", [])]
    targets = [np.array(e["target"], dtype=np.float64) for e in eff.get("landmarks", [])]
    eval_mesh = None
    if eff["eval_mesh"] is not None:
        try:
            eval_mesh = _mesh_vertices_for(cloud, pcio.load_mesh(eff["eval_mesh"]))
        except OSError as exc:
            raise ConfigError(f"cannot read eval_mesh: {exc}") from exc

    out_dir = Path(eff["output_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)

    def on_stage(stage_idx, record, map_params, lambda_params):
        save_checkpoint(out_dir / f"map_stage{stage_idx}.ckpt.json", map_spec, map_params)
        if lambda_params is not None:
            save_checkpoint(
                out_dir / f"lambda_stage{stage_idx}.ckpt.json", lambda_spec, lambda_params
            )
        log.info(
            "stage %d done: loss %.6g, hausdorff %.6g",
            stage_idx, record.loss_total, record.eval_hausdorff,
        )

    try:
        result = train(
            cloud,
            domain,
            objective=objective,
            stage=stage,
            optimizer=optimizer,
            map_spec=map_spec,
            lambda_spec=lambda_spec,
            landmarks=landmarks,
            targets=targets,
            seed=eff["seed"],
            domain_size=eff["domain_size"],
            fixed_domain_pool=eff["fixed_domain_pool"],
            eval_mesh=eval_mesh,
            eval_sample_size=eff["eval_sample_size"],
            stage_callback=on_stage,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    save_checkpoint(out_dir / "map.ckpt.json", result.map_spec, result.map_params)
    if result.lambda_params is not None:
        save_checkpoint(
            out_dir / "lambda.ckpt.json", result.lambda_spec, result.lambda_params
        )
    (out_dir / "log.csv").write_text(result.log.to_csv())
    mapped = forward(result.map_spec, result.map_params, cloud)
    pcio.save_cloud(out_dir / "mapped.csv", mapped)
    (out_dir / "effective_config.json").write_text(
        json.dumps(eff, indent=1, sort_keys=True) + "\n"
    )
    log.info("fit complete: %d stages, outputs in %s", len(result.log.records), out_dir)
    return 0


def cmd_map(args) -> int:
    spec, params = _load_checkpoint_checked(args.checkpoint)
    cloud = _load_cloud_checked(args.input)
    if spec.input_dim != cloud.shape[1]:
        raise ConfigError(
            f"checkpoint expects {spec.input_dim}-d input, cloud is {cloud.shape[1]}-d"
        )
    pcio.save_cloud(args.out, forward(spec, params, cloud))
    if args.lambda_checkpoint:
        lspec, lparams = _load_checkpoint_checked(args.lambda_checkpoint)
        if lspec.input_dim != cloud.shape[1]:
            raise ConfigError(
                f"lambda checkpoint expects {lspec.input_dim}-d input, "
                f"cloud is {cloud.shape[1]}-d"
            )
        vals = forward(lspec, lparams, cloud).ravel()
        pcio.save_table(args.lambda_out, ["lambda_inv"], [[v] for v in vals])
    return 0


def cmd_eval(args) -> int:
    spec, params = _load_checkpoint_checked(args.checkpoint)
    cloud = _load_cloud_checked(args.input)
    if spec.input_dim != cloud.shape[1]:
        raise ConfigError(
            f"checkpoint expects {spec.input_dim}-d input, cloud is {cloud.shape[1]}-d"
        )
    domain = _domain_from_args(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(args.seed)
    dense = domain.sample_area(args.sample_size, rng)
    denser = domain.sample_area(4 * args.sample_size, rng)
    mapped = forward(spec, params, cloud)
    rows = [
        ["hausdorff", _chunked_hausdorff(mapped, dense)],
        ["domain_sample_gap", sampling_gap_estimate(dense, denser)],
        ["mapped_sample_gap", sampling_gap_estimate(mapped, denser)],
    ]
    if args.mesh:
        try:
            mesh = _mesh_vertices_for(cloud, pcio.load_mesh(args.mesh))
        except OSError as exc:
            raise ConfigError(f"cannot read mesh: {exc}") from exc
        report = angle_distortion(mesh, mapped, n_bins=args.bins)
        rows.append(["mean_abs_angle", report.mean_abs])
        pcio.save_table(
            out_dir / "histogram.csv",
            ["bin_left", "bin_right", "count"],
            [
                [report.hist_edges[i], report.hist_edges[i + 1], int(report.hist_counts[i])]
                for i in range(len(report.hist_counts))
            ],
        )
    pcio.save_table(out_dir / "metrics.csv", ["metric", "value"], rows)
    log.info("eval metrics written to %s", out_dir / "metrics.csv")
    return 0


def cmd_boundary(args) -> int:
    if args.mapped:
        mapped = _load_cloud_checked(args.mapped)
        if mapped.shape[1] != 2:
            raise ConfigError(f"mapped cloud must be 2-d, got {mapped.shape[1]}-d")
    else:
        if not (args.checkpoint and args.input):
            raise ConfigError("boundary needs --mapped or both --checkpoint and --input")
        spec, params = _load_checkpoint_checked(args.checkpoint)
        cloud = _load_cloud_checked(args.input)
        if spec.input_dim != cloud.shape[1]:
            raise ConfigError(
                f"checkpoint expects {spec.input_dim}-d input, cloud is {cloud.shape[1]}-d"
            )
        mapped = forward(spec, params, cloud)
    if args.h <= 0:
        raise ConfigError(f"--h must be positive, got {args.h}")

    mesh = delaunay(mapped)
    pruned = prune_long_faces(mesh, args.h)
    if len(pruned.triangles) == 0:
        raise RuntimeError(f"pruning at h={args.h} removed every face")
    loops = boundary_edges(pruned)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    polylines = []
    for li, loop in enumerate(loops):
        pts = pruned.vertices[loop]
        polylines.append(pts)
        for order, (vid, (x, y)) in enumerate(zip(loop, pts)):
            rows.append([li, order, int(vid), x, y])
    pcio.save_table(out_dir / "loops.csv", ["loop", "order", "vertex", "x", "y"], rows)
    (out_dir / "boundary.svg").write_text(scatter_svg(mapped, loops=polylines))
    log.info("%d boundary loop(s) written to %s", len(loops), out_dir)
    return 0


def cmd_reconstruct(args) -> int:
    spec, params = _load_checkpoint_checked(args.checkpoint)
    cloud = _load_cloud_checked(args.input)
    if spec.input_dim != cloud.shape[1]:
        raise ConfigError(
            f"checkpoint expects {spec.input_dim}-d input, cloud is {cloud.shape[1]}-d"
        )
    domain = _domain_from_args(args)
    mapped = forward(spec, params, cloud)

    field = None
    if args.mode == "lambda_adapted":
        if not args.lambda_checkpoint:
            raise ConfigError("lambda_adapted mode needs --lambda-checkpoint")
        lspec, lparams = _load_checkpoint_checked(args.lambda_checkpoint)
        if lspec.input_dim != cloud.shape[1]:
            raise ConfigError(
                f"lambda checkpoint expects {lspec.input_dim}-d input, "
                f"cloud is {cloud.shape[1]}-d"
            )
        lam_vals = forward(lspec, lparams, cloud).ravel()
        interp = InverseInterpolator(mapped, lam_vals)

        def field(pts: np.ndarray) -> np.ndarray:
            pts = np.atleast_2d(np.asarray(pts, dtype=np.float64))
            vals, ok = interp(pts)
            vals = vals.ravel()
            for i in np.flatnonzero(~ok):
                nearest = int(np.linalg.norm(mapped - pts[i], axis=1).argmin())
                vals[i] = lam_vals[nearest]
            return vals

    result = reconstruct_surface(
        mapped, cloud, domain,
        mode=args.mode, target_edge=args.target_edge, seed=args.seed,
        lambda_inv_field=field,
    )
    pcio.save_mesh(args.out, result.surface)
    if args.param_out:
        pcio.save_mesh(args.param_out, result.param)
    log.info(
        "reconstructed %d vertices / %d faces to %s",
        len(result.surface.vertices), len(result.surface.triangles), args.out,
    )
    return 0


def cmd_sample_domain(args) -> int:
    domain = _domain_from_args(args)
    rng = np.random.default_rng(args.seed)
    if args.kind == "area":
        pts = domain.sample_area(args.n, rng)
    else:
        pts = domain.sample_boundary(args.n, rng)
    pcio.save_cloud(args.out, pts)
    return 0


def _parse_float_cells(header: list[str], rows: list[list[str]], path) -> np.ndarray:
    try:
        float(header[0])
    except ValueError:
        pass  # real header line
    else:
        rows = [header] + rows
    try:
        return np.array([[float(c) for c in row] for row in rows], dtype=np.float64)
    except ValueError as exc:
        raise ConfigError(f"{path}: non-numeric cell: {exc}") from exc


def cmd_plot(args) -> int:
    try:
        header, rows = pcio.load_table(args.input)
    except OSError as exc:
        raise ConfigError(f"cannot read {args.input}: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    if args.kind == "stage_lines":
        series: dict[str, list[tuple[float, float]]] = {}
        wanted = ["loss_total", "eval_hausdorff", "eval_mean_abs_angle"]
        if "stage" not in header:
            raise ConfigError(f"{args.input}: no 'stage' column")
        si = header.index("stage")
        for name in wanted:
            if name not in header:
                continue
            ci = header.index(name)
            pts = [
                (float(row[si]), float(row[ci]))
                for row in rows
                if len(row) > max(si, ci) and row[ci] != ""
            ]
            series[name] = pts
        svg = line_series_svg(series)
    elif args.kind == "scatter":
        data = _parse_float_cells(header, rows, args.input)
        if data.size and data.shape[1] < 2:
            raise ConfigError(f"{args.input}: scatter needs at least 2 columns")
        svg = scatter_svg(data[:, :2] if data.size else np.empty((0, 2)))
    else:  # histogram
        data = _parse_float_cells(header, rows, args.input)
        values = data[:, 0] if data.size else np.array([])
        counts, edges = np.histogram(values, bins=args.bins)
        svg = histogram_svg(counts, edges)
    Path(args.out).write_text(svg)
    return 0


def cmd_audit(args) -> int:
    if args.kind == "extremum":
        rng = np.random.default_rng(args.seed)
        alphas = (1.0, 2.0, 5.0, 10.0, 50.0)
        rows = []
        violations = 0
        for trial in range(args.trials):
            n = int(rng.integers(2, 65))
            scale = 10.0 ** rng.uniform(-1.0, 2.0)
            values = rng.normal(0.0, scale, n)
            for alpha in alphas:
                err_max, bound_max, err_min, bound_min = extremum_error_and_bound(
                    values, alpha
                )
                ok = err_max <= bound_max and err_min <= bound_min
                violations += 0 if ok else 1
                rows.append(
                    [trial, n, alpha, err_max, bound_max, err_min, bound_min, int(ok)]
                )
        pcio.save_table(
            args.out,
            ["trial", "n", "alpha", "err_max", "bound_max", "err_min", "bound_min", "ok"],
            rows,
        )
        log.info("%d checks, %d violations", len(rows), violations)
        if violations:
            raise RuntimeError(f"{violations} extremum bound violations (see {args.out})")
        return 0

    # distortion-bound
    for name in ("mesh", "mapped", "lambda_inv"):
        if getattr(args, name) is None:
            raise ConfigError(f"audit --kind distortion-bound needs --{name.replace('_', '-')}")
    try:
        mesh = pcio.load_mesh(args.mesh)
    except OSError as exc:
        raise ConfigError(f"cannot read mesh: {exc}") from exc
    mapped = _load_cloud_checked(args.mapped)
    header, rows = pcio.load_table(args.lambda_inv)
    vals = _parse_float_cells(header, rows, args.lambda_inv)[:, 0]
    report = audit_theorem_bound(
        mesh, mapped, lambda_pair_from_inverse(vals), LegConfig(sigma=args.sigma)
    )
    names = [
        "lhs", "rhs", "holds", "d_sigma", "lambda0", "lambda_t",
        "r_lambda", "max_edge", "n_points", "n_triangles",
    ]
    pcio.save_table(
        args.out, names,
        [[getattr(report, n) if n != "holds" else int(report.holds) for n in names]],
    )
    log.info("bound %s: lhs=%.6g rhs=%.6g", "holds" if report.holds else "FAILS",
             report.lhs, report.rhs)
    if not report.holds:
        raise RuntimeError(f"distortion bound violated: lhs={report.lhs} < rhs={report.rhs}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _domain_from_args(args) -> Domain:
    if getattr(args, "domain_file", None):
        try:
            return load_domain(args.domain_file)
        except OSError as exc:
            raise ConfigError(f"cannot read domain file: {exc}") from exc
    return preset_domain(args.domain_preset)


def _add_domain_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--domain-preset", choices=PRESETS, default="square")
    p.add_argument("--domain-file", default=None, help="JSON domain file (overrides preset)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcparam",
        description="Point-cloud surface parametrization over small sine networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="train the parametrization on a cloud")
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out-dir", default=None, help="override config output_dir")
    p.add_argument("--print-effective-config", action="store_true")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("map", help="apply a trained checkpoint to a cloud")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lambda-checkpoint", default=None)
    p.add_argument("--lambda-out", default="lambda_inv.csv")
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("eval", help="metrics for a trained checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True)
    _add_domain_args(p)
    p.add_argument("--mesh", default=None, help="reference mesh for angle distortion")
    p.add_argument("--sample-size", type=int, default=4096, dest="sample_size")
    p.add_argument("--bins", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("boundary", help="boundary loops of a mapped cloud")
    p.add_argument("--mapped", default=None, help="mapped cloud CSV")
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--input", default=None)
    p.add_argument("--h", type=float, required=True, help="long-edge pruning threshold")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("reconstruct", help="lift a parameter-domain mesh to 3-d")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True)
    _add_domain_args(p)
    p.add_argument("--mode", choices=("uniform", "lambda_adapted"), default="uniform")
    p.add_argument("--target-edge", type=float, required=True, dest="target_edge")
    p.add_argument("--lambda-checkpoint", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="surface mesh output (.obj/.off)")
    p.add_argument("--param-out", default=None, help="also write the 2-d parameter mesh")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("sample-domain", help="sample a domain's area or boundary")
    _add_domain_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--kind", choices=("area", "boundary"), default="area")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample_domain)

    p = sub.add_parser("plot", help="deterministic SVG figures from CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--kind", choices=("stage_lines", "scatter", "histogram"), required=True)
    p.add_argument("--bins", type=int, default=40)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("audit", help="numeric audits of the method's inequalities")
    p.add_argument("--kind", choices=("extremum", "distortion-bound"), required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mesh", default=None)
    p.add_argument("--mapped", default=None)
    p.add_argument("--lambda-inv", default=None, dest="lambda_inv")
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_audit)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return 2
    except OSError as exc:
        log.error("i/o error: %s", exc)
        return 2
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        log.error("runtime failure: %s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
