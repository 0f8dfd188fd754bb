"""Command line front-end: run, sweep, oracles, mesh-info."""

import argparse
import contextlib
import copy
import io
import itertools
import json
import logging
import os
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import report as rpt
from .config import flatness_config, quad_config, search_config
from .constants import omega
from .errors import ConfigError, PseudosphereError
from .flatness import spherical_flatness_index, touching_indices
from .geometry.ops import make_shape, touching_set
from .kuran import kuran_gap
from .quadrature.oracles import poisson_normalization, reference_appendix_integral
from .stability import PipelineConfig, check_theorem

log = logging.getLogger("pseudosphere")

PIPELINES = ("gap", "index", "stability", "classify", "oracles")
TOP_KEYS = {"label", "shape", "x0", "z", "pipeline", "quadrature", "gap_quadrature", "search",
            "flatness", "index_tol", "oracles", "output", "grid"}
EXIT_OK, EXIT_ERROR, EXIT_VIOLATED = 0, 1, 2


def _line_of(text, field):
    """Line of the first occurrence of the last named key in a dotted field path."""
    if not field:
        return None
    keys = [k for k in field.split(".") if not k.isdigit()]
    if not keys:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(keys[-1]), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, line=exc.lineno) from None
    try:
        return parse_config(data, base=path.parent)
    except ConfigError as exc:
        if exc.line is None:
            raise ConfigError(str(exc).split(": ", 1)[-1] if exc.field else str(exc),
                              field=exc.field, line=_line_of(text, exc.field)) from None
        raise


def _resolve_files(spec, base):
    spec = dict(spec)
    if "file" in spec and base is not None:
        p = Path(spec["file"])
        if not p.is_absolute():
            p = Path(base) / p
        if not p.exists():
            raise ConfigError(f"file not found: {p}", field="shape.file")
        spec["file"] = str(p)
    return spec


def parse_config(data, base=None):
    """Validate a run configuration dict; returns a normalized copy."""
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object")
    for key in data:
        if key not in TOP_KEYS:
            raise ConfigError("unknown key", field=key)
    cfg = copy.deepcopy(data)
    cfg.setdefault("pipeline", "stability")
    if cfg["pipeline"] not in PIPELINES:
        raise ConfigError(f"must be one of {', '.join(PIPELINES)}", field="pipeline")
    q = quad_config(cfg.get("quadrature"))
    pc = PipelineConfig(
        quad=q,
        gap_quad=quad_config(cfg.get("gap_quadrature", {"panels": 16, "azimuth": 32}), "gap_quadrature"),
        search=search_config(cfg.get("search")),
        flatness=flatness_config(cfg.get("flatness"), quad=q),
        index_tol=float(cfg.get("index_tol", 1e-2)),
    )
    cfg["_pipeline_config"] = pc
    if cfg["pipeline"] == "oracles":
        cfg.setdefault("oracles", {})
        return cfg
    if "shape" not in cfg:
        raise ConfigError("missing", field="shape")
    if not isinstance(cfg["shape"], dict):
        raise ConfigError("expected a JSON object", field="shape")
    cfg["shape"] = _resolve_files(cfg["shape"], base)
    try:
        b = make_shape(cfg["shape"])
    except PseudosphereError as exc:
        raise ConfigError(str(exc), field="shape") from None
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad shape parameters ({exc})", field="shape") from None
    x0 = cfg.get("x0")
    if x0 is None:
        if not b.closed:
            raise ConfigError("required for open patches", field="x0")
        x0 = b.reference_point
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (b.n,):
        raise ConfigError(f"expected {b.n} coordinates to match the shape dimension", field="x0")
    cfg["_boundary"] = b
    cfg["_x0"] = x0
    if "z" in cfg:
        z = np.asarray(cfg["z"], dtype=float)
        if z.shape != (b.n,):
            raise ConfigError(f"expected {b.n} coordinates", field="z")
    return cfg


def _public(cfg):
    return {k: v for k, v in cfg.items() if not k.startswith("_")}


def _outputs(cfg, out):
    names = {"report": "report.json", "table": "table.csv", "convergence": "convergence.csv"}
    names.update(cfg.get("output") or {})
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return {k: out / v for k, v in names.items()}


def run_oracles(cfg):
    spec = cfg.get("oracles", {})
    dims = spec.get("dimensions", [2, 3])
    rep = spec.get("representation", "discrete")
    res = {str(k): v for k, v in (spec.get("resolution") or {}).items()}
    checks, rows = [], []
    for n in dims:
        t = time.perf_counter()
        resolution = res.get(str(n), 10_000 if n == 2 else 100_000)
        representation = rep if n <= 3 else "analytic"
        chk = reference_appendix_integral(n, resolution, representation)
        dt = time.perf_counter() - t
        checks.append({"n": n, "integral": "appendix", "value": chk.value, "target": chk.target,
                       "achieved_error": chk.achieved_error, "error_estimate": chk.error_estimate,
                       "elements": chk.elements, "representation": representation})
        rows.append(["appendix", n, chk.value, chk.target, chk.achieved_error, chk.error_estimate])
        print(f"appendix integral n={n}: {chk.value:.12g} (target -n*omega_n/2 = {chk.target:.12g}), "
              f"achieved error {chk.achieved_error:.3g}, estimate {chk.error_estimate:.3g}, "
              f"{chk.elements} elements, {dt:.2f} s")
    for n in spec.get("poisson_dimensions", [2, 3, 4, 5, 6]):
        val, err = poisson_normalization(n)
        checks.append({"n": n, "integral": "poisson", "value": val, "target": 1.0,
                       "achieved_error": abs(val - 1.0), "error_estimate": err})
        rows.append(["poisson", n, val, 1.0, abs(val - 1.0), err])
        print(f"poisson normalization n={n}: {val:.17g} (error {abs(val - 1):.3g})")
    return {"pipeline": "oracles", "checks": checks}, (["check", "n", "value", "target", "achieved_error",
                                                        "error_estimate"], rows), None, EXIT_OK


def run_gap(cfg, workers=1):
    b, x0, pc = cfg["_boundary"], cfg["_x0"], cfg["_pipeline_config"]
    ts = touching_set(b, x0)
    g = kuran_gap(b, x0, pc.search, pc.gap_quad, r=ts.radius)
    print(f"gap K = {g.value:.10g} (error budget {g.error_estimate:.3g}, delta limit {g.delta_limit:.10g})")
    print(f"argmax alpha = {np.array2string(np.asarray(g.argmax_alpha), precision=6)}; "
          f"{len(g.search_trace)} exterior evaluations")
    rows = [[d, m] for d, m in zip(g.delta_levels, g.level_max)]
    return ({"pipeline": "gap", "touching_radius": ts.radius, "gap": rpt.gap_dict(g)},
            (["delta", "level_max"], rows), None, EXIT_OK)


def run_index(cfg, workers=1):
    b, x0, pc = cfg["_boundary"], cfg["_x0"], cfg["_pipeline_config"]
    if "z" in cfg:
        indices = [spherical_flatness_index(b, x0, cfg["z"], pc.flatness)]
        count = 1
    else:
        ts, indices = touching_indices(b, x0, pc.flatness, workers=workers)
        count = len(ts)
    for e in indices:
        print(f"S_z at z={np.array2string(np.asarray(e.z), precision=6)}: {e.value:.8g} "
              f"(error budget {e.error_estimate:.3g}{', ' + ', '.join(e.flags) if e.flags else ''})")
    rows = [[list(e.z), e.r, e.value, e.error_estimate, ";".join(e.flags)] for e in indices]
    return ({"pipeline": "index", "touching_count": count, "indices": [rpt.index_dict(e) for e in indices]},
            (["z", "r", "index", "error_estimate", "flags"], rows),
            (rpt.CONVERGENCE_HEADER, rpt.convergence_rows(indices)), EXIT_OK)


def run_stability(cfg, workers=1):
    b, x0, pc = cfg["_boundary"], cfg["_x0"], cfg["_pipeline_config"]
    rep = check_theorem(b, x0, pc, workers=workers)
    label = cfg.get("label", b.kind)
    print(f"{label}: {rep.classification}")
    print(f"  gap K = {rep.gap.value:.10g} (budget {rep.gap.error_estimate:.3g}); "
          f"{rep.touching_count} touching point(s), r = {rep.measures.r:.10g}")
    for (z, e), rhs, v in zip(rep.index_per_z, rep.rhs_theorem, rep.theorem):
        print(f"  z={np.array2string(np.asarray(z), precision=5)} S_z={e.value:.8g} rhs={rhs:.8g} "
              f"margin={v.margin:.6g} budget={v.budget:.3g} {v.status}")
    print(f"  index-free bound rhs={rep.rhs_cor2:.8g} {rep.cor2.status}; isoperimetric rhs="
          f"{rep.iso_rhs:.8g} {rep.iso.status}; chain {rep.chain.status}")
    for note in rep.notes:
        print(f"  note: {note}")
    status = EXIT_VIOLATED if rep.violated else EXIT_OK
    if status == EXIT_VIOLATED:
        print("  VIOLATED: a proven inequality failed beyond its error budget (numerical bug)")
    body = {"pipeline": cfg["pipeline"], "label": label, "x0": x0, **rpt.stability_dict(rep)}
    return (body, (rpt.STABILITY_HEADER, rpt.stability_rows(label, rep)),
            (rpt.CONVERGENCE_HEADER, rpt.convergence_rows([e for _, e in rep.index_per_z])), status)


RUNNERS = {"gap": run_gap, "index": run_index, "stability": run_stability, "classify": run_stability}


def execute(cfg, workers=1):
    if cfg["pipeline"] == "oracles":
        return run_oracles(cfg)
    return RUNNERS[cfg["pipeline"]](cfg, workers)


def run(config_path, out=".", workers=1):
    cfg = load_config(config_path)
    body, table, conv, status = execute(cfg, workers)
    paths = _outputs(cfg, out)
    rpt.write_json(paths["report"], {"config": _public(cfg), "result": body})
    rpt.write_csv(str(paths["table"]), *table)
    if conv is not None:
        rpt.write_csv(str(paths["convergence"]), *conv)
    log.info("wrote %s", ", ".join(str(p) for k, p in paths.items() if k != "convergence" or conv))
    return status


def _set_path(data, path, value):
    keys = path.split(".")
    cur = data
    for i, k in enumerate(keys[:-1]):
        nxt = keys[i + 1]
        if isinstance(cur, list):
            cur = cur[int(k)]
        else:
            cur = cur.setdefault(k, [] if nxt.isdigit() else {})
    last = keys[-1]
    if isinstance(cur, list):
        cur[int(last)] = value
    else:
        cur[last] = value


def sweep_cells(data):
    grid = data.get("grid")
    if not isinstance(grid, dict) or not grid:
        raise ConfigError("sweep needs a non-empty object of parameter lists", field="grid")
    names = list(grid)
    for name in names:
        if not isinstance(grid[name], list) or not grid[name]:
            raise ConfigError("expected a non-empty list", field=f"grid.{name}")
    return names, list(itertools.product(*(grid[k] for k in names)))


def _cell_summary(cfg, status, body):
    if cfg["pipeline"] in ("stability", "classify"):
        theorem = body["theorem"]
        worst = max(theorem, key=lambda t: t["rhs"]) if theorem else None
        gap = body["gap"]["value"]
        rhs = worst["rhs"] if worst else float("nan")
        return {"gap": gap, "gap_err": body["gap"]["error_estimate"],
                "min_index": min(t["index"] for t in theorem) if theorem else float("nan"),
                "rhs": rhs, "margin": gap - rhs, "classification": body["classification"],
                "status": status}
    if cfg["pipeline"] == "gap":
        return {"gap": body["gap"]["value"], "gap_err": body["gap"]["error_estimate"],
                "min_index": float("nan"), "rhs": float("nan"), "margin": float("nan"),
                "classification": "", "status": status}
    raise ConfigError("sweeps support the gap, stability and classify pipelines", field="pipeline")


def _run_cell(args):
    data, base, names, values, cell_path = args
    data = copy.deepcopy(data)
    data.pop("grid", None)
    for k, v in zip(names, values):
        _set_path(data, k, v)
    cfg = parse_config(data, base)
    with contextlib.redirect_stdout(io.StringIO()):
        body, _, _, status = execute(cfg)
    summary = _cell_summary(cfg, status, body)
    rpt.write_json(cell_path, {"params": dict(zip(names, values)), "summary": summary})
    return cell_path


def sweep(config_path, out=".", workers=1):
    path = Path(config_path)
    try:
        text = path.read_text()
        data = json.loads(text)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, line=exc.lineno) from None
    try:
        names, cells = sweep_cells(data)
        # validate the first cell up front for line-level diagnostics
        first = copy.deepcopy(data)
        first.pop("grid")
        for k, v in zip(names, cells[0]):
            _set_path(first, k, v)
        cfg0 = parse_config(first, path.parent)
        if cfg0["pipeline"] not in ("gap", "stability", "classify"):
            raise ConfigError("sweeps support the gap, stability and classify pipelines", field="pipeline")
    except ConfigError as exc:
        if exc.line is None:
            raise ConfigError(str(exc).split(": ", 1)[-1] if exc.field else str(exc), field=exc.field,
                              line=_line_of(text, exc.field)) from None
        raise
    out = Path(out)
    cell_dir = out / "cells"
    cell_dir.mkdir(parents=True, exist_ok=True)
    todo = []
    for i, values in enumerate(cells):
        cell_path = cell_dir / f"cell_{i:04d}.json"
        if cell_path.exists():
            try:
                done = json.loads(cell_path.read_text())
                if done.get("params") == dict(zip(names, values)):
                    log.info("cell %d already done, skipping", i)
                    continue
            except (OSError, json.JSONDecodeError):
                pass
        todo.append((data, path.parent, names, values, str(cell_path)))
    if workers > 1 and len(todo) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            for p in pool.map(_run_cell, todo):
                log.info("finished %s", p)
    else:
        for job in todo:
            log.info("finished %s", _run_cell(job))

    header = ["cell"] + names + ["gap", "gap_err", "min_index", "rhs", "margin", "classification"]
    rows, status = [], EXIT_OK
    for i, values in enumerate(cells):
        done = json.loads((cell_dir / f"cell_{i:04d}.json").read_text())
        s = {k: (float("nan") if v is None else v) for k, v in done["summary"].items()}
        status = max(status, s["status"])
        rows.append([i] + [_plain_param(v) for v in values]
                    + [s["gap"], s["gap_err"], s["min_index"], s["rhs"], s["margin"], s["classification"]])
        print(f"cell {i}: " + ", ".join(f"{k}={v}" for k, v in zip(names, values))
              + f" -> gap {s['gap']:.6g}, min index {s['min_index']:.6g}, margin {s['margin']:.6g}")
    rpt.write_csv(str(out / "sweep.csv"), header, rows)
    return status


def _plain_param(v):
    return float(v) if isinstance(v, (int, float)) and not isinstance(v, bool) else json.dumps(v)


def mesh_info(path):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"file not found: {path}")
    suffix = path.suffix.lower()
    if suffix == ".off":
        spec = {"kind": "mesh", "file": str(path)}
    elif suffix == ".csv":
        spec = {"kind": "polyline", "file": str(path)}
    else:
        cfg = load_config(path)
        spec, b = cfg["shape"], cfg["_boundary"]
        return _describe(b, spec)
    try:
        b = make_shape(spec)
    except PseudosphereError as exc:
        raise ConfigError(str(exc), field="shape") from None
    return _describe(b, spec)


def _describe(b, spec):
    print(f"kind: {getattr(b, 'label', None) or b.kind}")
    print(f"dimension: {b.n}")
    for attr in ("V", "F", "vertices"):
        if hasattr(b, attr):
            print(f"{attr}: {len(getattr(b, attr))}")
    if hasattr(b, "element_sizes"):
        h = b.element_sizes()
        print(f"element size: min {h.min():.6g}, max {h.max():.6g}")
    P, Perr = b.measure_result
    print(f"boundary measure: {P:.15g} (+/- {Perr:.2g})")
    if b.closed:
        V, Verr = b.volume_result
        print(f"enclosed volume: {V:.15g} (+/- {Verr:.2g})")
        n = b.n
        print(f"isoperimetric ratio: {P / (n * omega(n) ** (1 / n) * V ** ((n - 1) / n)):.12g}")
    else:
        print("enclosed volume: none (open patch)")
    return EXIT_OK


def _threads(arg):
    if arg is not None:
        return max(1, arg)
    env = os.environ.get("PSEUDOSPHERE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"PSEUDOSPHERE_THREADS must be an integer, got {env!r}") from None
    return 1


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration (JSON)")
    common.add_argument("--out", default=".", help="output directory (default: current directory)")
    common.add_argument("--deterministic", action="store_true",
                        help="serial execution with a fixed reduction order")
    common.add_argument("--threads", type=int, default=None,
                        help="worker count (falls back to PSEUDOSPHERE_THREADS, then 1)")
    common.add_argument("--verbose", "-v", action="store_true")

    parser = argparse.ArgumentParser(prog="pseudosphere",
                                     description="Kuran gap, flatness index and stability checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [("run", "run one pipeline from a config"),
                        ("sweep", "run a config over a cartesian parameter grid"),
                        ("mesh-info", "describe a mesh, polyline or shape config")]:
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("path", nargs="?", help="config file (same as --config)")
    p = sub.add_parser("oracles", parents=[common], help="closed-form oracle checks")
    p.add_argument("path", nargs="?", help="optional oracles config")
    p.add_argument("--dims", type=int, nargs="+", default=[2, 3])
    p.add_argument("--representation", choices=["analytic", "discrete"], default="discrete")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    path = args.path or args.config
    try:
        workers = 1 if args.deterministic else _threads(args.threads)
        if args.command == "oracles":
            if path:
                cfg = load_config(path)
                cfg["pipeline"] = "oracles"
            else:
                cfg = {"pipeline": "oracles", "oracles": {"dimensions": args.dims,
                                                           "representation": args.representation}}
            body, table, _, status = run_oracles(cfg)
            paths = _outputs({}, args.out)
            rpt.write_json(paths["report"], {"config": _public(cfg), "result": body})
            rpt.write_csv(str(paths["table"]), *table)
            return status
        if not path:
            raise ConfigError("no config given (positional path or --config)")
        if args.command == "run":
            return run(path, args.out, workers)
        if args.command == "sweep":
            return sweep(path, args.out, workers)
        return mesh_info(path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except PseudosphereError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
