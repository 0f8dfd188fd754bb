"""JSON and CSV emission with 17 significant digits for every float."""

import csv
import dataclasses
import io
import math

import numpy as np

from .quadrature.extrapolate import LimitEstimate


def fmt(x):
    """17 significant digits; non-finite values become null."""
    x = float(x)
    if not math.isfinite(x):
        return "null"
    s = "%.17g" % x
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def to_plain(obj):
    """Recursively turn dataclasses, arrays and numpy scalars into JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if hasattr(obj, "to_dict"):
        return to_plain(obj.to_dict())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def dumps(obj, indent=2):
    out = io.StringIO()
    _write(to_plain(obj), out, 0, indent)
    out.write("\n")
    return out.getvalue()


def _write(v, out, level, indent):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(v, dict):
        if not v:
            out.write("{}")
            return
        out.write("{\n")
        for i, (k, x) in enumerate(v.items()):
            out.write(f"{pad}{_string(k)}: ")
            _write(x, out, level + 1, indent)
            out.write(",\n" if i < len(v) - 1 else "\n")
        out.write(end + "}")
    elif isinstance(v, list):
        if not v:
            out.write("[]")
        elif all(not isinstance(x, (dict, list)) for x in v):
            out.write("[" + ", ".join(_scalar(x) for x in v) + "]")
        else:
            out.write("[\n")
            for i, x in enumerate(v):
                out.write(pad)
                _write(x, out, level + 1, indent)
                out.write(",\n" if i < len(v) - 1 else "\n")
            out.write(end + "]")
    else:
        out.write(_scalar(v))


def _string(s):
    import json

    return json.dumps(s)


def _scalar(x):
    if x is None:
        return "null"
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return fmt(x)
    return _string(x)


def write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(dumps(obj))


def _cell(x):
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    if isinstance(x, (list, tuple)):
        return ";".join(_cell(v) for v in x)
    return str(x)


def write_csv(path_or_file, header, rows):
    own = isinstance(path_or_file, str)
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(x) for x in row])
    finally:
        if own:
            fh.close()


def limit_dict(est):
    if est is None:
        return None
    if isinstance(est, LimitEstimate):
        return {
            "value": est.value, "order": est.order_estimate, "residual": est.residual,
            "flags": list(est.flags), "model": est.model,
            "samples": [[float(a), float(b)] for a, b in est.samples],
        }
    return to_plain(est)


def gap_dict(g):
    return {
        "value": g.value,
        "error_estimate": g.error_estimate,
        "quadrature_error": g.quadrature_error,
        "argmax_alpha": g.argmax_alpha,
        "boundary_offset": g.boundary_offset,
        "delta_levels": g.delta_levels,
        "level_max": g.level_max,
        "delta_limit": g.delta_limit,
        "evaluations": g.evaluations,
        "flags": list(g.flags),
        "search_trace": [list(a) + [v] for a, v in g.search_trace],
    }


def index_dict(e):
    return {
        "value": e.value,
        "z": e.z,
        "r": e.r,
        "error_estimate": e.error_estimate,
        "flags": list(e.flags),
        "converged": e.converged,
        "direction_index": e.direction_index,
        "directions": e.directions,
        "R_values": e.R_values,
        "t_values": e.t_values,
        "table": e.table,
        "errors": e.errors,
        "inner_limits": [[limit_dict(x) for x in row] for row in e.inner_limits],
        "outer_limits": [limit_dict(x) for x in e.outer_limits],
    }


def stability_dict(rep):
    m = rep.measures
    return {
        "classification": rep.classification,
        "evidence": rep.witness,
        "gap": gap_dict(rep.gap),
        "touching_count": rep.touching_count,
        "measures": {
            "boundary": m.perimeter, "boundary_err": m.perimeter_err, "r": m.r, "r_err": m.r_err,
            "ball_boundary": m.ball_measure, "volume": m.volume, "volume_err": m.volume_err,
            "ball_volume": m.ball_volume,
        },
        "theorem": [
            {"z": z, "index": e.value, "index_err": e.error_estimate, "rhs": rhs, **v.to_dict()}
            for (z, e), rhs, v in zip(rep.index_per_z, rep.rhs_theorem, rep.theorem)
        ],
        "rhs_cor2": rep.rhs_cor2,
        "cor2": rep.cor2.to_dict(),
        "iso_rhs": rep.iso_rhs,
        "iso": rep.iso.to_dict(),
        "chain": rep.chain.to_dict(),
        "notes": rep.notes,
        "indices": [index_dict(e) for _, e in rep.index_per_z],
    }


STABILITY_HEADER = ["shape", "z", "r", "index", "index_err", "gap", "gap_err", "rhs", "margin",
                    "budget", "verdict", "classification"]


def stability_rows(label, rep):
    rows = []
    g = rep.gap
    for (z, e), rhs, v in zip(rep.index_per_z, rep.rhs_theorem, rep.theorem):
        rows.append([label, list(z), rep.measures.r, e.value, e.error_estimate, g.value,
                     g.error_estimate, rhs, g.value - rhs, v.budget, v.status, rep.classification])
    return rows


CONVERGENCE_HEADER = ["z", "R", "direction", "t", "value", "error"]


def convergence_rows(indices):
    rows = []
    for e in indices:
        for j, R in enumerate(e.R_values):
            for d in range(len(e.directions)):
                for k, t in enumerate(e.t_values):
                    rows.append([list(e.z), R, d, t, e.table[j, d, k], e.errors[j, d, k]])
    return rows
