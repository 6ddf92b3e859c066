"""Flat-file serialization of radial fields, ground states and check tables.

Every float is written with 17 significant digits so that a write/read
cycle reproduces the binary values exactly.  CSV files use commas, a
header row and LF line endings.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exponents import SystemParams
from .radial_greens import RadialField, RadialGrid, TailModel

FIELD_HEADER = ("rho", "value")
CHECK_COLUMNS = ("check_name", "predicted", "measured", "rel_error", "tolerance", "pass")


def format_float(x) -> str:
    """17-significant-digit decimal; non-finite values as nan/inf/-inf."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def _encode(obj, indent: int, level: int) -> str:
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = "," + pad if indent else ", "
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        # JSON has no literal for non-finite numbers; strings keep them readable
        return format_float(x) if math.isfinite(x) else json.dumps(format_float(x))
    if isinstance(obj, str):
        return json.dumps(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return json.dumps(obj.value)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{" + pad + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [_encode(v, indent, level + 1) for v in obj]
        return "[" + pad + sep.join(items) + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with floats at 17 significant digits (deterministic key order)."""
    return _encode(obj, indent, 0) + "\n"


def parse_float(x) -> float:
    return float(x)


def _float_or_none(x):
    return None if x is None else parse_float(x)


# ----------------------------------------------------------------------
# radial fields


def field_metadata(f: RadialField) -> dict:
    return {
        "n": f.n,
        "points": int(f.grid.nodes.size),
        "rho_min": float(f.grid.nodes[0]),
        "rho_max": float(f.grid.nodes[-1]),
        "value_at_zero": float(f.value_at_zero),
        "origin_power": None if f.origin_power is None else float(f.origin_power),
        "nonnegative": bool(f.nonnegative),
        "tail": {
            "amplitude": float(f.tail.amplitude),
            "exponent": float(f.tail.exponent),
            "log_power": float(f.tail.log_power),
        },
    }


def field_to_csv(f: RadialField) -> str:
    buf = io.StringIO()
    buf.write("# " + dumps(field_metadata(f), indent=0))
    buf.write(",".join(FIELD_HEADER) + "\n")
    for rho, val in zip(f.grid.nodes, f.values):
        buf.write(f"{format_float(rho)},{format_float(val)}\n")
    return buf.getvalue()


def field_from_csv(text: str) -> RadialField:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ValueError("field CSV must start with a '# {json}' metadata line")
    meta = json.loads(lines[0][1:])
    if tuple(lines[1].split(",")) != FIELD_HEADER:
        raise ValueError(f"expected header {','.join(FIELD_HEADER)}")
    data = [row.split(",") for row in lines[2:] if row]
    rho = np.array([parse_float(r[0]) for r in data])
    vals = np.array([parse_float(r[1]) for r in data])
    if rho.size != meta["points"]:
        raise ValueError(f"header announces {meta['points']} points, found {rho.size}")
    grid = RadialGrid(rho, int(meta["n"]))
    tail = TailModel(**{k: parse_float(v) for k, v in meta["tail"].items()})
    return RadialField(
        grid,
        vals,
        parse_float(meta["value_at_zero"]),
        tail,
        _float_or_none(meta.get("origin_power")),
        bool(meta.get("nonnegative", False)),
    )


def write_field(path, f: RadialField) -> None:
    Path(path).write_text(field_to_csv(f), encoding="utf-8", newline="\n")


def read_field(path) -> RadialField:
    return field_from_csv(Path(path).read_text(encoding="utf-8"))


# ----------------------------------------------------------------------
# ground states


def state_diagnostics(state) -> dict:
    diag = {
        "params": state.params.as_dict(),
        "method": state.method.value,
        "beta_star": state.beta_star,
        "residuals": state.residuals.as_dict(),
        "accepted": state.accepted,
    }
    for key in ("window_width", "decaying_window_hit", "clamp_count", "iterations",
                "seed_method", "seed_beta_star", "rescaled_by"):
        if key in state.diagnostics:
            diag[key] = state.diagnostics[key]
    if "class_history" in state.diagnostics:
        diag["class_history"] = state.diagnostics["class_history"]
    return diag


def save_state(directory, state) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_field(directory / "u.csv", state.u)
    write_field(directory / "v.csv", state.v)
    (directory / "diagnostics.json").write_text(
        dumps(state_diagnostics(state)), encoding="utf-8", newline="\n"
    )


def load_state(directory):
    """Rebuild a ground state from u.csv, v.csv and diagnostics.json.

    Residuals are recomputed from the stored fields rather than trusted.
    """
    from .solver import from_fields

    directory = Path(directory)
    missing = [name for name in ("u.csv", "v.csv", "diagnostics.json") if not (directory / name).is_file()]
    if missing:
        raise FileNotFoundError(f"state directory {directory} lacks {', '.join(missing)}")
    diag = json.loads((directory / "diagnostics.json").read_text(encoding="utf-8"))
    params = SystemParams(**diag["params"])
    u = read_field(directory / "u.csv")
    v = read_field(directory / "v.csv")
    return from_fields(params, u, v, method=diag.get("method", "Shooting"))


# ----------------------------------------------------------------------
# check tables


@dataclass(frozen=True)
class CheckRow:
    check_name: str
    predicted: float
    measured: float
    rel_error: float
    tolerance: float
    passed: bool
    details: dict | None = None

    def csv_cells(self) -> list[str]:
        return [
            self.check_name,
            format_float(self.predicted),
            format_float(self.measured),
            format_float(self.rel_error),
            format_float(self.tolerance),
            "true" if self.passed else "false",
        ]

    def as_dict(self) -> dict:
        out = {
            "check_name": self.check_name,
            "predicted": self.predicted,
            "measured": self.measured,
            "rel_error": self.rel_error,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }
        if self.details:
            out["details"] = self.details
        return out


def rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def checks_to_csv(rows: list[CheckRow]) -> str:
    return rows_to_csv(CHECK_COLUMNS, [r.csv_cells() for r in rows])


def checks_to_json(rows: list[CheckRow]) -> str:
    return dumps({"checks": [r.as_dict() for r in rows], "all_pass": all(r.passed for r in rows)})
