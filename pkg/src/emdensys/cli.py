"""Command-line front end: classify, solve, verify, sweep and potential.

Every subcommand reads a single JSON config (``--config``), writes its
artifacts into ``--out`` and reports through the exit code:
0 success, 1 a check failed, 2 invalid input, 3 solver non-convergence.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io as eio
from .checks import CHECK_NAMES, run_checks
from .exponents import (
    HypothesisError,
    InadmissibleError,
    SystemParams,
    check_critical_condition,
    check_scale_identities,
    critical_hyperbola_p,
    derive_scaling,
    hypothesis_violations,
)
from .radial_greens import FieldError, GridError, RadialGrid, newton_potential
from .solver import (
    BracketFailure,
    NonConvergence,
    ShootingConfig,
    SolverError,
    asymptotic_grid,
    bisect_ground_state,
    extend_state,
    picard_solve,
)

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INVALID, EXIT_NONCONVERGENCE = 0, 1, 2, 3

PARAM_KEYS = ("n", "p", "q", "r", "s")
SOLVER_KEYS = {
    "method", "r_start", "r_max", "ode_tol", "beta_bracket", "max_bisections", "event_tol",
    "max_widenings", "widen_factor", "damping", "max_iters", "extend_to",
}
GRID_KEYS = {"rho_min", "rho_max", "points"}
OUTPUT_KEYS = {"directory", "formats"}
SWEEP_KEYS = set(PARAM_KEYS) | {"random"}
RANDOM_KEYS = {"count", "seed", "n", "q", "s"}
TOP_KEYS = {"params", "solver", "grid", "checks", "output", "state", "th4_cases", "sweep", "field"}
DEFAULT_EXTEND_TO = 1e14


class ConfigError(ValueError):
    """Malformed configuration; the message starts with the offending key path."""


# ----------------------------------------------------------------------
# config parsing


def _require_keys(obj, allowed, path):
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: expected an object")
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}: unknown key")


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number (got {value!r})")
    return float(value)


def _params(obj, path) -> SystemParams:
    _require_keys(obj, set(PARAM_KEYS), path)
    missing = [k for k in PARAM_KEYS if k not in obj]
    if missing:
        raise ConfigError(f"{path}.{missing[0]}: missing")
    values = {k: _number(obj[k], f"{path}.{k}") for k in PARAM_KEYS}
    return SystemParams(**values)


@dataclass
class RunConfig:
    raw: dict
    params: SystemParams | None
    method: str
    shooting: ShootingConfig
    damping: float
    max_iters: int
    extend_to: float | None
    grid: RadialGrid | None
    checks: list | None
    output_dir: Path | None
    formats: tuple


def parse_config(raw: dict, out: str | None = None, fmt: str | None = None, need_params=True) -> RunConfig:
    _require_keys(raw, TOP_KEYS, "config")
    params = None
    if "params" in raw:
        params = _params(raw["params"], "config.params")
    elif need_params:
        raise ConfigError("config.params: missing")

    solver = raw.get("solver", {})
    _require_keys(solver, SOLVER_KEYS, "config.solver")
    method = solver.get("method", "shooting")
    if method not in ("shooting", "picard", "both"):
        raise ConfigError(f"config.solver.method: expected shooting, picard or both (got {method!r})")
    kwargs = {}
    for key in ("r_start", "r_max", "ode_tol", "event_tol", "widen_factor"):
        if key in solver:
            kwargs[key] = _number(solver[key], f"config.solver.{key}")
    for key in ("max_bisections", "max_widenings"):
        if key in solver:
            kwargs[key] = int(_number(solver[key], f"config.solver.{key}"))
    if "beta_bracket" in solver:
        bracket = solver["beta_bracket"]
        if not isinstance(bracket, list) or len(bracket) != 2:
            raise ConfigError("config.solver.beta_bracket: expected [lo, hi]")
        kwargs["beta_bracket"] = tuple(_number(x, "config.solver.beta_bracket") for x in bracket)
    try:
        shooting = ShootingConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"config.solver: {exc}") from exc
    damping = _number(solver.get("damping", 0.5), "config.solver.damping")
    if not 0.0 < damping <= 1.0:
        raise ConfigError("config.solver.damping: must lie in (0, 1]")
    max_iters = int(_number(solver.get("max_iters", 500), "config.solver.max_iters"))
    extend_to = solver.get("extend_to", DEFAULT_EXTEND_TO)
    if extend_to is not None:
        extend_to = _number(extend_to, "config.solver.extend_to")

    grid = None
    if "grid" in raw:
        g = raw["grid"]
        _require_keys(g, GRID_KEYS, "config.grid")
        try:
            grid = RadialGrid.log_uniform(
                params.n if params else 3,
                _number(g.get("rho_min", 1e-4), "config.grid.rho_min"),
                _number(g.get("rho_max", 1e6), "config.grid.rho_max"),
                int(_number(g.get("points", 4096), "config.grid.points")),
            )
        except GridError as exc:
            raise ConfigError(f"config.grid: {exc}") from exc

    checks = raw.get("checks")
    if checks is not None:
        if not isinstance(checks, list):
            raise ConfigError("config.checks: expected a list of check names")
        for i, name in enumerate(checks):
            if name not in CHECK_NAMES:
                raise ConfigError(f"config.checks[{i}]: unknown check {name!r}")

    output = raw.get("output", {})
    _require_keys(output, OUTPUT_KEYS, "config.output")
    directory = out or output.get("directory")
    formats = output.get("formats", ["csv", "json"])
    if fmt:
        formats = [fmt]
    for f in formats:
        if f not in ("csv", "json"):
            raise ConfigError(f"config.output.formats: unknown format {f!r}")
    return RunConfig(
        raw=raw,
        params=params,
        method=method,
        shooting=shooting,
        damping=damping,
        max_iters=max_iters,
        extend_to=extend_to,
        grid=grid,
        checks=checks,
        output_dir=Path(directory) if directory else None,
        formats=tuple(formats),
    )


# ----------------------------------------------------------------------
# output helpers


def _emit(text: str, cfg: RunConfig, filename: str) -> None:
    if cfg.output_dir is not None:
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
        (cfg.output_dir / filename).write_text(text, encoding="utf-8", newline="\n")


def _report_rows(report, params):
    d = report.as_dict()
    return {**params.as_dict(), **d}


# ----------------------------------------------------------------------
# subcommands


def cmd_classify(cfg: RunConfig) -> int:
    params = cfg.params
    report = derive_scaling(params)
    out = _report_rows(report, params)
    if report.admissible:
        res_u, res_v = check_scale_identities(report, params)
        ok, residual = check_critical_condition(report)
        out.update(eq3_residual_u=res_u, eq3_residual_v=res_v, critical_condition=ok,
                   critical_residual=residual)
    text = eio.dumps(out)
    sys.stdout.write(text)
    if "json" in cfg.formats:
        _emit(text, cfg, "classify.json")
    if "csv" in cfg.formats:
        _emit(eio.rows_to_csv(list(out), [[_cell(v) for v in out.values()]]), cfg, "classify.csv")
    if not report.admissible:
        a, b = report.a, report.b
        print(f"inadmissible: a={a:.17g}, b={b:.17g} must both exceed n/(n-2)", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return eio.format_float(v)
    return str(v)


def solve_state(cfg: RunConfig):
    """Run the configured solver pipeline; returns the final state."""
    params = cfg.params
    state = bisect_ground_state(params, cfg.shooting, cfg.grid)
    if cfg.method in ("picard", "both"):
        picard = picard_solve(params, state, damping=cfg.damping, max_iters=cfg.max_iters)
        if cfg.method == "both":
            agree = _method_agreement(state, picard)
            picard.diagnostics["shooting_agreement"] = agree
        state = picard
    if cfg.extend_to is not None and cfg.extend_to > state.u.grid.nodes[-1]:
        state = extend_state(
            state,
            asymptotic_grid(params.n, cfg.extend_to),
            damping=cfg.damping,
            max_iters=cfg.max_iters,
        )
    return state


def _method_agreement(a, b) -> float:
    rho = a.u.rho
    mask = rho <= 10.0
    du = np.abs(b.u(rho[mask]) / a.u.values[mask] - 1.0)
    dv = np.abs(b.v(rho[mask]) / a.v.values[mask] - 1.0)
    return float(max(du.max(), dv.max()))


def cmd_solve(cfg: RunConfig) -> int:
    state = solve_state(cfg)
    if cfg.output_dir is not None:
        eio.save_state(cfg.output_dir, state)
    summary = eio.state_diagnostics(state)
    summary.pop("class_history", None)
    sys.stdout.write(eio.dumps(summary))
    return EXIT_OK


def _th4_cases(raw) -> list[SystemParams]:
    cases = raw.get("th4_cases", [])
    if not isinstance(cases, list):
        raise ConfigError("config.th4_cases: expected a list")
    out = []
    for i, case in enumerate(cases):
        path = f"config.th4_cases[{i}]"
        _require_keys(case, set(PARAM_KEYS), path)
        for key in ("n", "q", "s"):
            if key not in case:
                raise ConfigError(f"{path}.{key}: missing")
        q, s = _number(case["q"], f"{path}.q"), _number(case["s"], f"{path}.s")
        # only (n, q, s) enter the integral; p and r default to a valid completion
        r = _number(case.get("r", 0.0), f"{path}.r")
        p = _number(case.get("p", max(1.0, q + s - r)), f"{path}.p")
        out.append(SystemParams(int(_number(case["n"], f"{path}.n")), p, q, r, s))
    return out


def cmd_verify(cfg: RunConfig) -> int:
    cases = _th4_cases(cfg.raw)
    state = None
    if "state" in cfg.raw:
        try:
            state = eio.load_state(cfg.raw["state"])
        except FileNotFoundError as exc:
            raise ConfigError(f"config.state: {exc}") from exc
    elif cfg.params is not None:
        state = solve_state(cfg)
    if state is None and not cases:
        raise ConfigError("config: verify needs params, a state directory or th4_cases")
    names = cfg.checks
    if names is None and state is None:
        names = ["th4_integral"]
    rows = run_checks(state, names, cases)
    csv_text = eio.checks_to_csv(rows)
    sys.stdout.write(csv_text)
    if "csv" in cfg.formats:
        _emit(csv_text, cfg, "checks.csv")
    if "json" in cfg.formats:
        _emit(eio.checks_to_json(rows), cfg, "checks.json")
    return EXIT_OK if all(r.passed for r in rows) else EXIT_CHECK_FAILED


SWEEP_COLUMNS = (
    "n", "p", "q", "r", "s", "valid", "a", "b", "admissible", "regime", "u_exponent",
    "v_exponent", "v_log_power", "c_nqs", "th4_constant", "eq3_residual_u", "eq3_residual_v",
    "critical_condition", "critical_residual",
)


def sweep_row(values: tuple) -> list[str]:
    """One sweep table row for the tuple (n, p, q, r, s)."""
    n, p, q, r, s = values
    row = dict.fromkeys(SWEEP_COLUMNS)
    row.update(n=int(n), p=p, q=q, r=r, s=s)
    if hypothesis_violations(n, p, q, r, s):
        row["valid"] = False
        return [_cell(row[c]) for c in SWEEP_COLUMNS]
    params = SystemParams(n, p, q, r, s)
    report = derive_scaling(params)
    row.update(
        valid=True,
        a=report.a,
        b=report.b,
        admissible=report.admissible,
        regime=report.regime.value,
        u_exponent=report.u_profile.exponent,
        v_exponent=report.v_profile.exponent,
        v_log_power=report.v_profile.log_power,
        c_nqs=report.c_nqs,
        th4_constant=report.th4_constant,
    )
    if report.admissible:
        res_u, res_v = check_scale_identities(report, params)
        ok, residual = check_critical_condition(report)
        row.update(eq3_residual_u=res_u, eq3_residual_v=res_v, critical_condition=ok,
                   critical_residual=residual)
    return [_cell(row[c]) for c in SWEEP_COLUMNS]


def _range(obj, path) -> list:
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return [float(obj)]
    if not isinstance(obj, list):
        raise ConfigError(f"{path}: expected a number or a list")
    if not obj:
        raise ConfigError(f"{path}: empty range")
    return [_number(x, f"{path}[{i}]") for i, x in enumerate(obj)]


def sweep_tuples(sweep: dict) -> list[tuple]:
    """Cartesian product in the order n, p, q, r, s (p may follow the critical hyperbola)."""
    _require_keys(sweep, SWEEP_KEYS, "config.sweep")
    if "random" in sweep:
        return random_tuples(sweep["random"])
    for key in ("n", "q"):
        if key not in sweep:
            raise ConfigError(f"config.sweep.{key}: missing")
    ranges = {k: _range(sweep.get(k, 0.0), f"config.sweep.{k}") for k in ("n", "q", "r", "s")}
    p_sweep = sweep.get("p")
    if p_sweep is None:
        raise ConfigError("config.sweep.p: missing")
    hyperbola = p_sweep == "critical_hyperbola"
    p_values = None if hyperbola else _range(p_sweep, "config.sweep.p")
    out = []
    for n, p_or_none, q, r, s in itertools.product(
        ranges["n"], [None] if hyperbola else p_values, ranges["q"], ranges["r"], ranges["s"]
    ):
        if hyperbola:
            if r or s:
                raise ConfigError("config.sweep.p: the critical hyperbola needs r = s = 0")
            p = critical_hyperbola_p(int(n), q)
        else:
            p = p_or_none
        out.append((int(n), p, q, r, s))
    return out


def random_tuples(sweep: dict) -> list[tuple]:
    """Admissible tuples drawn from a seeded generator."""
    _require_keys(sweep, RANDOM_KEYS, "config.sweep.random")
    count = int(_number(sweep.get("count", 1000), "config.sweep.random.count"))
    if count <= 0:
        raise ConfigError("config.sweep.random.count: empty range")
    rng = np.random.default_rng(int(_number(sweep.get("seed", 0), "config.sweep.random.seed")))
    n_range = [int(x) for x in _range(sweep.get("n", [3, 4, 5, 6]), "config.sweep.random.n")]
    q_lo, q_hi = _range(sweep.get("q", [1.0, 6.0]), "config.sweep.random.q")[:2]
    s_lo, s_hi = _range(sweep.get("s", [0.0, 2.0]), "config.sweep.random.s")[:2]
    return sample_admissible(rng, count, n_range, (q_lo, q_hi), (s_lo, s_hi))


def sample_admissible(rng, count, n_values=(3, 4, 5, 6), q_range=(1.0, 6.0), s_range=(0.0, 2.0)):
    out = []
    while len(out) < count:
        n = int(rng.choice(n_values))
        q = float(rng.uniform(*q_range))
        s = float(rng.uniform(*s_range))
        r = float(rng.uniform(0.0, q + 0.99))
        p = float(max(1.0, q - r + s) + rng.uniform(0.0, 10.0))
        if hypothesis_violations(n, p, q, r, s):
            continue
        if derive_scaling(SystemParams(n, p, q, r, s)).admissible:
            out.append((n, p, q, r, s))
    return out


def cmd_sweep(cfg: RunConfig, jobs: int = 1) -> int:
    if "sweep" not in cfg.raw:
        raise ConfigError("config.sweep: missing")
    tuples = sweep_tuples(cfg.raw["sweep"])
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(sweep_row, tuples, chunksize=max(1, len(tuples) // (4 * jobs))))
    else:
        rows = [sweep_row(t) for t in tuples]
    text = eio.rows_to_csv(SWEEP_COLUMNS, rows)
    if "csv" in cfg.formats:
        _emit(text, cfg, "sweep.csv")
    if "json" in cfg.formats:
        records = [dict(zip(SWEEP_COLUMNS, r)) for r in rows]
        _emit(eio.dumps({"rows": records}), cfg, "sweep.json")
    sys.stdout.write(text)
    return EXIT_OK


def cmd_potential(cfg: RunConfig) -> int:
    path = cfg.raw.get("field")
    if path is None:
        raise ConfigError("config.field: missing")
    try:
        f = eio.read_field(path)
    except FileNotFoundError as exc:
        raise ConfigError(f"config.field: {exc}") from exc
    w = newton_potential(f)
    text = eio.field_to_csv(w)
    _emit(text, cfg, "potential.csv")
    if cfg.output_dir is None:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "classify": cmd_classify,
    "solve": cmd_solve,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "potential": cmd_potential,
}
NEEDS_PARAMS = {"classify": True, "solve": True, "verify": False, "sweep": False, "potential": False}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="emdensys", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", help="output directory (overrides config.output.directory)")
        p.add_argument("--jobs", type=int, default=1, help="parallel workers for sweeps")
        p.add_argument("--format", choices=("csv", "json"), help="restrict emitted formats")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        try:
            raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise ConfigError(f"--config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--config: invalid JSON ({exc})") from exc
        cfg = parse_config(raw, args.out, args.format, need_params=NEEDS_PARAMS[args.command])
        if args.jobs < 1:
            raise ConfigError("--jobs: must be at least 1")
        if args.command == "sweep":
            return cmd_sweep(cfg, args.jobs)
        return COMMANDS[args.command](cfg)
    except (ConfigError, HypothesisError, InadmissibleError, GridError, FieldError, KeyError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (BracketFailure, NonConvergence) as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
