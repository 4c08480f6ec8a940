"""Command-line harness.

    halfheat {eval,compare,trace,corner,convergence} --config run.ini [--out f.csv]
             [--jobs N] [--plot-script]

The config is an INI file with three sections:

    [problem]
    u0 = ExpDecay(1, 1)
    g0 = ExpGrow(1, 1)

    [quadrature]          ; any QuadratureConfig field
    abs_tol = 1e-12

    [experiment]
    xs = 0.1, 0.5, 1
    ts = 0.5, 1
    representations = fokas, ehrenpreis, gauss, sine
    T = 3                 ; Ehrenpreis horizon, must exceed every t
    traces = x0:0:1.0, t0:1:1.0     ; direction:order:anchor
    corner_orders = 0, 1, 2
    point = 1, 1          ; (x, t) for the convergence study

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import ast
import configparser
import csv
import io
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from itertools import combinations
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import problem as pb
from .boundary import corner_limit, trace_t_to_0, trace_x_to_0
from .quadrature import QuadratureConfig, QuadratureError, gamma_tail_bound
from .representations import (DT_CAP, DX_CAP, FOKAS, GAUSS, SINE, HorizonError,
                              Representation, ehrenpreis, eval_dt, eval_dx,
                              eval_fokas, evaluate)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

FAMILIES: Dict[str, Callable] = {
    "ExpDecay": pb.ExpDecay,
    "Gaussian": pb.Gaussian,
    "PolyExp": pb.PolyExp,
    "Constant": pb.Constant,
    "ExpGrow": pb.ExpGrow,
    "Poly": pb.Poly,
}
REPRESENTATIONS = ("fokas", "ehrenpreis", "gauss", "sine")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    problem: pb.HalfLineProblem
    quad: QuadratureConfig
    xs: Tuple[float, ...] = (0.5, 1.0)
    ts: Tuple[float, ...] = (0.5, 1.0)
    representations: Tuple[str, ...] = REPRESENTATIONS
    T: Optional[float] = None
    traces: Tuple[Tuple[str, int, float], ...] = (("x0", 0, 1.0),)
    corner_orders: Tuple[int, ...] = (0,)
    point: Tuple[float, float] = (1.0, 1.0)
    base_nodes: float = 2.0
    doublings: int = 4
    study_order: int = 4
    study_radius: float = 40.0
    radius_start: float = 5.0
    output: Optional[str] = None

    def reps(self) -> List[Representation]:
        out = []
        for name in self.representations:
            out.append({"fokas": FOKAS, "gauss": GAUSS, "sine": SINE}.get(name)
                       or ehrenpreis(self.T))
        return out


# --- parsing -------------------------------------------------------------------------

_CALL = re.compile(r"^\s*([A-Za-z]\w*)\s*\((.*)\)\s*$", re.S)


def parse_family(text: str) -> pb.DataFamily:
    """'ExpDecay(1, 2)' -> DataFamily; polynomial coefficients go in a list."""
    m = _CALL.match(text)
    if not m:
        raise ConfigError(f"cannot parse data family {text!r}; expected Name(args)")
    name, args = m.group(1), m.group(2).strip()
    if name not in FAMILIES:
        raise ConfigError(f"unknown family {name!r}; choose from {', '.join(FAMILIES)}")
    try:
        vals = ast.literal_eval(f"({args},)") if args else ()
    except (ValueError, SyntaxError) as exc:
        raise ConfigError(f"bad arguments for {name}: {args!r}") from exc
    try:
        return FAMILIES[name](*vals)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}{tuple(vals)}: {exc}") from exc


def _floats(text: str, key: str) -> Tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"{key}: expected comma-separated numbers, got {text!r}") from exc
    if not vals or not all(math.isfinite(v) for v in vals):
        raise ConfigError(f"{key}: need at least one finite number")
    return vals


def _ints(text: str, key: str) -> Tuple[int, ...]:
    vals = _floats(text, key)
    if any(v != int(v) or v < 0 for v in vals):
        raise ConfigError(f"{key}: expected nonnegative integers, got {text!r}")
    return tuple(int(v) for v in vals)


def _number(text: str, key: str) -> float:
    (v,) = _floats(text, key) if "," not in text else (None,)
    if v is None:
        raise ConfigError(f"{key}: expected a single number")
    return v


def _quad_config(section) -> QuadratureConfig:
    kinds = {f.name: f.type for f in fields(QuadratureConfig)}
    kw = {}
    for key, raw in section.items():
        if key not in kinds:
            raise ConfigError(f"[quadrature] unknown key {key!r}; allowed: {', '.join(kinds)}")
        if key in ("max_panels", "order", "ibp_depth"):
            v = _number(raw, key)
            if v != int(v):
                raise ConfigError(f"{key} must be an integer")
            kw[key] = int(v)
        else:
            kw[key] = _number(raw, key)
    try:
        return QuadratureConfig(**kw)
    except ValueError as exc:
        raise ConfigError(f"[quadrature] {exc}") from exc


def _traces(text: str) -> Tuple[Tuple[str, int, float], ...]:
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        if len(parts) != 3 or parts[0] not in ("x0", "t0"):
            raise ConfigError(f"trace {item!r}: expected x0:order:t or t0:order:x")
        try:
            n, anchor = int(parts[1]), float(parts[2])
        except ValueError as exc:
            raise ConfigError(f"trace {item!r}: bad order or anchor") from exc
        cap = DX_CAP if parts[0] == "x0" else DT_CAP
        if not 0 <= n <= cap:
            raise ConfigError(f"trace {item!r}: order must be in 0..{cap}")
        if not anchor > 0:
            raise ConfigError(f"trace {item!r}: anchor must be positive")
        out.append((parts[0], n, anchor))
    if not out:
        raise ConfigError("traces: empty list")
    return tuple(out)


_EXPERIMENT_KEYS = {"xs", "ts", "representations", "t", "traces", "corner_orders", "point",
                    "base_nodes", "doublings", "study_order", "study_radius", "radius_start",
                    "output"}


def load_config(text: str) -> RunConfig:
    """Parse and validate a config; every problem is reported as ConfigError."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0]) from exc
    unknown = set(cp.sections()) - {"problem", "quadrature", "experiment"}
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
    if not cp.has_section("problem"):
        raise ConfigError("missing [problem] section")
    ps = cp["problem"]
    extra = set(ps) - {"u0", "g0", "label"}
    if extra:
        raise ConfigError(f"[problem] unknown key(s): {', '.join(sorted(extra))}")
    if "u0" not in ps or "g0" not in ps:
        raise ConfigError("[problem] needs u0 and g0")
    u0, g0 = parse_family(ps["u0"]), parse_family(ps["g0"])
    try:
        problem = pb.HalfLineProblem(u0, g0, ps.get("label", ""))
    except ValueError as exc:
        raise ConfigError(f"[problem] {exc}") from exc
    quad = _quad_config(cp["quadrature"]) if cp.has_section("quadrature") else QuadratureConfig()
    cfg = RunConfig(problem, quad)
    if not cp.has_section("experiment"):
        return cfg
    ex = cp["experiment"]
    extra = set(ex) - _EXPERIMENT_KEYS
    if extra:
        raise ConfigError(f"[experiment] unknown key(s): {', '.join(sorted(extra))}")
    if "xs" in ex:
        cfg.xs = _floats(ex["xs"], "xs")
    if "ts" in ex:
        cfg.ts = _floats(ex["ts"], "ts")
    if "representations" in ex:
        names = tuple(s.strip().lower() for s in ex["representations"].split(",") if s.strip())
        bad = [n for n in names if n not in REPRESENTATIONS]
        if bad or not names:
            raise ConfigError(f"representations: unknown {bad}; choose from {REPRESENTATIONS}")
        cfg.representations = names
    if "t" in ex:
        cfg.T = _number(ex["t"], "T")
    if "traces" in ex:
        cfg.traces = _traces(ex["traces"])
    if "corner_orders" in ex:
        cfg.corner_orders = _ints(ex["corner_orders"], "corner_orders")
    if "point" in ex:
        p = _floats(ex["point"], "point")
        if len(p) != 2:
            raise ConfigError("point: expected 'x, t'")
        cfg.point = (p[0], p[1])
    for key in ("base_nodes", "study_radius", "radius_start"):
        if key in ex:
            setattr(cfg, key, _number(ex[key], key))
    for key in ("doublings", "study_order"):
        if key in ex:
            setattr(cfg, key, _ints(ex[key], key)[0])
    if "output" in ex:
        cfg.output = ex["output"].strip() or None
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if any(x < 0 for x in cfg.xs):
        raise ConfigError("xs: every x must be >= 0")
    if any(not t > 0 for t in cfg.ts):
        raise ConfigError("ts: every t must be > 0")
    if "ehrenpreis" in cfg.representations and cfg.T is not None and not cfg.T > max(cfg.ts):
        raise ConfigError(f"horizon rule violated: T = {cfg.T:g} must exceed every t "
                          f"(max t = {max(cfg.ts):g})")
    if any(k > 2 * pb.DERIVATIVE_CAP for k in cfg.corner_orders):
        raise ConfigError(f"corner_orders: k must be <= {2 * pb.DERIVATIVE_CAP}")
    if any(k > DX_CAP for k in cfg.corner_orders):
        raise ConfigError(f"corner_orders: x-derivatives above {DX_CAP} are not evaluated")
    x, t = cfg.point
    if not x > 0 or not t > 0:
        raise ConfigError("point: x and t must be positive")
    if not cfg.base_nodes > 0 or not cfg.study_radius > 0 or not cfg.radius_start > 0:
        raise ConfigError("base_nodes, study_radius and radius_start must be positive")
    if cfg.doublings < 1 or cfg.study_order < 1:
        raise ConfigError("doublings and study_order must be >= 1")


# --- output --------------------------------------------------------------------------

def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def write_csv(header: Sequence[str], rows: Sequence[Sequence], stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])


def gnuplot_script(csv_path: str, header: Sequence[str], command: str) -> str:
    cols = {name: i + 1 for i, name in enumerate(header)}
    lines = ["set datafile separator ','", "set key autotitle columnhead",
             f"set title 'halfheat {command}'"]
    if command == "eval":
        lines += ["set xlabel 'x'", "set ylabel 'u'",
                  f"plot '{csv_path}' using {cols['x']}:{cols['value']} with points"]
    elif command == "convergence":
        lines += ["set logscale y", "set xlabel 'parameter'", "set ylabel 'error'",
                  f"plot '{csv_path}' using {cols['parameter']}:{cols['est_error']} "
                  "with linespoints"]
    elif command == "corner":
        lines += ["set xlabel 'k'", "set ylabel 'limit'",
                  f"plot '{csv_path}' using {cols['k']}:{cols['limit']}:{cols['est_error']} "
                  "with yerrorbars"]
    elif command == "trace":
        lines += ["set xlabel 'anchor'",
                  f"plot '{csv_path}' using {cols['anchor']}:{cols['value']}:"
                  f"{cols['est_error']} with yerrorbars"]
    else:
        lines += ["set logscale y",
                  f"plot '{csv_path}' using 0:{cols['max_abs_diff']}:xtic(1) with boxes"]
    return "\n".join(lines) + "\n"


# --- workers (top level so the process pool can pickle them) ----------------------------

def _eval_task(args):
    problem, rep, x, t, cfg = args
    return evaluate(problem, rep, x, t, cfg)


def _residual_task(args):
    problem, x, t, T, cfg = args
    a = eval_dt(problem, 1, x, t, T, cfg)
    b = eval_dx(problem, 2, x, t, cfg)
    return a.value - b.value, a.est_error + b.est_error


def _trace_task(args):
    problem, (direction, n, anchor), cfg = args
    if direction == "x0":
        return trace_x_to_0(problem, n, anchor, cfg)
    return trace_t_to_0(problem, n, anchor, cfg)


def _corner_task(args):
    problem, k, cfg = args
    return corner_limit(problem, k, cfg)


def _run(fn, tasks: List, jobs: int) -> List:
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


# --- commands -------------------------------------------------------------------------

def _grid(cfg: RunConfig):
    return [(x, t) for x in cfg.xs for t in cfg.ts]


def cmd_eval(cfg: RunConfig, jobs: int = 1):
    header = ["x", "t", "representation", "value", "est_error"]
    tasks = [(cfg.problem, rep, x, t, cfg.quad) for x, t in _grid(cfg) for rep in cfg.reps()]
    res = _run(_eval_task, tasks, jobs)
    rows = [[r.x, r.t, str(task[1]), r.value, r.est_error] for task, r in zip(tasks, res)]
    return header, rows


def cmd_compare(cfg: RunConfig, jobs: int = 1):
    header = ["kind", "a", "b", "max_abs_diff", "mean_abs_diff", "est_error"]
    grid = _grid(cfg)
    reps = cfg.reps()
    tasks = [(cfg.problem, rep, x, t, cfg.quad) for x, t in grid for rep in reps]
    res = _run(_eval_task, tasks, jobs)
    table = {}
    for task, r in zip(tasks, res):
        table[(str(task[1]), task[2], task[3])] = r
    rows = []
    names = [str(r) for r in reps]
    for a, b in combinations(names, 2):
        diffs, errs = [], []
        for x, t in grid:
            ra, rb = table[(a, x, t)], table[(b, x, t)]
            diffs.append(abs(ra.value - rb.value))
            errs.append(ra.est_error + rb.est_error)
        rows.append(["spread", a, b, max(diffs), sum(diffs) / len(diffs), max(errs)])
    pts = [(x, t) for x, t in grid if x > 0]
    if pts:
        rtasks = [(cfg.problem, x, t, cfg.T, cfg.quad) for x, t in pts]
        rres = _run(_residual_task, rtasks, jobs)
        diffs = [abs(d) for d, _ in rres]
        rows.append(["pde_residual", "u_t", "u_xx", max(diffs), sum(diffs) / len(diffs),
                     max(e for _, e in rres)])
    return header, rows


def cmd_trace(cfg: RunConfig, jobs: int = 1):
    header = ["direction", "order", "anchor", "value", "est_error", "converged"]
    tasks = [(cfg.problem, tr, cfg.quad) for tr in cfg.traces]
    res = _run(_trace_task, tasks, jobs)
    rows = [[d, n, a, r.value, r.est_error, r.converged] for (d, n, a), r in zip(cfg.traces, res)]
    return header, rows


def cmd_corner(cfg: RunConfig, jobs: int = 1):
    header = ["k", "path", "limit", "est_error", "converged", "compat_order", "predicted",
              "agrees"]
    tasks = [(cfg.problem, k, cfg.quad) for k in cfg.corner_orders]
    reports = _run(_corner_task, tasks, jobs)
    rows = []
    for rep in reports:
        for name, tr in rep.paths:
            rows.append([rep.k, name, tr.value, tr.est_error, tr.converged, rep.compat_order,
                         rep.predicted_limit, rep.agrees])
    return header, rows


def convergence_rows(cfg: RunConfig) -> List[list]:
    """Fixed-rule node doubling and contour-radius doubling at cfg.point.

    The node study uses a low-order composite Gauss-Legendre rule so the
    error stays above roundoff for every doubling; its error column is the
    distance to the adaptive reference value.
    """
    x, t = cfg.point
    problem = cfg.problem
    ref = eval_fokas(problem, x, t, cfg.quad)
    rows = []
    prev_err = None
    for j in range(cfg.doublings + 1):
        n = cfg.base_nodes * 2 ** j
        qc = QuadratureConfig(**{**_asdict(cfg.quad), "nodes_per_unit": n,
                                 "order": cfg.study_order, "radius": cfg.study_radius})
        v = eval_fokas(problem, x, t, qc).value
        err = abs(v - ref.value) + ref.est_error
        ratio = prev_err / err if prev_err is not None and err > 0 else None
        order = math.log2(ratio) if ratio else None
        rows.append(["nodes", n, v, err, None, ratio, order, None])
        prev_err = err
    vals = []
    for j in range(cfg.doublings + 2):
        R = cfg.radius_start * 2 ** j
        qc = QuadratureConfig(**{**_asdict(cfg.quad), "radius": R})
        vals.append((R, eval_fokas(problem, x, t, qc)))
    for (R, a), (_, b) in zip(vals[:-1], vals[1:]):
        rows.append(["radius", R, a.value, a.est_error, abs(b.value - a.value), None, None,
                     gamma_tail_bound(x, R, 0)])
    return rows


def _asdict(q: QuadratureConfig) -> dict:
    return {f.name: getattr(q, f.name) for f in fields(q)}


def cmd_convergence(cfg: RunConfig, jobs: int = 1):
    header = ["study", "parameter", "value", "est_error", "change", "ratio", "fitted_order",
              "tail_bound"]
    return header, convergence_rows(cfg)


COMMANDS = {
    "eval": cmd_eval,
    "compare": cmd_compare,
    "trace": cmd_trace,
    "corner": cmd_corner,
    "convergence": cmd_convergence,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="halfheat",
                                description="Half-line heat equation: evaluation and "
                                            "boundary-behaviour experiments.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="INI run configuration")
    p.add_argument("--out", help="CSV output path (default: config output, else stdout)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--plot-script", action="store_true",
                   help="also write a gnuplot script next to the CSV")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        cfg = load_config(text)
        out = args.out or cfg.output
        if args.plot_script and not out:
            raise ConfigError("--plot-script needs an output file (--out)")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        header, rows = COMMANDS[args.command](cfg, args.jobs)
    except HorizonError as exc:
        print(f"config error: horizon rule violated: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, OverflowError, pb.DomainError, FloatingPointError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if out:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            write_csv(header, rows, fh)
        if args.plot_script:
            base, _ = os.path.splitext(out)
            with open(base + ".gp", "w", encoding="utf-8") as fh:
                fh.write(gnuplot_script(out, header, args.command))
    else:
        buf = io.StringIO()
        write_csv(header, rows, buf)
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
