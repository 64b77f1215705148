"""Command-line front end.

Every command writes one table.  CSV output starts with ``#`` header lines
recording the version, the command and all parameters; the first column is
the swept variable (or t, tau, frequency offset).  Units: ``kappa = 1`` and
``omega0 = 10`` unless overridden.

A config file (``--config FILE``) holds ``key = value`` lines mirroring the
flags.  Keys before any ``[section]`` are shared; each section is one run.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import os
import sys
import traceback
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .core import SystemParams, basis_state, number_operators
from .correlations import (component_spectrum, g1, g2_cross, g2_cross_zero, g2_direct,
                           optical_spectrum)
from .entanglement import (concurrence, critical_points, epr_from_state, linear_entropy,
                           negativity, purity)
from .liouvillian import build_liouvillian, evolve, liouvillian_gap, solve_steady_state
from .moments import (PointKind, current_from_state, current_steady, find_meps,
                      population_imbalance)

COMMANDS = ("evolve", "steady", "spectrum", "g2", "measures", "points", "gap", "sweep")
SWEEP_VARS = ("g", "s", "kappa", "omega0")
OBSERVABLES = ("n1", "n2", "imbalance", "current", "epr", "linear_entropy", "concurrence",
               "negativity", "purity", "gap", "g2x0")
WORKER_ENV = "GAINLOSS_MAX_WORKERS"


class Table:
    def __init__(self, columns, rows, meta=None):
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]
        self.meta = dict(meta or {})


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def _header(command, params, extra):
    lines = [("artifact", f"gainloss {__version__}"), ("command", command)]
    for key in ("omega0", "g", "kappa", "s", "n_levels"):
        lines.append((key, _fmt(getattr(params, key))))
    lines.extend((k, _fmt(v)) for k, v in extra.items())
    return lines


def render(table: Table, command, params, extra, fmt) -> str:
    head = _header(command, params, {**extra, **table.meta})
    if fmt == "json":
        doc = {"header": dict(head), "columns": table.columns,
               "rows": [[_json_value(v) for v in r] for r in table.rows]}
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.writelines(f"# {k}: {v}\n" for k, v in head)
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    writer.writerows([_fmt(v) for v in r] for r in table.rows)
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if np.isfinite(v) else None
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


# --- commands ----------------------------------------------------------------

def cmd_evolve(params, args):
    init = tuple(int(x) for x in args.init.split(","))
    ts = np.linspace(0.0, args.tmax, args.steps)
    gen = build_liouvillian(params, sparse=params.n_levels > 6)
    states = evolve(gen, basis_state(init, params.n_levels), ts, method=args.method)
    n1_op, n2_op = number_operators(params.n_levels)
    rows = [[t, np.real(np.trace(n1_op @ r)), np.real(np.trace(n2_op @ r))]
            for t, r in zip(ts, states)]
    return Table(["t", "n1", "n2"], rows, {"init": args.init, "method": args.method})


def _steady_row(params, rho=None):
    rho = solve_steady_state(params) if rho is None else rho
    n1_op, n2_op = number_operators(params.n_levels)
    j = current_steady(params) if params.n_levels == 2 else current_from_state(rho, params)
    return [np.real(np.trace(n1_op @ rho)), np.real(np.trace(n2_op @ rho)),
            population_imbalance(rho, params.n_levels), j]


def cmd_steady(params, args):
    return Table(["g", "n1", "n2", "imbalance", "current"], [[params.g, *_steady_row(params)]])


def cmd_spectrum(params, args):
    deltas = np.linspace(args.wmin, args.wmax, args.count)
    omegas = params.omega0 + deltas
    spec = optical_spectrum(params, args.site, omegas)
    cols = ["delta", "S"]
    data = [deltas, spec.values]
    if params.n_levels == 2 and spec.components:
        for i, comp in enumerate(spec.components[:4], 1):
            cols.append(f"S_mode{i}")
            data.append(component_spectrum(comp, omegas))
    return Table(cols, np.column_stack(data).tolist(), {"site": args.site, "method": spec.method})


def cmd_g2(params, args):
    taus = np.linspace(0.0, args.tmax, args.steps)
    c1, c2 = g1(params, 1, taus).values, g1(params, 2, taus).values
    cols = ["tau", "g1_1_re", "g1_1_im", "g1_2_re", "g1_2_im", "g2_1", "g2_2", "g2_X"]
    data = [taus, c1.real, c1.imag, c2.real, c2.imag, g2_direct(params, 1, taus).values,
            g2_direct(params, 2, taus).values, g2_cross(params, taus).values]
    return Table(cols, np.column_stack(data).tolist())


def _measure_row(params, rho=None):
    rho = solve_steady_state(params) if rho is None else rho
    n = params.n_levels
    conc = concurrence(rho) if n == 2 else float("nan")
    return [epr_from_state(rho, n), linear_entropy(rho), conc, negativity(rho, (n, n)),
            purity(rho), 1.0 / rho.shape[0]]


def cmd_measures(params, args):
    cols = ["g", "epr", "linear_entropy", "concurrence", "negativity", "purity", "purity_floor"]
    return Table(cols, [[params.g, *_measure_row(params)]])


def cmd_points(params, args):
    s, model = params.s, args.model
    rows = []

    def add(kind, reports, note=""):
        if not reports:
            rows.append([kind, "none", "", getattr(reports, "note", "") or note])
        for r in reports:
            rows.append([kind, r.g_over_kappa, r.verified, json.dumps(_jsonable(r.evidence),
                                                                      sort_keys=True)])

    add("TypeI_MEP", find_meps(s, PointKind.TYPE_I_MEP, model))
    add("TypeII_MEP", find_meps(s, PointKind.TYPE_II_MEP, model))
    levels = tuple(int(x) for x in args.trend_levels.split(",")) if args.trend_levels else None
    for rep in critical_points(s, model, trend_levels=levels):
        add(rep.kind.value, [rep])
    rows.append(["PT_symmetric", "", params.is_pt_symmetric, ""])
    return Table(["point", "g_over_kappa", "verified", "evidence"], rows, {"model": model})


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(f"{float(obj):.12g}")
    return obj


def cmd_gap(params, args):
    return Table(["g", "gap"], [[params.g, liouvillian_gap(params)]])


def observe(params: SystemParams, names) -> list:
    """Evaluate the requested observables at one parameter point."""
    out = {}
    state_based = {"n1", "n2", "imbalance", "current", "epr", "linear_entropy",
                   "concurrence", "negativity", "purity"}
    if state_based & set(names):
        rho = solve_steady_state(params)
        n1, n2, imb, j = _steady_row(params, rho)
        epr, lin, conc, neg, pur, _ = _measure_row(params, rho)
        out.update(n1=n1, n2=n2, imbalance=imb, current=j, epr=epr, linear_entropy=lin,
                   concurrence=conc, negativity=neg, purity=pur)
    if "gap" in names:
        out["gap"] = liouvillian_gap(params)
    if "g2x0" in names:
        out["g2x0"] = g2_cross_zero(params) if params.n_levels == 2 else \
            float(g2_cross(params, [0.0]).values[0])
    return [out[n] for n in names]


def _sweep_task(job):
    idx, params, names = job
    return idx, observe(params, names)


def max_workers() -> int:
    cap = os.environ.get(WORKER_ENV)
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ValueError(f"{WORKER_ENV} must be an integer, got {cap!r}")
    return n


def cmd_sweep(params, args):
    names = [x.strip() for x in args.observe.split(",") if x.strip()]
    bad = [n for n in names if n not in OBSERVABLES]
    if bad or not names:
        raise ValueError(f"unknown observable(s) {bad}; choose from {', '.join(OBSERVABLES)}")
    grid = np.linspace(args.start, args.stop, args.count)
    jobs = [(i, params.with_(**{args.var: float(v)}), names) for i, v in enumerate(grid)]
    workers = min(max_workers(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_task, jobs))
    else:
        results = [_sweep_task(j) for j in jobs]
    results.sort(key=lambda r: r[0])
    rows = [[grid[i], *vals] for i, vals in results]
    return Table([args.var, *names], rows, {"var": args.var, "from": args.start,
                                            "to": args.stop, "count": args.count})


HANDLERS = {"evolve": cmd_evolve, "steady": cmd_steady, "spectrum": cmd_spectrum,
            "g2": cmd_g2, "measures": cmd_measures, "points": cmd_points, "gap": cmd_gap,
            "sweep": cmd_sweep}


# --- argument parsing ----------------------------------------------------------

def _positive_int(text):
    v = int(text)
    if v < 2:
        raise argparse.ArgumentTypeError(f"count must be >= 2, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    p = common.add_argument_group("system parameters")
    p.add_argument("--omega0", type=float, default=10.0, help="site frequency (default 10)")
    p.add_argument("--g", type=float, default=1.0, help="coupling (default 1)")
    p.add_argument("--kappa", type=float, default=1.0, help="loss rate, the unit (default 1)")
    p.add_argument("--s", type=float, default=1.0, help="gain ratio (default 1)")
    p.add_argument("--n-levels", type=int, default=2, help="levels per site (default 2)")
    o = common.add_argument_group("output")
    o.add_argument("--format", choices=("csv", "json"), default="csv")
    o.add_argument("--output", "-o", help="output file (default stdout)")

    parser = argparse.ArgumentParser(prog="gainloss", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"gainloss {__version__}")
    parser.add_argument("--config", help="run every section of a key=value config file")
    parser.add_argument("--outdir", default=".", help="directory for config-file outputs")
    sub = parser.add_subparsers(dest="command")

    ev = sub.add_parser("evolve", parents=[common], help="populations n1(t), n2(t)")
    ev.add_argument("--tmax", type=float, default=10.0)
    ev.add_argument("--steps", type=_positive_int, default=201)
    ev.add_argument("--init", default="1,0", help="initial Fock state n1,n2 (default 1,0)")
    ev.add_argument("--method", choices=("auto", "expm", "ode"), default="auto")

    sub.add_parser("steady", parents=[common], help="steady populations and current")

    sp = sub.add_parser("spectrum", parents=[common], help="emission spectrum vs w - omega0")
    sp.add_argument("--site", type=int, choices=(1, 2), default=1)
    sp.add_argument("--wmin", type=float, default=-6.0)
    sp.add_argument("--wmax", type=float, default=6.0)
    sp.add_argument("--count", type=_positive_int, default=1201)

    g2p = sub.add_parser("g2", parents=[common], help="first- and second-order correlators")
    g2p.add_argument("--tmax", type=float, default=10.0)
    g2p.add_argument("--steps", type=_positive_int, default=201)

    sub.add_parser("measures", parents=[common], help="steady-state information measures")

    pt = sub.add_parser("points", parents=[common], help="exceptional and critical points")
    pt.add_argument("--model", choices=("qubit", "oscillator"), default="qubit")
    pt.add_argument("--trend-levels", help="oscillator: comma list of N for the trend check")

    sub.add_parser("gap", parents=[common], help="Liouvillian gap")

    sw = sub.add_parser("sweep", parents=[common], help="tabulate observables over a grid")
    sw.add_argument("--var", choices=SWEEP_VARS, default="g")
    sw.add_argument("--from", dest="start", type=float, required=True)
    sw.add_argument("--to", dest="stop", type=float, required=True)
    sw.add_argument("--count", type=_positive_int, default=100)
    sw.add_argument("--observe", required=True,
                    help=f"comma list from: {', '.join(OBSERVABLES)}")
    return parser


def _params_from(args) -> SystemParams:
    return SystemParams(omega0=args.omega0, g=args.g, kappa=args.kappa, s=args.s,
                        n_levels=args.n_levels)


def _extra(args):
    skip = {"command", "config", "outdir", "format", "output", "omega0", "g", "kappa", "s",
            "n_levels"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None}


def _failing_module(exc) -> str:
    name = "gainloss"
    for frame, _ in traceback.walk_tb(exc.__traceback__):
        mod = frame.f_globals.get("__name__", "")
        if mod.startswith("gainloss.") and mod != "gainloss.cli":
            name = mod
    return name


def execute(args, parser) -> int:
    if args.command == "sweep" and not args.start < args.stop:
        parser.error(f"sweep needs --from < --to, got {args.start} >= {args.stop}")
    try:
        params = _params_from(args)
    except ValueError as exc:
        parser.error(str(exc))
    try:
        table = HANDLERS[args.command](params, args)
    except (ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"gainloss: {args.command} failed in {_failing_module(exc)}: {exc} "
              f"[omega0={params.omega0}, g={params.g}, kappa={params.kappa}, s={params.s}, "
              f"n_levels={params.n_levels}]", file=sys.stderr)
        return 1
    text = render(table, args.command, params, _extra(args), args.format)
    if args.output:
        Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def config_runs(path) -> list[list[str]]:
    """Translate a config file into one argv list per run."""
    text = Path(path).read_text()
    cp = configparser.ConfigParser(default_section="common", interpolation=None)
    cp.read_string("[common]\n" + text)
    runs = []
    for name in cp.sections() or ["common"]:
        sec = dict(cp[name]) if name != "common" else dict(cp.defaults())
        command = sec.pop("command", None)
        if command not in COMMANDS:
            raise ValueError(f"{path} [{name}]: command must be one of {COMMANDS}, got {command!r}")
        stem = Path(path).stem if name == "common" else name
        sec.setdefault("output", f"{stem}.{sec.get('format', 'csv')}")
        argv = [command]
        for key, value in sec.items():
            argv += [f"--{key.replace('_', '-')}", value]
        runs.append(argv)
    return runs


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            runs = config_runs(args.config)
        except (OSError, ValueError, configparser.Error) as exc:
            parser.error(str(exc))
        status = 0
        for run in runs:
            sub_args = parser.parse_args(run)
            sub_args.output = str(Path(args.outdir) / sub_args.output)
            status = max(status, execute(sub_args, parser))
        return status
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    return execute(args, parser)


if __name__ == "__main__":
    sys.exit(main())
