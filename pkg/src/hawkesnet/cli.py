"""Command-line entry point: ``hawkesnet <subcommand> ...``.

Exit codes: 0 success, 1 numerical failure, 2 usage, configuration or schema error.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import warnings
from functools import partial
from pathlib import Path

import numpy as np

from . import graph as graphmod
from . import reference
from .errors import ConfigError, HawkesError, ModeRecoveryFailure, SchemaError
from .model import analytic_cov_fourier, load_model, save_model, validate
from .modes import default_omega_grid, fit_modes, trace_profile
from .moments import estimate_cov, estimate_cov_density, export_series_csv
from .pipeline import LearnConfig, _lags, estimate_modes, learn, run_seeds
from .simulator import intensity_trace, load_events, save_events, simulate

log = logging.getLogger("hawkesnet")

EXAMPLES = {
    "five-node": reference.five_node_model,
    "two-node": reference.two_node_model,
    "univariate": reference.univariate_model,
}
EXAMPLE_GRAPHS = {
    "five-node": (5, reference.FIVE_NODE_EDGES),
    "fifteen-node": (15, reference.FIFTEEN_NODE_EDGES),
}


class UsageError(Exception):
    pass


def _model_arg(spec: str):
    if spec.startswith("example:"):
        name = spec.split(":", 1)[1]
        if name not in EXAMPLES:
            raise UsageError(f"unknown example {name!r}; choose from {sorted(EXAMPLES)}")
        return EXAMPLES[name]()
    return load_model(spec)


def _graph_arg(spec: str, sigma: float | None = None) -> graphmod.CausalGraph:
    """Graph JSON, ``example:NAME``, or a model JSON thresholded at ``sigma``."""
    if spec.startswith("example:"):
        name = spec.split(":", 1)[1]
        if name not in EXAMPLE_GRAPHS:
            raise UsageError(f"unknown example graph {name!r}; choose from {sorted(EXAMPLE_GRAPHS)}")
        m, edges = EXAMPLE_GRAPHS[name]
        return graphmod.CausalGraph.from_edges(m, edges, one_based=True)
    try:
        is_model = "coeffs" in json.loads(Path(spec).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{spec}: not valid JSON ({exc})") from exc
    if is_model:
        return graphmod.build_graph(load_model(spec).kernel.coeffs, sigma)
    return graphmod.load_graph(spec)


def _grid(spec: str):
    try:
        lo, hi, n = spec.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError as exc:
        raise UsageError(f"grid must look like LO:HI:N, got {spec!r}") from exc
    if not (hi > lo and n >= 2):
        raise UsageError(f"bad grid {spec!r}")
    return lo, hi, n


def _floats(spec: str):
    try:
        return [float(x) for x in spec.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {spec!r}") from exc


def _config(args) -> LearnConfig:
    cfg = LearnConfig(z=args.z, delta=args.delta, sigma=args.sigma, d_max=args.dmax)
    if args.tau_max is not None:
        cfg.tau_max = args.tau_max
    if args.cov_tau_max is not None:
        cfg.cov_tau_max = args.cov_tau_max
    if args.omega_grid:
        cfg.omega_min, cfg.omega_max, cfg.n_omega = _grid(args.omega_grid)
        if cfg.omega_min <= 0:
            raise UsageError("omega grid must be positive")
    cfg.check()
    return cfg


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# --- subcommands -------------------------------------------------------------

def _simulate_one(model, T, out, suffix, seed):
    ev = simulate(model, T, seed)
    path = out / f"events_seed{seed}.{suffix}"
    save_events(ev, path)
    return str(path), int(ev.counts().sum())


def cmd_simulate(args) -> int:
    model = _model_arg(args.model)
    rep = validate(model)
    if not rep.ok:
        raise ConfigError("invalid model: " + "; ".join(rep.failures()))
    if not args.T > 0:
        raise UsageError("--T must be positive")
    out = _out_dir(args)
    suffix = "csv" if args.format == "csv" else "jsonl"
    seeds = args.seed or [0]
    results = run_seeds(partial(_simulate_one, model, args.T, out, suffix), seeds)
    for (path, n), s in zip(results, seeds):
        print(f"seed {s}: {n} events -> {path}")
    return 0


def cmd_learn(args) -> int:
    ev = load_events(args.events)
    cfg = _config(args)
    cfg.check(ev.T)
    betas = _floats(args.modes) if args.modes else None
    res = learn(ev, cfg, betas=betas)
    out = _out_dir(args)
    diag = res.diagnostics()
    diag["failed"] = res.status not in ("ok", "no_excitation")
    _write_json(out / "diagnostics.json", diag)
    if res.model is not None:
        save_model(res.model, out / "model.json")
    if args.format == "dot":
        (out / "graph.dot").write_text(graphmod.to_dot(res.graph))
    else:
        graphmod.save_graph(res.graph, out / "graph.json")
    if res.status == "no_excitation":
        print("no excitation detected; the recovered graph is empty")
    for stage, msg in res.stage_errors.items():
        print(f"learn[{stage}]: {msg}", file=sys.stderr)
    print(f"status={res.status} edges={len(res.graph.edges())} -> {out}")
    return 0 if not diag["failed"] else 1


def cmd_eval(args) -> int:
    if args.sigma is not None and args.sigma < 0:
        raise UsageError("--sigma must be nonnegative")
    cand, truth = _graph_arg(args.recovered, args.sigma), _graph_arg(args.truth)
    try:
        rep = graphmod.score(cand, truth).to_dict()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    text = json.dumps(rep, indent=2, sort_keys=True)
    if args.out_dir:
        _write_json(_out_dir(args) / "score.json", rep)
    print(text)
    return 0


def cmd_trace(args) -> int:
    model = _model_arg(args.model)
    ev = load_events(args.events, m=model.m)
    if ev.m != model.m:
        raise SchemaError(f"events have {ev.m} processes, model has {model.m}")
    if args.grid:
        lo, hi, n = _grid(args.grid)
        grid = np.linspace(lo, hi, n)
    else:
        grid = np.arange(0.0, ev.T + 0.5 * args.step, args.step)
    lam = intensity_trace(model, ev, grid)
    path = _out_dir(args) / "intensity.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t"] + [f"lambda_{i}" for i in range(model.m)])
        for k, t in enumerate(grid):
            w.writerow([repr(float(t))] + [repr(float(x)) for x in lam[:, k]])
    print(f"{grid.size} rows -> {path}")
    return 0


def cmd_modes(args) -> int:
    out = _out_dir(args)
    cfg = _config(args)
    if args.analytic:
        model = _model_arg(args.analytic)
        fn = lambda w: analytic_cov_fourier(model, w, cfg.z)
        if cfg.omega_min is not None:
            grid = np.geomspace(cfg.omega_min, cfg.omega_max, cfg.n_omega)
        else:
            grid = default_omega_grid(fn, cfg.z, n=cfg.n_omega)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            prof = trace_profile(fn, cfg.z, grid)
        run = lambda: fit_modes(prof, cfg.d_max, plateau=cfg.plateau)
    else:
        if not args.events:
            raise UsageError("modes needs an events file or --analytic MODEL")
        ev = load_events(args.events)
        cfg.check(ev.T)
        run = lambda: estimate_modes(ev, cfg)
    try:
        est = run()
    except ModeRecoveryFailure as exc:
        if "no excitation" not in str(exc):
            raise
        res = exc.diagnostics.get("residuals", {})
        rep = {"D": 0, "betas": [], "residuals": [res.get(d) for d in range(cfg.d_max + 1)],
               "status": "no_excitation"}
        _write_json(out / "modes.json", rep)
        print("no excitation detected")
        return 0
    rep = est.to_dict()
    rep["residuals"] = [est.scores.get(d) for d in range(cfg.d_max + 1)]
    rep["status"] = "ok"
    _write_json(out / "modes.json", rep)
    if args.format == "csv" and args.analytic:
        with (out / "profile.csv").open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["omega", "g"])
            for a, b in zip(prof.omega, prof.values):
                w.writerow([repr(float(a)), repr(float(b))])
    print(f"D={est.D} betas={np.round(est.betas, 6).tolist()}")
    return 0


def cmd_moments(args) -> int:
    ev = load_events(args.events)
    cfg = _config(args)
    cfg.check(ev.T)
    out = _out_dir(args)
    cov = estimate_cov(ev, cfg.z, _lags(ev.T, cfg.delta, cfg.cov_tau_max, cfg.z))
    export_series_csv(cov.lags, cov.values, out / "cov.csv")
    dens = estimate_cov_density(ev, cfg.delta, _lags(ev.T, cfg.delta, cfg.tau_max, cfg.delta)[-1])
    export_series_csv(dens.lags, dens.values, out / "density.csv")
    _write_json(out / "rates.json", {"rates": cov.rates.tolist(), "T": ev.T})
    print(f"{cov.lags.size} covariance lags, {dens.lags.size} density lags -> {out}")
    return 0


# --- parser ------------------------------------------------------------------

def _add_learn_flags(p):
    d = LearnConfig()
    p.add_argument("--z", type=float, default=d.z, help="covariance window")
    p.add_argument("--delta", type=float, default=d.delta, help="covariance-density bin width")
    p.add_argument("--sigma", type=float, default=None, help="edge threshold (default: gap heuristic)")
    p.add_argument("--dmax", type=int, default=d.d_max, help="largest number of modes tried")
    p.add_argument("--tau-max", type=float, default=None, help=f"covariance-density lag range (default {d.tau_max})")
    p.add_argument("--cov-tau-max", type=float, default=None,
                   help=f"windowed-covariance lag range (default {d.cov_tau_max})")
    p.add_argument("--omega-grid", default=None, help="LO:HI:N log-spaced frequency grid")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hawkesnet", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate event logs from a model file")
    p.add_argument("model", help="model JSON or example:{five-node,two-node,univariate}")
    p.add_argument("--T", type=float, required=True, help="horizon")
    p.add_argument("--seed", type=int, nargs="+", help="one or more seeds (default 0)")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("learn", help="recover the causal graph from an event log")
    p.add_argument("events")
    _add_learn_flags(p)
    p.add_argument("--modes", default=None, help="comma-separated known modes (skip mode recovery)")
    p.add_argument("--out-dir", default=".")
    p.add_argument("--format", choices=["json", "dot"], default="json")
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("eval", help="score a recovered graph against a reference graph")
    p.add_argument("recovered", help="graph JSON, or a recovered model JSON to threshold")
    p.add_argument("truth", help="graph JSON or example:{five-node,fifteen-node}")
    p.add_argument("--sigma", type=float, default=None, help="threshold for a model JSON (default: gap heuristic)")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("trace", help="conditional intensities of a model along an event log")
    p.add_argument("model")
    p.add_argument("events")
    p.add_argument("--grid", default=None, help="LO:HI:N evaluation times")
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--format", choices=["csv"], default="csv")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("modes", help="recover the kernel decay rates (modes) only")
    p.add_argument("events", nargs="?")
    p.add_argument("--analytic", default=None, metavar="MODEL", help="use the exact spectrum of MODEL")
    _add_learn_flags(p)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_modes)

    p = sub.add_parser("moments", help="estimate rates, windowed covariance and covariance density")
    p.add_argument("events")
    _add_learn_flags(p)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--format", choices=["csv"], default="csv")
    p.set_defaults(func=cmd_moments)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, SchemaError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"hawkesnet {args.command}: {exc}", file=sys.stderr)
        return 2
    except ModeRecoveryFailure as exc:
        print(f"hawkesnet {args.command}[modes]: {exc}", file=sys.stderr)
        return 1
    except (HawkesError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"hawkesnet {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
