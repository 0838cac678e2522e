"""Command-line entry point: ``dephasing-transport <subcommand>``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np
import yaml

from .collision import CalibrationError, CollisionSchedule, collision_evolve
from .config import RunConfig, format_horizon, load_config, parse_free, parse_horizon
from .entanglement import AncillaNetwork, entanglement_trajectory
from .network import SpecError, build_liouvillian, initial_state
from .optimize import OptimizationProblem, Table, optimize_dephasing, sweep
from .presets import FMO_GAMMA_OPT_T5, entanglement_chain, fmo_preset
from .propagate import IntegrationError, NonConvergentError, evolve, p_sink_at
from .scenarios import (
    EXIT_FAILURE,
    EXIT_OK,
    EXIT_UNKNOWN,
    EXIT_UNWRITABLE,
    REGISTRY,
    fig4_optimal_gamma,
    jsonable,
    run_scenario,
)


def _config(args, default=None) -> RunConfig:
    if args.config:
        return load_config(args.config)
    if default is None:
        raise SpecError("--config is required for this command")
    return default


def _out(args, name: str) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out / name


def _emit(data: dict) -> None:
    print(yaml.safe_dump(jsonable(data), sort_keys=False).rstrip())


def _parse_grid(text: str) -> np.ndarray:
    """``start:stop:num`` (inclusive linspace) or a comma list."""
    if ":" in text:
        start, stop, num = text.split(":")
        return np.linspace(float(start), float(stop), int(num))
    return np.array([float(x) for x in text.split(",") if x.strip()])


def cmd_simulate(args) -> int:
    cfg = _config(args)
    horizon = parse_horizon(args.horizon) if args.horizon else cfg.horizon
    result = {"horizon": format_horizon(horizon),
              "p_sink": p_sink_at(cfg.spec, horizon, cfg.initial)}
    if math.isfinite(horizon):
        traj = evolve(build_liouvillian(cfg.spec), initial_state(cfg.spec, cfg.initial),
                      horizon, times=args.samples, method=args.method)
        path = _out(args, "trajectory.csv")
        traj.to_csv(path)
        result["trajectory"] = str(path)
        result["diagnostics"] = {k: (float(v) if isinstance(v, (float, np.floating)) else v)
                                 for k, v in traj.diagnostics.items()}
    _emit(result)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _config(args)
    horizon = parse_horizon(args.horizon) if args.horizon else cfg.horizon
    table = sweep(cfg.spec, args.variable, _parse_grid(args.grid), optimize=args.optimize,
                  horizon=horizon, initial=cfg.initial, seed=args.seed,
                  restarts=args.restarts, budget=args.budget, workers=args.threads)
    path = _out(args, f"sweep_{args.variable}.csv")
    table.to_csv(path)
    _emit({"rows": len(table.rows), "csv": str(path)})
    return EXIT_OK


def cmd_optimize(args) -> int:
    cfg = _config(args)
    opt = cfg.optimize
    horizon = parse_horizon(args.horizon) if args.horizon else cfg.horizon
    free = parse_free(args.free if args.free is not None else opt.get("free"), cfg.spec.n_sites)
    problem = OptimizationProblem(
        cfg.spec, horizon=horizon, free=free, initial=cfg.initial,
        restarts=args.restarts or int(opt.get("restarts", 16)),
        budget=args.budget or int(opt.get("budget", 20_000)),
        gamma_max=float(opt.get("gamma_max", 1e3)), seed=args.seed,
    )
    res = optimize_dephasing(problem, workers=args.threads)
    Table(["site", "gamma"], list(enumerate(res.best_gamma, start=1))).to_csv(
        _out(args, "optimum.csv"))
    Table(["restart", "evaluations", "best_p_sink"],
          [(r.index, r.evaluations, r.best_p_sink) for r in res.restarts]).to_csv(
        _out(args, "restarts.csv"))
    summary = res.summary()
    summary.pop("restarts")
    summary["horizon"] = format_horizon(horizon)
    _emit(summary)
    return EXIT_OK


def cmd_entanglement(args) -> int:
    cfg = _config(args, RunConfig(entanglement_chain()))
    n = cfg.spec.n_sites
    if args.dephasing == "zero":
        gamma = (0.0,) * n
    elif args.dephasing == "optimal":
        if args.config:
            gamma = optimize_dephasing(OptimizationProblem(
                cfg.spec.with_dephasing((0.0,) * n), restarts=8, budget=4000, seed=args.seed,
            ), workers=args.threads).best_gamma
        else:
            gamma = fig4_optimal_gamma(args.seed, args.threads)
    else:
        gamma = load_config(args.dephasing).spec.gamma_deph
    net = AncillaNetwork(cfg.spec.with_dephasing(gamma))
    series = entanglement_trajectory(net, args.T, times=args.samples)
    path = _out(args, f"entanglement_{Path(args.dephasing).stem}.csv")
    series.to_csv(path)
    _emit({"gamma": list(gamma), "peak_concurrence": series.concurrence.max(axis=0).tolist(),
           "csv": str(path)})
    return EXIT_OK


def cmd_collision(args) -> int:
    cfg = _config(args, RunConfig(fmo_preset(FMO_GAMMA_OPT_T5), horizon=5.0))
    T = args.T if args.T else cfg.horizon
    if not math.isfinite(T):
        raise SpecError("collision runs need a finite horizon")
    schedule = CollisionSchedule.calibrated(cfg.spec.gamma_deph, args.dt, T,
                                            args.memory, args.factor)
    traj = collision_evolve(cfg.spec, schedule, cfg.initial, explicit=args.explicit)
    path = _out(args, f"collision_factor_{args.factor:g}.csv")
    traj.to_csv(path)
    lindblad = p_sink_at(cfg.spec.with_dephasing([args.factor * g for g in cfg.spec.gamma_deph]),
                         T, cfg.initial)
    _emit({"p_sink": traj.final_p_sink, "p_sink_lindblad": lindblad, "csv": str(path)})
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    from .checks import oracle_agreement

    rows = oracle_agreement(n_samples=args.samples, seed=args.seed)
    width = max(len(r["check"]) for r in rows)
    ok = True
    for r in rows:
        status = "PASS" if r["passed"] else "FAIL"
        ok &= r["passed"]
        print(f"{r['check']:<{width}}  max_err={r['max_error']:.3e}  tol={r['tol']:.0e}  {status}")
    return EXIT_OK if ok else EXIT_FAILURE


def cmd_run(args) -> int:
    overrides = {}
    for item in args.set or []:
        key, _, value = item.partition("=")
        overrides[key] = value
    if args.horizon:
        overrides["horizon"] = args.horizon
    target = args.config if args.scenario is None and args.config else args.scenario
    if target is None:
        print("run: give a scenario name or --config", file=sys.stderr)
        return EXIT_UNKNOWN
    code, manifest = run_scenario(target, args.out_dir, args.seed, args.threads, overrides)
    if code != EXIT_OK:
        print(manifest.get("error", "failed"), file=sys.stderr)
    else:
        print(json.dumps(manifest["results"], indent=2))
    return code


def _global_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--config", default=d(None), help="YAML/JSON configuration file")
    parser.add_argument("--out-dir", default=d("."), help="directory for CSV output")
    parser.add_argument("--seed", type=int, default=d(0))
    parser.add_argument("--threads", type=int, default=d(1),
                        help="worker processes for optimiser restarts")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dephasing-transport", description=__doc__)
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        _global_options(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("simulate", cmd_simulate, "propagate a configuration and report p_sink")
    p.add_argument("--horizon")
    p.add_argument("--method", choices=["rk45", "expm"], default="rk45")
    p.add_argument("--samples", type=int, default=200)

    p = add("sweep", cmd_sweep, "scan one parameter (omega_k, gamma_k, v_k_l)")
    p.add_argument("--variable", required=True)
    p.add_argument("--grid", required=True, help="start:stop:num or comma list")
    p.add_argument("--optimize", action="store_true")
    p.add_argument("--horizon")
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--budget", type=int, default=2000)

    p = add("optimize", cmd_optimize, "maximise p_sink over dephasing rates")
    p.add_argument("--horizon", help="T or inf")
    p.add_argument("--free", help="comma list of sites or 'all'")
    p.add_argument("--restarts", type=int)
    p.add_argument("--budget", type=int)

    p = add("entanglement", cmd_entanglement, "ancilla-site concurrence trajectories")
    p.add_argument("--dephasing", default="zero", help="zero, optimal, or a config file")
    p.add_argument("--T", type=float, default=20.0)
    p.add_argument("--samples", type=int, default=200)

    p = add("collision", cmd_collision, "collision-model dephasing")
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--memory", type=int, default=1)
    p.add_argument("--factor", type=float, default=1.0,
                   help="scales the dephasing rates the angles are calibrated to")
    p.add_argument("--T", type=float)
    p.add_argument("--explicit", action="store_true", help="trace out explicit qubits")

    p = add("oracle-check", cmd_oracle_check, "closed forms versus the propagator")
    p.add_argument("--samples", type=int, default=100)

    p = add("run", cmd_run, "run a named scenario, config file or manifest")
    p.add_argument("scenario", nargs="?", help=", ".join(REGISTRY))
    p.add_argument("--horizon")
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, CalibrationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNWRITABLE
    except (IntegrationError, NonConvergentError, ArithmeticError, RuntimeError) as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
