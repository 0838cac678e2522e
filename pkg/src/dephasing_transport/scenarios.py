"""Registry of named experiments and the manifest-writing runner."""

from __future__ import annotations

import json
import math
import platform
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
import scipy

from . import __version__
from .collision import CollisionSchedule, collision_evolve
from .config import RunConfig, format_horizon, load_config, parse_free, parse_horizon
from .entanglement import AncillaNetwork, entanglement_trajectory
from .network import SpecError, build_liouvillian, initial_state
from .optimize import OptimizationProblem, Table, optimize_dephasing, sweep
from .presets import (
    FMO_GAMMA_OPT_INF,
    FMO_GAMMA_OPT_T5,
    detuned_chain,
    entanglement_chain,
    fmo_preset,
    linear_chain,
)
from .propagate import IntegrationError, NonConvergentError, evolve, p_sink_at

EXIT_OK = 0
EXIT_UNKNOWN = 2
EXIT_UNWRITABLE = 3
EXIT_FAILURE = 4

FIG2_GRID = tuple(sorted(
    set(np.round(np.arange(0.0, 8.0 + 1e-9, 0.25), 10)) | {0.9, 0.95, 0.98, 1.02, 1.05, 1.1}
))
FIG3_GRID = (0.0,) + tuple(np.logspace(-3, 3, 121))
FIG6_FACTORS = (0.0, 0.0064, 0.16, 1.0)


@dataclass
class RunContext:
    out_dir: Path
    seed: int = 0
    threads: int = 1
    overrides: dict | None = None

    def get(self, key, default):
        return (self.overrides or {}).get(key, default)

    def path(self, name: str) -> Path:
        return self.out_dir / name


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    run: Callable[[RunContext], tuple[dict, list[str]]]


def _fmo(ctx: RunContext, horizon: float, reported, tag: str):
    spec = fmo_preset()
    results = {"horizon": format_horizon(horizon), "p_sink": p_sink_at(spec, horizon)}
    outputs = []
    if reported is not None:
        results["p_sink_reported_gamma"] = p_sink_at(spec.with_dephasing(reported), horizon)
        results["reported_gamma"] = list(reported)
    if math.isfinite(horizon):
        traj = evolve(build_liouvillian(spec), initial_state(spec, 1), horizon, method="expm")
        traj.to_csv(ctx.path(f"{tag}_trajectory.csv"))
        outputs.append(f"{tag}_trajectory.csv")
    if _truthy(ctx.get("optimize", tag == "fmo-inf")):
        problem = OptimizationProblem(
            spec, horizon=horizon, seed=ctx.seed,
            restarts=int(ctx.get("restarts", 16)), budget=int(ctx.get("budget", 20_000)),
        )
        res = optimize_dephasing(problem, workers=ctx.threads)
        results["optimized"] = res.summary()
        Table(["site", "gamma"], list(enumerate(res.best_gamma, start=1))).to_csv(
            ctx.path(f"{tag}_optimum.csv"))
        outputs.append(f"{tag}_optimum.csv")
    return results, outputs


def _truthy(value) -> bool:
    if isinstance(value, str):
        return value.strip().lower() in {"1", "true", "yes", "on"}
    return bool(value)


def run_fmo(ctx):
    horizon = parse_horizon(ctx.get("horizon", 5.0))
    known = FMO_GAMMA_OPT_INF if math.isinf(horizon) else FMO_GAMMA_OPT_T5
    return _fmo(ctx, horizon, known if horizon in (5.0, math.inf) else None, "fmo")


def run_fmo_t5(ctx):
    return _fmo(ctx, 5.0, FMO_GAMMA_OPT_T5, "fmo-t5")


def run_fmo_inf(ctx):
    return _fmo(ctx, math.inf, FMO_GAMMA_OPT_INF, "fmo-inf")


def run_fig2(ctx):
    table = sweep(
        detuned_chain(), "omega_2", ctx.get("grid", FIG2_GRID), optimize=True,
        seed=ctx.seed, restarts=int(ctx.get("restarts", 4)),
        budget=int(ctx.get("budget", 2000)), workers=ctx.threads,
    )
    table.to_csv(ctx.path("fig2.csv"))
    dp = table.column("delta_p")
    return {"max_delta_p": float(dp.max()),
            "argmax_omega_2": float(table.column("omega_2")[dp.argmax()])}, ["fig2.csv"]


def run_fig3(ctx):
    table = sweep(detuned_chain(4.0), "gamma_2", ctx.get("grid", FIG3_GRID))
    table.to_csv(ctx.path("fig3.csv"))
    dp = table.column("delta_p")
    return {"max_delta_p": float(dp.max()),
            "argmax_gamma_2": float(table.column("gamma_2")[dp.argmax()])}, ["fig3.csv"]


def fig4_optimal_gamma(seed: int = 0, workers: int = 1) -> tuple[float, ...]:
    """Dephasing that maximises T = inf transfer on the four-site chain."""
    problem = OptimizationProblem(entanglement_chain(), restarts=8, budget=4000, seed=seed)
    return optimize_dephasing(problem, workers=workers).best_gamma


def run_fig4(ctx):
    T = float(ctx.get("T", 20.0))
    gamma = fig4_optimal_gamma(ctx.seed, ctx.threads)
    net = AncillaNetwork(entanglement_chain())
    results = {"T": T, "optimal_gamma": list(gamma)}
    outputs = []
    for label, g in (("zero", (0.0,) * 4), ("optimal", gamma)):
        series = entanglement_trajectory(net.with_dephasing(g), T)
        series.to_csv(ctx.path(f"fig4_{label}.csv"))
        outputs.append(f"fig4_{label}.csv")
        results[f"peak_concurrence_{label}"] = series.concurrence.max(axis=0).tolist()
    return results, outputs


def run_fig6(ctx):
    dt = float(ctx.get("dt", 1e-3))
    T = float(ctx.get("T", 5.0))
    memory = int(ctx.get("memory", 1))
    spec = fmo_preset()
    rows = []
    outputs = []
    for factor in FIG6_FACTORS:
        schedule = CollisionSchedule.calibrated(FMO_GAMMA_OPT_T5, dt, T, memory, factor)
        traj = collision_evolve(spec, schedule)
        name = f"fig6_factor_{factor:g}.csv"
        traj.to_csv(ctx.path(name))
        outputs.append(name)
        lindblad = p_sink_at(spec.with_dephasing([factor * g for g in FMO_GAMMA_OPT_T5]), T)
        rows.append((factor, traj.final_p_sink, lindblad))
    Table(["factor", "p_sink_collision", "p_sink_lindblad"], rows).to_csv(ctx.path("fig6.csv"))
    outputs.append("fig6.csv")
    return {"rows": [list(r) for r in rows], "dt": dt, "memory": memory}, outputs


def uniform_chain_draws(seed: int = 0, sizes=range(2, 7), per_size: int = 3):
    """Random uniform chains: rates log-uniform in [1e-3, 10], hopping in [1e-2, 1]."""
    rng = np.random.default_rng([seed, 7919])
    lo_r, hi_r = math.log(1e-3), math.log(10.0)
    lo_v, hi_v = math.log(1e-2), math.log(1.0)
    draws = []
    for n in sizes:
        for i in range(per_size):
            diss, sink = np.exp(rng.uniform(lo_r, hi_r, 2))
            v = math.exp(rng.uniform(lo_v, hi_v))
            draws.append((n, i, float(diss), float(v), float(sink)))
    return draws


def run_uniform_null(ctx):
    rows = []
    for n, i, diss, v, sink in uniform_chain_draws(ctx.seed):
        spec = linear_chain(n, v, 1.0, diss, sink)
        for horizon in (5.0, math.inf):
            problem = OptimizationProblem(
                spec, horizon=horizon, seed=ctx.seed + i,
                restarts=int(ctx.get("restarts", 16)), budget=int(ctx.get("budget", 20_000)),
            )
            res = optimize_dephasing(problem, workers=ctx.threads)
            rows.append((n, i, horizon, diss, v, sink,
                         res.baseline_p_sink, res.best_p_sink, res.delta_p))
    table = Table(["n_sites", "draw", "horizon", "gamma_diss", "v", "sink_rate",
                   "p_sink_0", "p_sink_opt", "delta_p"], rows)
    table.to_csv(ctx.path("uniform_chain_null.csv"))
    return {"max_delta_p": float(table.column("delta_p").max())}, ["uniform_chain_null.csv"]


def run_config(ctx, config: RunConfig):
    """Run a user configuration: transfer at its horizon, optionally optimised."""
    spec = config.spec
    results = {"p_sink": p_sink_at(spec, config.horizon, config.initial)}
    outputs = []
    if math.isfinite(config.horizon):
        traj = evolve(build_liouvillian(spec), initial_state(spec, config.initial),
                      config.horizon, method="expm")
        traj.to_csv(ctx.path("trajectory.csv"))
        outputs.append("trajectory.csv")
    if config.optimize:
        opt = config.optimize
        problem = OptimizationProblem(
            spec, horizon=config.horizon, initial=config.initial,
            free=parse_free(opt.get("free"), spec.n_sites),
            restarts=int(opt.get("restarts", 16)), budget=int(opt.get("budget", 20_000)),
            gamma_max=float(opt.get("gamma_max", 1e3)), seed=int(opt.get("seed", ctx.seed)),
        )
        res = optimize_dephasing(problem, workers=ctx.threads)
        results["optimized"] = res.summary()
        Table(["site", "gamma"], list(enumerate(res.best_gamma, start=1))).to_csv(
            ctx.path("optimum.csv"))
        outputs.append("optimum.csv")
    return results, outputs


REGISTRY: dict[str, Scenario] = {
    s.name: s
    for s in (
        Scenario("fmo", "FMO complex at an arbitrary --horizon (default 5)", run_fmo),
        Scenario("fmo-t5", "FMO complex, T = 5: zero and reported dephasing", run_fmo_t5),
        Scenario("fmo-inf", "FMO complex, T = inf, plus optimisation", run_fmo_inf),
        Scenario("fig2", "detuning sweep with per-point optimisation", run_fig2),
        Scenario("fig3", "dephasing sweep on the detuned chain", run_fig3),
        Scenario("fig4", "ancilla concurrence with zero and optimal dephasing", run_fig4),
        Scenario("fig6", "collision-model dephasing on the FMO complex", run_fig6),
        Scenario("uniform-chain-null", "optimised gain on random uniform chains",
                 run_uniform_null),
    )
}


def _versions() -> dict:
    return {"dephasing_transport": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__}


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return "inf" if math.isinf(obj) else float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def run_scenario(
    target: str,
    out_dir: str | Path = ".",
    seed: int = 0,
    threads: int = 1,
    overrides: dict | None = None,
) -> tuple[int, dict]:
    """Run a registry scenario, a config file, or a previous manifest.

    Returns ``(exit_code, manifest)``. Exit codes: 0 success, 2 unknown
    scenario or bad configuration, 3 unwritable output directory, 4 simulation
    failure.
    """
    overrides = dict(overrides or {})
    config = None
    name = target
    if target not in REGISTRY:
        path = Path(target)
        if not path.is_file():
            return EXIT_UNKNOWN, {"error": f"unknown scenario {target!r}"}
        try:
            data = json.loads(path.read_text()) if path.suffix == ".json" else None
            if isinstance(data, dict) and "scenario" in data and "seed" in data:
                # a previous manifest: replay it exactly
                name = data["scenario"]
                seed = int(data["seed"])
                overrides = {**data.get("overrides", {}), **overrides}
                if name not in REGISTRY:
                    config = RunConfig.from_dict(data["config"])
            else:
                config = load_config(path)
                name = path.stem
        except (SpecError, ValueError, KeyError, OSError) as exc:
            return EXIT_UNKNOWN, {"error": f"bad configuration {target!r}: {exc}"}
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        return EXIT_UNWRITABLE, {"error": f"cannot write to {out}: {exc}"}

    ctx = RunContext(out, seed, threads, overrides)
    start = time.perf_counter()
    try:
        if config is not None:
            results, outputs = run_config(ctx, config)
        else:
            results, outputs = REGISTRY[name].run(ctx)
    except (IntegrationError, NonConvergentError, FloatingPointError, ArithmeticError,
            np.linalg.LinAlgError, RuntimeError) as exc:
        return EXIT_FAILURE, {"error": f"simulation failed: {exc}"}
    except (SpecError, ValueError) as exc:
        return EXIT_UNKNOWN, {"error": f"bad scenario parameters: {exc}"}
    except OSError as exc:
        return EXIT_UNWRITABLE, {"error": f"cannot write outputs: {exc}"}
    manifest = {
        "scenario": name,
        "seed": seed,
        "threads": threads,
        "overrides": overrides,
        "config": config.to_dict() if config is not None else None,
        "versions": _versions(),
        "wall_time_s": time.perf_counter() - start,
        "results": results,
        "outputs": outputs,
    }
    manifest = jsonable(manifest)
    try:
        (out / f"{name}_manifest.json").write_text(json.dumps(manifest, indent=2))
    except OSError as exc:
        return EXIT_UNWRITABLE, {"error": f"cannot write manifest: {exc}"}
    return EXIT_OK, manifest
