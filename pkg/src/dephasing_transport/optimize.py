"""Directed random-walk maximisation of the sink probability over dephasing rates."""

from __future__ import annotations

import math
import re
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .network import NetworkSpec, SpecError
from .propagate import SinkObjective, p_sink_at, write_csv


class ObjectiveError(RuntimeError):
    def __init__(self, gamma, cause: Exception):
        super().__init__(f"objective failed at gamma={list(gamma)}: {cause}")
        self.gamma = tuple(gamma)


@dataclass(frozen=True)
class OptimizationProblem:
    spec: NetworkSpec
    horizon: float = math.inf
    free: tuple[int, ...] | None = None  # 1-based sites; None means all
    gamma_max: float = 1e3
    restarts: int = 16
    budget: int = 20_000  # objective evaluations per restart
    initial_step: float = 0.1  # fraction of gamma_max
    patience: int = 50
    min_step: float = 1e-6  # fraction of gamma_max
    seed: int = 0
    initial: str = "site:1"

    def __post_init__(self):
        n = self.spec.n_sites
        free = tuple(range(1, n + 1)) if self.free is None else tuple(sorted(set(self.free)))
        if not free:
            raise SpecError("at least one free dephasing rate is required")
        if any(not 1 <= k <= n for k in free):
            raise SpecError(f"free sites {free} outside 1..{n}")
        object.__setattr__(self, "free", free)
        if not self.gamma_max > 0:
            raise SpecError("gamma_max must be positive")
        if self.restarts < 1 or self.budget < 1:
            raise SpecError("restarts and budget must be >= 1")
        if not self.horizon > 0:
            raise SpecError("horizon must be positive or inf")

    def baseline_gamma(self) -> np.ndarray:
        g = np.array(self.spec.gamma_deph, dtype=float)
        g[np.asarray(self.free) - 1] = 0.0
        return g


@dataclass
class RestartTrace:
    index: int
    start: tuple[float, ...]
    best_gamma: tuple[float, ...]
    best_p_sink: float
    evaluations: int
    history: list[tuple[int, float]] = field(default_factory=list)  # (evaluation, incumbent)


@dataclass
class OptimizationResult:
    best_gamma: tuple[float, ...]
    best_p_sink: float
    baseline_p_sink: float
    restarts: list[RestartTrace]

    @property
    def delta_p(self) -> float:
        return self.best_p_sink - self.baseline_p_sink

    @property
    def evaluations(self) -> int:
        return sum(r.evaluations for r in self.restarts)

    def summary(self) -> dict:
        return {
            "best_gamma": list(self.best_gamma),
            "best_p_sink": self.best_p_sink,
            "baseline_p_sink": self.baseline_p_sink,
            "delta_p": self.delta_p,
            "evaluations": self.evaluations,
            "restarts": [
                {"index": r.index, "best_p_sink": r.best_p_sink,
                 "evaluations": r.evaluations, "best_gamma": list(r.best_gamma)}
                for r in self.restarts
            ],
        }


def _random_unit(rng: np.random.Generator, n: int) -> np.ndarray:
    while True:
        u = rng.standard_normal(n)
        norm = np.linalg.norm(u)
        if norm > 1e-12:
            return u / norm


def _run_restart(problem: OptimizationProblem, index: int) -> RestartTrace:
    objective = SinkObjective(problem.spec, problem.horizon, problem.initial)
    free = np.asarray(problem.free) - 1
    gmax = problem.gamma_max
    rng = np.random.default_rng([problem.seed, index])
    x = problem.baseline_gamma()
    if index > 0:
        x[free] = np.exp(rng.uniform(math.log(1e-2), math.log(gmax), len(free)))

    def evaluate(g):
        try:
            return objective(g)
        except Exception as exc:  # noqa: BLE001 - re-raised with the failing point
            raise ObjectiveError(g, exc) from exc

    start = tuple(x)
    best = evaluate(x)
    evals = 1
    history = [(evals, best)]
    step = problem.initial_step * gmax
    rejections = 0
    while evals < problem.budget and step >= problem.min_step * gmax:
        trial = x.copy()
        trial[free] = np.clip(x[free] + step * _random_unit(rng, len(free)), 0.0, gmax)
        value = evaluate(trial)
        evals += 1
        if value > best:
            x, best = trial, value
            rejections = 0
            history.append((evals, best))
        else:
            rejections += 1
            if rejections >= problem.patience:
                step *= 0.5
                rejections = 0
    return RestartTrace(index, start, tuple(x), best, evals, history)


def optimize_dephasing(
    problem: OptimizationProblem, workers: int = 1, executor: str = "process"
) -> OptimizationResult:
    """Best dephasing vector over ``problem.restarts`` independent walks.

    Restart 0 starts from zero dephasing on the free sites, so the result is
    never worse than the baseline. Each restart seeds its own generator from
    ``(seed, index)``; results do not depend on ``workers``.
    """
    indices = range(problem.restarts)
    if workers > 1 and problem.restarts > 1:
        pool_cls = ProcessPoolExecutor if executor == "process" else ThreadPoolExecutor
        with pool_cls(max_workers=workers) as pool:
            traces = list(pool.map(_run_restart, [problem] * problem.restarts, indices))
    else:
        traces = [_run_restart(problem, i) for i in indices]
    baseline = traces[0].history[0][1]
    best = traces[0]
    for trace in traces[1:]:
        if trace.best_p_sink > best.best_p_sink:
            best = trace
    return OptimizationResult(best.best_gamma, best.best_p_sink, baseline, traces)


_VAR = re.compile(r"^(omega|gamma|v)_(\d+)(?:_(\d+))?$")


def set_parameter(spec: NetworkSpec, variable: str, value: float) -> NetworkSpec:
    """Copy of ``spec`` with ``omega_k``, ``gamma_k`` or ``v_k_l`` set to ``value``."""
    m = _VAR.match(variable)
    if not m:
        raise SpecError(f"unknown sweep variable {variable!r}")
    kind, k, l = m.group(1), int(m.group(2)), m.group(3)
    if (kind == "v") != (l is not None):
        raise SpecError(f"unknown sweep variable {variable!r}")
    if not 1 <= k <= spec.n_sites:
        raise SpecError(f"{variable}: site {k} outside 1..{spec.n_sites}")
    if kind == "omega":
        omega = list(spec.omega)
        omega[k - 1] = value
        return replace(spec, omega=tuple(omega))
    if kind == "gamma":
        gamma = list(spec.gamma_deph)
        gamma[k - 1] = value
        return replace(spec, gamma_deph=tuple(gamma))
    l = int(l)
    if not 1 <= l <= spec.n_sites or l == k:
        raise SpecError(f"{variable}: bad site pair")
    key = (min(k, l), max(k, l))
    couplings = [c for c in spec.couplings if (c[0], c[1]) != key]
    if value != 0:
        couplings.append((key[0], key[1], value))
    return replace(spec, couplings=tuple(couplings))


@dataclass
class Table:
    columns: list[str]
    rows: list[tuple]

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)

    def to_csv(self, path: str | Path) -> None:
        write_csv(path, self.columns, self.rows)


def sweep(
    spec: NetworkSpec,
    variable: str,
    grid: Sequence[float],
    optimize: bool = False,
    horizon: float = math.inf,
    initial: str = "site:1",
    workers: int = 1,
    **problem_options,
) -> Table:
    """Scan ``variable`` over ``grid``.

    Without optimisation the columns are ``(variable, p_sink, delta_p)`` where
    ``delta_p`` is measured against the same point with zero dephasing. With
    optimisation they are ``(variable, p_sink_0, p_sink_opt, delta_p)``.
    """
    set_parameter(spec, variable, 0.0)  # validate the name even for an empty grid
    rows = []
    zero = (0.0,) * spec.n_sites
    for value in grid:
        point = set_parameter(spec, variable, float(value))
        if optimize:
            res = optimize_dephasing(
                OptimizationProblem(point, horizon=horizon, initial=initial, **problem_options),
                workers=workers,
            )
            rows.append((float(value), res.baseline_p_sink, res.best_p_sink, res.delta_p))
        else:
            p = p_sink_at(point, horizon, initial)
            p0 = p_sink_at(point.with_dephasing(zero), horizon, initial)
            rows.append((float(value), p, p - p0))
    columns = (
        [variable, "p_sink_0", "p_sink_opt", "delta_p"] if optimize
        else [variable, "p_sink", "delta_p"]
    )
    return Table(columns, rows)
