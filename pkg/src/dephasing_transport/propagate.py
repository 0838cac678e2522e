"""Time evolution in the single-excitation sector and sink probabilities."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg

from .network import (
    NetworkSpec,
    build_liouvillian,
    dephasing_diagonals,
    initial_state,
    unvec,
    vec,
)

DEFAULT_RTOL = 1e-9
DEFAULT_ATOL = 1e-12
DEFAULT_SAMPLES = 200
MAX_REJECTED = 10_000


class IntegrationError(RuntimeError):
    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


class NonConvergentError(RuntimeError):
    """The transient block cannot drain: some population never leaves the sites."""

    def __init__(self, message: str, smallest_singular_value: float):
        super().__init__(f"{message} (smallest singular value {smallest_singular_value:.3e})")
        self.smallest_singular_value = smallest_singular_value


@dataclass
class Trajectory:
    times: np.ndarray
    populations: np.ndarray  # (n_samples, dim): vacuum, sites..., sink
    states: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    @property
    def p_sink(self) -> np.ndarray:
        return self.populations[:, -1]

    @property
    def final_p_sink(self) -> float:
        return float(self.populations[-1, -1])

    @property
    def final_state(self) -> np.ndarray | None:
        return None if self.states is None else self.states[-1]

    def header(self) -> list[str]:
        n = self.populations.shape[1] - 2
        return ["t", "p_vac"] + [f"p_{k}" for k in range(1, n + 1)] + ["p_sink"]

    def to_csv(self, path: str | Path) -> None:
        write_csv(path, self.header(), np.column_stack([self.times, self.populations]))


def write_csv(path: str | Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def sample_times(T: float, n_samples: int = DEFAULT_SAMPLES) -> np.ndarray:
    if n_samples < 2:
        raise ValueError("need at least two samples (t=0 and t=T)")
    return np.linspace(0.0, T, n_samples)


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B5 - _B4
_BETA = 0.04
_ALPHA = 0.2 - 0.75 * _BETA


def _rk45(gen, y0, times, rtol, atol, store, dim):
    """Adaptive DP5(4) on ``y' = gen @ y`` landing exactly on ``times``."""
    diag_idx = np.arange(dim) * (dim + 1)
    trace0 = y0[diag_idx].sum().real
    pops = np.empty((len(times), dim))
    states = np.empty((len(times), dim, dim), dtype=complex) if store else None
    diag = {"backend": "rk45", "steps": 0, "rejected": 0, "max_trace_drift": 0.0}

    def record(i, y):
        pops[i] = y[diag_idx].real
        if store:
            states[i] = unvec(y, dim)

    y = y0.copy()
    t = float(times[0])
    record(0, y)
    f = gen @ y
    norm = np.linalg.norm(gen, 1)
    h = min(0.01 / max(norm, 1e-300), (times[-1] - times[0]) / 10)
    k = np.empty((7, y.size), dtype=complex)
    err_prev = 1e-4
    for i_out in range(1, len(times)):
        t_out = float(times[i_out])
        while t < t_out:
            step = min(h, t_out - t)
            if step <= 1e-14 * max(1.0, abs(t)):
                diag["t_fail"] = t
                raise IntegrationError(f"step size underflow at t={t:.6g}", diag)
            k[0] = f
            for s in range(1, 7):
                k[s] = gen @ (y + step * (np.asarray(_A[s]) @ k[:s]))
            y_new = y + step * (_B5[:6] @ k[:6])
            err_vec = step * (_E @ k)
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = float(np.max(np.abs(err_vec) / scale))
            if err <= 1.0:
                t = t_out if t_out - (t + step) <= 1e-12 * max(1.0, t_out) else t + step
                y = y_new
                f = k[6]
                diag["steps"] += 1
                drift = abs(y[diag_idx].sum().real - trace0)
                diag["max_trace_drift"] = max(diag["max_trace_drift"], drift)
                # PI control keeps the step from chattering on the stability boundary
                fac = 5.0 if err == 0 else 0.9 * err ** -_ALPHA * err_prev ** _BETA
                fac = min(5.0, max(0.2, fac))
                err_prev = max(err, 1e-4)
                # a step truncated to hit a sample point says nothing about h
                h = max(h, step * fac) if step < h else step * fac
            else:
                diag["rejected"] += 1
                if diag["rejected"] > MAX_REJECTED:
                    raise _TooStiff(diag)
                h = step * max(0.2, 0.9 * err ** -_ALPHA)
        record(i_out, y)
    return pops, states, diag


class _TooStiff(Exception):
    def __init__(self, diagnostics):
        self.diagnostics = diagnostics


def _expm_path(gen, y0, times, store, dim):
    diag_idx = np.arange(dim) * (dim + 1)
    pops = np.empty((len(times), dim))
    states = np.empty((len(times), dim, dim), dtype=complex) if store else None
    trace0 = y0[diag_idx].sum().real
    diag = {"backend": "expm", "steps": 0, "rejected": 0, "max_trace_drift": 0.0}
    steps = np.diff(times)
    uniform = len(steps) > 0 and np.allclose(steps, steps[0], rtol=1e-12, atol=0)
    prop = scipy.linalg.expm(gen * steps[0]) if uniform else None
    y = y0.copy()
    for i, t in enumerate(times):
        if i > 0:
            step_prop = prop if uniform else scipy.linalg.expm(gen * steps[i - 1])
            y = step_prop @ y
            diag["steps"] += 1
        pops[i] = y[diag_idx].real
        if store:
            states[i] = unvec(y, dim)
        diag["max_trace_drift"] = max(
            diag["max_trace_drift"], abs(y[diag_idx].sum().real - trace0)
        )
    return pops, states, diag


def evolve(
    gen: np.ndarray,
    rho0: np.ndarray,
    T: float,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    times: np.ndarray | int = DEFAULT_SAMPLES,
    method: str = "rk45",
    store_states: bool = False,
) -> Trajectory:
    """Propagate ``rho0`` under generator ``gen`` up to time ``T``.

    ``times`` is either a sample count (uniform grid on [0, T]) or an explicit
    increasing grid starting at 0 and ending at T. ``method`` is ``"rk45"``
    (adaptive Dormand-Prince, falls back to ``"expm"`` after too many rejected
    steps) or ``"expm"``.
    """
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    if rtol <= 0 or atol <= 0:
        raise ValueError("tolerances must be positive")
    dim = rho0.shape[0]
    if gen.shape != (dim * dim, dim * dim):
        raise ValueError(f"generator shape {gen.shape} does not match state dim {dim}")
    grid = sample_times(T, times) if np.isscalar(times) else np.asarray(times, float)
    if grid[0] != 0.0 or not np.isclose(grid[-1], T) or np.any(np.diff(grid) <= 0):
        raise ValueError("sample grid must be strictly increasing from 0 to T")
    y0 = vec(rho0).astype(complex)
    if method == "expm":
        pops, states, diag = _expm_path(gen, y0, grid, store_states, dim)
    elif method == "rk45":
        try:
            pops, states, diag = _rk45(gen, y0, grid, rtol, atol, store_states, dim)
        except _TooStiff as stiff:
            pops, states, diag = _expm_path(gen, y0, grid, store_states, dim)
            diag["fallback"] = "expm"
            diag["rk45_rejected"] = stiff.diagnostics["rejected"]
    else:
        raise ValueError(f"unknown method {method!r}")
    diag["rtol"], diag["atol"] = rtol, atol
    return Trajectory(grid, pops, states, diag)


def propagate_expm(gen: np.ndarray, rho0: np.ndarray, T: float) -> np.ndarray:
    """``exp(gen T) rho0`` as a matrix."""
    dim = rho0.shape[0]
    return unvec(scipy.linalg.expm(gen * T) @ vec(rho0).astype(complex), dim)


def _initial(spec: NetworkSpec, rho0) -> np.ndarray:
    if rho0 is None:
        return initial_state(spec, 1)
    if isinstance(rho0, (str, int)):
        return initial_state(spec, rho0)
    return np.asarray(rho0)


def p_sink_at(spec: NetworkSpec, T: float, rho0=None) -> float:
    """Sink population at time ``T`` (``math.inf`` dispatches to the linear solve)."""
    if math.isinf(T) and T > 0:
        return p_sink_infinite(spec, rho0)
    if not T > 0:
        raise ValueError(f"T must be positive or inf, got {T}")
    rho = propagate_expm(build_liouvillian(spec), _initial(spec, rho0), T)
    return float(np.clip(rho[-1, -1].real, 0.0, 1.0))


def site_block_indices(n_sites: int) -> np.ndarray:
    """Vectorised indices of the site-site block ``rho_kl``, 1 <= k, l <= N."""
    dim = n_sites + 2
    sites = np.arange(1, n_sites + 1)
    return (sites[:, None] + dim * sites[None, :]).reshape(-1, order="F")


def p_sink_infinite(spec: NetworkSpec, rho0=None) -> float:
    """``p_sink(T -> inf)`` from one linear solve on the site block.

    The site-site block of the generator is closed and feeds only the vacuum
    and sink populations, so ``int_0^inf rho_ss dt`` is ``x_ss`` with
    ``A x = -rho0_sites``.
    """
    rho0 = _initial(spec, rho0)
    idx = site_block_indices(spec.n_sites)
    block = build_liouvillian(spec)[np.ix_(idx, idx)]
    r0 = vec(rho0)[idx].astype(complex)
    try:
        # a singular block is reported below through the conservation check
        with warnings.catch_warnings(), np.errstate(divide="ignore", invalid="ignore"):
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            x = scipy.linalg.solve(block, -r0, check_finite=False)
        ok = np.all(np.isfinite(x))
    except (np.linalg.LinAlgError, ValueError):
        ok = False
    if ok:
        integ = unvec(x, spec.n_sites).real.diagonal()
        gain_sink = 2.0 * spec.sink_rate * integ[spec.sink_site - 1]
        gain_vac = 2.0 * float(np.dot(spec.gamma_diss, integ))
        site_pop = float(np.real(np.trace(rho0)) - rho0[0, 0].real - rho0[-1, -1].real)
        ok = abs(site_pop - gain_sink - gain_vac) <= 1e-6
    if not ok:
        smin = float(scipy.linalg.svdvals(block).min())
        raise NonConvergentError("population trapped on the sites", smin)
    return float(np.clip(rho0[-1, -1].real + gain_sink, 0.0, 1.0))


class SinkObjective:
    """Fast ``gamma_deph -> p_sink`` for a fixed network and horizon.

    The site block is affine in the dephasing rates; finite horizons use one
    exponential of the block augmented with a sink accumulator.
    """

    def __init__(self, spec: NetworkSpec, horizon: float, rho0=None):
        self.spec = spec
        self.horizon = float(horizon)
        if not self.horizon > 0:
            raise ValueError("horizon must be positive or inf")
        rho0 = _initial(spec, rho0)
        n = spec.n_sites
        idx = site_block_indices(n)
        base = build_liouvillian(spec, include_dephasing=False)[np.ix_(idx, idx)]
        self._deph = dephasing_diagonals(n)[:, idx]
        self._r0 = vec(rho0)[idx].astype(complex)
        self._p0 = float(rho0[-1, -1].real)
        self._ss = (spec.sink_site - 1) * (n + 1)
        self._gain = 2.0 * spec.sink_rate
        if math.isinf(self.horizon):
            self._base = base
        else:
            m = len(idx)
            aug = np.zeros((m + 1, m + 1), dtype=complex)
            aug[:m, :m] = base
            aug[m, self._ss] = self._gain
            self._base = aug
            self._y0 = np.append(self._r0, 0.0)
        self._diag = np.arange(len(idx))

    def generator(self, gamma) -> np.ndarray:
        a = self._base.copy()
        a[self._diag, self._diag] += np.asarray(gamma, float) @ self._deph
        return a

    def __call__(self, gamma) -> float:
        a = self.generator(gamma)
        if math.isinf(self.horizon):
            x = scipy.linalg.solve(a, -self._r0, check_finite=False)
            val = self._p0 + self._gain * x[self._ss].real
        else:
            val = self._p0 + (scipy.linalg.expm(a * self.horizon) @ self._y0)[-1].real
        if not np.isfinite(val):
            raise FloatingPointError("non-finite sink probability")
        return float(val)
