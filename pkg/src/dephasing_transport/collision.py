"""Repeated-interaction (collision) model of local dephasing.

Between collisions the network evolves under its coherent and dissipative
generator with the dephasing terms removed. At every interval ``dt`` each
site collides with an environment qubit prepared in |0>: the unitary
``|k><k| x R_y(2 theta_k) + (1 - |k><k|) x 1`` rotates the qubit only if the
site is excited. Tracing out a fresh qubit multiplies every coherence of site
``k`` by ``cos(theta_k)`` and leaves populations alone.

With ``memory = m > 1`` each site keeps its qubit for ``m`` collisions before
it is swapped for a fresh one, so the environment carries memory. That path
stores the joint state of the network and one qubit per colliding site, which
costs ``(N + 2)^2 4^M`` for ``M`` colliding sites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .network import NetworkSpec, build_liouvillian, initial_state, vec, unvec
from .propagate import DEFAULT_SAMPLES, Trajectory


class CalibrationError(ValueError):
    pass


def calibrate_angle(gamma: float, dt: float) -> float:
    """Collision angle giving an isolated site coherence decay ``exp(-gamma t)``."""
    if gamma < 0 or not dt > 0:
        raise CalibrationError("need gamma >= 0 and dt > 0")
    target = math.exp(-gamma * dt)
    if target <= 0.0:
        raise CalibrationError(
            f"gamma * dt = {gamma * dt:.3g} is too large to calibrate; use a smaller dt"
        )
    return math.acos(target)


@dataclass(frozen=True)
class CollisionSchedule:
    dt: float
    angles: tuple[float, ...]
    T: float
    memory: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.T > 0:
            raise ValueError("T must be positive")
        if int(self.memory) != self.memory or self.memory < 1:
            raise ValueError("memory must be an integer >= 1")
        angles = tuple(float(a) for a in self.angles)
        if any(not 0.0 <= a <= math.pi / 2 for a in angles):
            raise ValueError("collision angles must lie in [0, pi/2]")
        object.__setattr__(self, "angles", angles)
        ratio = self.T / self.dt
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ValueError(f"T = {self.T} is not a whole number of intervals dt = {self.dt}")

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))

    @classmethod
    def calibrated(
        cls, gammas: Sequence[float], dt: float, T: float, memory: int = 1, factor: float = 1.0
    ) -> "CollisionSchedule":
        """Angles reproducing the dephasing rates ``factor * gammas`` for isolated sites."""
        return cls(dt, tuple(calibrate_angle(factor * g, dt) for g in gammas), T, memory)


def _ry(phi: float) -> np.ndarray:
    """``exp(-i phi Y / 2)``."""
    c, s = math.cos(phi / 2), math.sin(phi / 2)
    return np.array([[c, -s], [s, c]])


def _coherence_mask(angles: Sequence[float], dim: int) -> np.ndarray:
    c = np.ones(dim)
    c[1 : 1 + len(angles)] = np.cos(angles)
    mask = np.outer(c, c)
    np.fill_diagonal(mask, 1.0)
    return vec(mask)


class _JointState:
    """Network plus ``M`` environment qubits, stored as ``rho[s, e, s', e']``."""

    def __init__(self, rho_sys: np.ndarray, n_env: int):
        self.d = rho_sys.shape[0]
        self.n_env = n_env
        self.E = 2**n_env
        self.reset(rho_sys)

    def reset(self, rho_sys: np.ndarray) -> None:
        self.rho = np.zeros((self.d, self.E, self.d, self.E), dtype=complex)
        self.rho[:, 0, :, 0] = rho_sys

    def system(self) -> np.ndarray:
        return np.einsum("aebe->ab", self.rho)

    def propagate(self, prop: np.ndarray) -> None:
        d, E = self.d, self.E
        x = self.rho.transpose(2, 0, 1, 3).reshape(d * d, E * E)
        self.rho = (prop @ x).reshape(d, d, E, E).transpose(1, 2, 0, 3)

    def collide(self, site: int, qubit: int, theta: float) -> None:
        r = _ry(2.0 * theta)
        q = (2,) * self.n_env
        t = self.rho.reshape((self.d,) + q + (self.d,) + q)
        # left multiplication acts on rows with the site excited
        block = t[site]
        t[site] = np.moveaxis(np.tensordot(r, block, axes=([1], [qubit])), 0, qubit)
        # right multiplication by R^dag on columns with the site excited
        sl = [slice(None)] * t.ndim
        sl[1 + self.n_env] = site
        block = t[tuple(sl)]
        ax = 1 + self.n_env + qubit
        t[tuple(sl)] = np.moveaxis(np.tensordot(block, r.conj().T, axes=([ax], [0])), -1, ax)
        self.rho = t.reshape(self.d, self.E, self.d, self.E)


def _dilate_fresh(rho: np.ndarray, site: int, theta: float) -> np.ndarray:
    joint = _JointState(rho, 1)
    joint.collide(site, 0, theta)
    return joint.system()


def collision_evolve(
    spec: NetworkSpec,
    schedule: CollisionSchedule,
    rho0=None,
    n_samples: int = DEFAULT_SAMPLES,
    explicit: bool = False,
    store_states: bool = False,
) -> Trajectory:
    """Alternate free propagation over ``dt`` with one collision per site.

    ``spec.gamma_deph`` is ignored; the collisions provide the dephasing. With
    ``memory == 1`` the default path applies the exact reduced map of a fresh
    collision; ``explicit=True`` builds the dilation and traces it out instead.
    """
    n = spec.n_sites
    if len(schedule.angles) != n:
        raise ValueError(f"schedule has {len(schedule.angles)} angles for {n} sites")
    dim = spec.dim
    if rho0 is None:
        rho0 = initial_state(spec, 1)
    elif isinstance(rho0, (str, int)):
        rho0 = initial_state(spec, rho0)
    rho0 = np.asarray(rho0, dtype=complex)
    prop = scipy.linalg.expm(build_liouvillian(spec, include_dephasing=False) * schedule.dt)
    steps = schedule.n_steps
    record_at = np.unique(np.round(np.linspace(0, steps, max(2, n_samples))).astype(int))
    colliding = [k for k in range(1, n + 1) if schedule.angles[k - 1] > 0]
    mode = "reduced"
    if schedule.memory > 1 and colliding:
        mode = "joint"
    elif explicit:
        mode = "dilation"

    pops = np.empty((len(record_at), dim))
    states = np.empty((len(record_at), dim, dim), dtype=complex) if store_states else None
    diag = {"backend": f"collision-{mode}", "steps": steps, "rejected": 0,
            "max_trace_drift": 0.0, "dt": schedule.dt, "memory": schedule.memory}
    trace0 = np.trace(rho0).real
    out = 0

    def record(rho):
        nonlocal out
        pops[out] = np.real(np.diag(rho))
        if store_states:
            states[out] = rho
        diag["max_trace_drift"] = max(diag["max_trace_drift"], abs(np.trace(rho).real - trace0))
        out += 1

    if mode == "joint":
        joint = _JointState(rho0, len(colliding))
    y = vec(rho0)
    mask = _coherence_mask(schedule.angles, dim)
    for step in range(steps + 1):
        if step > 0:
            if mode == "reduced":
                y = mask * (prop @ y)
            elif mode == "dilation":
                rho = unvec(prop @ y, dim)
                for k in colliding:
                    rho = _dilate_fresh(rho, k, schedule.angles[k - 1])
                y = vec(rho)
            else:
                joint.propagate(prop)
                for q, k in enumerate(colliding):
                    joint.collide(k, q, schedule.angles[k - 1])
                if step % schedule.memory == 0:
                    joint.reset(joint.system())
        if out < len(record_at) and step == record_at[out]:
            record(joint.system() if mode == "joint" else unvec(y, dim))
    return Trajectory(record_at * schedule.dt, pops, states, diag)
