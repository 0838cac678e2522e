"""Pairwise concurrence between a decoupled ancilla and the network sites."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .network import NetworkSpec, SpecError, build_liouvillian, initial_state
from .propagate import DEFAULT_SAMPLES, evolve, write_csv

_SIGMA_YY = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])


@dataclass(frozen=True)
class AncillaNetwork:
    """``base`` plus one uncoupled, noiseless site appended as site ``N + 1``."""

    base: NetworkSpec

    @property
    def ancilla(self) -> int:
        return self.base.n_sites + 1

    @property
    def spec(self) -> NetworkSpec:
        b = self.base
        return NetworkSpec(
            n_sites=b.n_sites + 1,
            omega=b.omega + (0.0,),
            couplings=b.couplings,
            gamma_diss=b.gamma_diss + (0.0,),
            gamma_deph=b.gamma_deph + (0.0,),
            sink_site=b.sink_site,
            sink_rate=b.sink_rate,
        )

    def with_dephasing(self, gamma_deph) -> "AncillaNetwork":
        return AncillaNetwork(self.base.with_dephasing(gamma_deph))

    def bell_state(self, site: int = 1) -> np.ndarray:
        return initial_state(self.spec, f"bell:{self.ancilla},{site}")


def _check_pair(rho: np.ndarray, a: int, k: int) -> None:
    n = rho.shape[0] - 2
    if a == k or not (1 <= a <= n and 1 <= k <= n):
        raise SpecError(f"need two distinct sites in 1..{n}, got ({a}, {k})")


def concurrence_pair(rho: np.ndarray, a: int, k: int) -> float:
    """Concurrence of sites ``a`` and ``k``; with no double excitation it is ``2|rho_ak|``."""
    _check_pair(rho, a, k)
    return float(min(1.0, 2.0 * abs(rho[a, k])))


def reduced_two_qubit(rho: np.ndarray, a: int, k: int) -> np.ndarray:
    """Reduced state of sites ``a`` and ``k`` in the basis |00>, |01>, |10>, |11> (``a`` first)."""
    _check_pair(rho, a, k)
    out = np.zeros((4, 4), dtype=complex)
    # |10> = a excited, |01> = k excited, |00> collects every other basis state.
    out[2, 2] = rho[a, a]
    out[1, 1] = rho[k, k]
    out[2, 1] = rho[a, k]
    out[1, 2] = rho[k, a]
    out[0, 0] = np.trace(rho) - rho[a, a] - rho[k, k]
    # only the global vacuum is coherent with a single excitation on a or k
    out[0, 2], out[2, 0] = rho[0, a], rho[a, 0]
    out[0, 1], out[1, 0] = rho[0, k], rho[k, 0]
    return out


def wootters_concurrence(rho4: np.ndarray, cutoff: float = 1e-13) -> float:
    """Concurrence of an arbitrary two-qubit density matrix.

    The ``lambda_i`` are the singular values of ``W^T (Y x Y) W`` for
    ``rho = W W^dag``, which avoids square roots of nearly-zero eigenvalues
    of ``rho rho~``. Eigenvalues of ``rho`` below ``cutoff`` are treated as 0.
    """
    rho4 = 0.5 * (rho4 + rho4.conj().T)
    w, v = np.linalg.eigh(rho4)
    w = np.where(w > cutoff * max(w.max(), 1.0), w, 0.0)
    factor = v * np.sqrt(w)
    lam = np.linalg.svd(factor.T @ _SIGMA_YY @ factor, compute_uv=False)
    lam = np.sort(lam)[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


@dataclass
class ConcurrenceSeries:
    times: np.ndarray
    concurrence: np.ndarray  # (n_samples, N): C(anc, k) for k = 1..N
    states: np.ndarray | None = None

    def to_csv(self, path: str | Path) -> None:
        n = self.concurrence.shape[1]
        write_csv(
            path,
            ["t"] + [f"C_{k}" for k in range(1, n + 1)],
            np.column_stack([self.times, self.concurrence]),
        )


def entanglement_trajectory(
    net: AncillaNetwork,
    T: float,
    times: np.ndarray | int = DEFAULT_SAMPLES,
    start_site: int = 1,
    method: str = "expm",
) -> ConcurrenceSeries:
    """Concurrence between the ancilla and every site, starting from a Bell pair on ``start_site``."""
    traj = evolve(
        build_liouvillian(net.spec),
        net.bell_state(start_site),
        T,
        times=times,
        method=method,
        store_states=True,
    )
    anc = net.ancilla
    conc = np.array(
        [[concurrence_pair(rho, anc, k) for k in range(1, net.base.n_sites + 1)]
         for rho in traj.states]
    )
    return ConcurrenceSeries(traj.times, conc, traj.states)

