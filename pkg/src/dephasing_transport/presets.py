"""Named network configurations: the FMO complex and the chain scenarios."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .network import NetworkSpec, SpecError

# Site energies on the diagonal are offset by 12230; units of 1.988865e-23 J.
FMO_HAMILTONIAN = np.array(
    [
        [215.0, -104.1, 5.1, -4.3, 4.7, -15.1, -7.8],
        [-104.1, 220.0, 32.6, 7.1, 5.4, 8.3, 0.8],
        [5.1, 32.6, 0.0, -46.8, 1.0, -8.1, 5.1],
        [-4.3, 7.1, -46.8, 125.0, -70.7, -14.7, -61.5],
        [4.7, 5.4, 1.0, -70.7, 450.0, 89.7, -2.5],
        [-15.1, 8.3, -8.1, -14.7, 89.7, 330.0, 32.7],
        [-7.8, 0.8, 5.1, -61.5, -2.5, 32.7, 280.0],
    ]
)
FMO_SINK_SITE = 3
FMO_SINK_RATE = 10 / 1.88  # about 1 / ps
FMO_DISSIPATION = 1 / 376  # 2 * Gamma = 1 / 188, a ~1 ns exciton lifetime

# Optimal dephasing vectors reported for the FMO complex.
FMO_GAMMA_OPT_T5 = (469.34, 5.36, 99.13, 5.55, 114.86, 1.88, 291.08)
FMO_GAMMA_OPT_INF = (27.40, 26.84, 1.22, 87.12, 99.59, 232.76, 88.35)


def from_matrix(
    hamiltonian: np.ndarray,
    gamma_diss: Sequence[float],
    sink_site: int,
    sink_rate: float,
    gamma_deph: Sequence[float] = (),
) -> NetworkSpec:
    h = np.asarray(hamiltonian, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise SpecError("hamiltonian must be square")
    if not np.array_equal(h, h.T):
        raise SpecError("hamiltonian must be symmetric")
    n = h.shape[0]
    couplings = [
        (k + 1, l + 1, h[k, l]) for k in range(n) for l in range(k + 1, n) if h[k, l] != 0
    ]
    return NetworkSpec(
        n_sites=n,
        omega=tuple(np.diag(h)),
        couplings=tuple(couplings),
        gamma_diss=tuple(gamma_diss),
        gamma_deph=tuple(gamma_deph),
        sink_site=sink_site,
        sink_rate=sink_rate,
    )


def fmo_preset(gamma_deph: Sequence[float] = ()) -> NetworkSpec:
    return from_matrix(
        FMO_HAMILTONIAN, (FMO_DISSIPATION,) * 7, FMO_SINK_SITE, FMO_SINK_RATE, gamma_deph
    )


def linear_chain(
    n: int,
    v: float,
    omega: Sequence[float] | float,
    gamma_diss: Sequence[float] | float,
    sink_rate: float,
    gamma_deph: Sequence[float] | float = 0.0,
) -> NetworkSpec:
    """Nearest-neighbour chain with uniform hopping ``v``, sink on site ``n``."""
    if int(n) != n or n < 1:
        raise SpecError(f"chain length must be >= 1, got {n!r}")

    def expand(x, name):
        arr = np.broadcast_to(np.asarray(x, dtype=float), (n,)) if np.ndim(x) == 0 else x
        if len(arr) != n:
            raise SpecError(f"{name} has length {len(arr)}, expected {n}")
        return tuple(float(a) for a in arr)

    return NetworkSpec(
        n_sites=n,
        omega=expand(omega, "omega"),
        couplings=tuple((k, k + 1, v) for k in range(1, n)),
        gamma_diss=expand(gamma_diss, "gamma_diss"),
        gamma_deph=expand(gamma_deph, "gamma_deph"),
        sink_site=n,
        sink_rate=sink_rate,
    )


def detuned_chain(omega_2: float = 1.0, gamma_deph=0.0) -> NetworkSpec:
    """Three-site chain with the middle site at ``omega_2`` (Figs. 2 and 3)."""
    return linear_chain(3, 0.1, (1.0, omega_2, 1.0), 0.01, 0.2, gamma_deph)


def entanglement_chain(gamma_deph=0.0) -> NetworkSpec:
    """Four-site chain with site 3 detuned to 14, used for the concurrence runs."""
    return linear_chain(4, 1.0, (10.0, 10.0, 14.0, 10.0), 0.1, 1.0, gamma_deph)


def large_detuning_chain(v: float, f: float, omega_2: float = 100.0, gamma_2: float = 0.0):
    """Chain with ``Gamma_k = v^2 / f`` and sink rate ``1e5 v``; ``Delta p`` has a closed limit as v -> 0."""
    return linear_chain(
        3, v, (1.0, omega_2, 1.0), v * v / f, 1e5 * v, (0.0, gamma_2, 0.0)
    )
