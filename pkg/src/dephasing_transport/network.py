"""Network model, single-excitation basis and Liouvillian assembly.

Basis of the single-excitation sector (dimension ``N + 2``)::

    index 0        vacuum |g>
    index 1..N     one excitation on site k
    index N + 1    excitation captured by the sink

Site labels are 1-based and coincide with basis indices, so no offset
bookkeeping is needed anywhere else in the package.

Density matrices are vectorised column-major (``rho.reshape(-1, order="F")``),
so ``vec(A @ rho @ B) == kron(B.T, A) @ vec(rho)``.

Lindblad terms use the ``-{A^dag A, rho} + 2 A rho A^dag`` normalisation:

* dissipation ``A = |g><k|`` at ``gamma_diss[k]``: populations decay as
  ``exp(-2 Gamma_k t)``;
* dephasing ``A = |k><k|`` at ``gamma_deph[k]``: ``rho_kl`` (k != l) decays at
  ``gamma_k + gamma_l``, populations are untouched;
* sink ``A = |N+1><s|`` at ``sink_rate``: the sink fills at
  ``2 * sink_rate * rho_ss``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np


class SpecError(ValueError):
    """Raised for malformed network specifications or state requests."""


def _as_float_tuple(values: Iterable[float], name: str, n: int) -> tuple[float, ...]:
    out = tuple(float(x) for x in values)
    if len(out) != n:
        raise SpecError(f"{name} has length {len(out)}, expected {n}")
    if not all(np.isfinite(out)):
        raise SpecError(f"{name} contains non-finite values")
    return out


def _canonical_couplings(
    couplings: Iterable[Sequence[float]], n_sites: int
) -> tuple[tuple[int, int, float], ...]:
    seen: dict[tuple[int, int], float] = {}
    for entry in couplings:
        if len(entry) != 3:
            raise SpecError(f"coupling {entry!r} is not a (k, l, v) triple")
        k, l, v = entry
        if int(k) != k or int(l) != l:
            raise SpecError(f"coupling indices must be integers, got {entry!r}")
        k, l, v = int(k), int(l), float(v)
        if not (1 <= k <= n_sites and 1 <= l <= n_sites):
            raise SpecError(f"coupling ({k}, {l}) outside sites 1..{n_sites}")
        if k == l:
            raise SpecError(f"self-coupling on site {k}")
        if not np.isfinite(v):
            raise SpecError(f"coupling ({k}, {l}) is not finite")
        key = (min(k, l), max(k, l))
        if key in seen and seen[key] != v:
            raise SpecError(
                f"asymmetric coupling between sites {key[0]} and {key[1]}: "
                f"{seen[key]} vs {v}"
            )
        seen[key] = v
    return tuple((k, l, v) for (k, l), v in sorted(seen.items()))


@dataclass(frozen=True)
class NetworkSpec:
    """Sites, hoppings and noise rates of a transport network.

    ``couplings`` may list each pair once or in both directions (with equal
    values); it is stored canonically as sorted ``(k, l, v)`` with ``k < l``.
    """

    n_sites: int
    omega: tuple[float, ...]
    couplings: tuple[tuple[int, int, float], ...]
    gamma_diss: tuple[float, ...]
    gamma_deph: tuple[float, ...] = field(default=())
    sink_site: int = 1
    sink_rate: float = 0.0

    def __post_init__(self) -> None:
        n = self.n_sites
        if int(n) != n or n < 1:
            raise SpecError(f"n_sites must be a positive integer, got {n!r}")
        object.__setattr__(self, "n_sites", int(n))
        object.__setattr__(self, "omega", _as_float_tuple(self.omega, "omega", n))
        object.__setattr__(
            self, "gamma_diss", _as_float_tuple(self.gamma_diss, "gamma_diss", n)
        )
        deph = self.gamma_deph if len(self.gamma_deph) else (0.0,) * n
        object.__setattr__(self, "gamma_deph", _as_float_tuple(deph, "gamma_deph", n))
        object.__setattr__(self, "couplings", _canonical_couplings(self.couplings, n))
        if min(self.gamma_diss) < 0 or min(self.gamma_deph) < 0:
            raise SpecError("rates must be non-negative")
        if int(self.sink_site) != self.sink_site or not 1 <= self.sink_site <= n:
            raise SpecError(f"sink_site {self.sink_site!r} outside sites 1..{n}")
        object.__setattr__(self, "sink_site", int(self.sink_site))
        rate = float(self.sink_rate)
        if not np.isfinite(rate) or rate < 0:
            raise SpecError(f"sink_rate must be finite and >= 0, got {self.sink_rate!r}")
        object.__setattr__(self, "sink_rate", rate)

    @property
    def dim(self) -> int:
        return self.n_sites + 2

    @property
    def sink_index(self) -> int:
        return self.n_sites + 1

    def with_dephasing(self, gamma_deph: Sequence[float]) -> "NetworkSpec":
        return replace(self, gamma_deph=tuple(gamma_deph))

    def coupling(self, k: int, l: int) -> float:
        key = (min(k, l), max(k, l))
        for a, b, v in self.couplings:
            if (a, b) == key:
                return v
        return 0.0

    def to_dict(self) -> dict:
        return {
            "n_sites": self.n_sites,
            "omega": list(self.omega),
            "couplings": [[k, l, v] for k, l, v in self.couplings],
            "gamma_diss": list(self.gamma_diss),
            "gamma_deph": list(self.gamma_deph),
            "sink_site": self.sink_site,
            "sink_rate": self.sink_rate,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NetworkSpec":
        keys = {"n_sites", "omega", "couplings", "gamma_diss", "gamma_deph",
                "sink_site", "sink_rate"}
        missing = {"n_sites", "omega", "gamma_diss", "sink_site", "sink_rate"} - set(data)
        if missing:
            raise SpecError(f"missing keys: {sorted(missing)}")
        return cls(**{k: v for k, v in data.items() if k in keys})


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int | None = None) -> np.ndarray:
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    return np.asarray(v).reshape(dim, dim, order="F")


def _sprepost(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator of ``rho -> a @ rho @ b``."""
    return np.kron(b.T, a)


def _lindblad_dissipator(a: np.ndarray, rate: float) -> np.ndarray:
    eye = np.eye(a.shape[0])
    ada = a.conj().T @ a
    return rate * (
        2.0 * _sprepost(a, a.conj().T) - _sprepost(ada, eye) - _sprepost(eye, ada)
    )


def build_hamiltonian(spec: NetworkSpec) -> np.ndarray:
    """Single-excitation Hamiltonian, zero on the vacuum and sink rows."""
    h = np.zeros((spec.dim, spec.dim), dtype=complex)
    for k, w in enumerate(spec.omega, start=1):
        h[k, k] = w
    for k, l, v in spec.couplings:
        h[k, l] = v
        h[l, k] = v
    return h


def _projector(dim: int, i: int, j: int) -> np.ndarray:
    p = np.zeros((dim, dim))
    p[i, j] = 1.0
    return p


def dephasing_diagonals(n_sites: int) -> np.ndarray:
    """Rows ``D[k-1]`` with ``L_deph = sum_k gamma_k * diag(D[k-1])``.

    Local dephasing is diagonal in the matrix-unit basis, so the full
    generator is affine in the dephasing rates.
    """
    dim = n_sites + 2
    out = np.zeros((n_sites, dim * dim))
    for k in range(1, n_sites + 1):
        m = np.zeros((dim, dim))
        m[k, :] -= 1.0
        m[:, k] -= 1.0
        m[k, k] = 0.0
        out[k - 1] = vec(m)
    return out


def build_liouvillian(spec: NetworkSpec, include_dephasing: bool = True) -> np.ndarray:
    """Dense generator ``L`` with ``d vec(rho)/dt = L @ vec(rho)``."""
    dim = spec.dim
    h = build_hamiltonian(spec)
    eye = np.eye(dim)
    gen = -1j * (_sprepost(h, eye) - _sprepost(eye, h))
    for k, rate in enumerate(spec.gamma_diss, start=1):
        if rate:
            gen += _lindblad_dissipator(_projector(dim, 0, k), rate)
    if spec.sink_rate:
        gen += _lindblad_dissipator(
            _projector(dim, spec.sink_index, spec.sink_site), spec.sink_rate
        )
    if include_dephasing and any(spec.gamma_deph):
        gen += np.diag(np.asarray(spec.gamma_deph) @ dephasing_diagonals(spec.n_sites))
    return gen


def initial_state(spec: NetworkSpec | int, kind: str | int = 1) -> np.ndarray:
    """Pure initial density matrix in the sector basis.

    ``kind`` is a site label, ``"site:k"``, ``"vacuum"`` or ``"bell:a,k"``
    (the last gives ``(|a> + |k>)/sqrt(2)``).
    """
    n = spec.n_sites if isinstance(spec, NetworkSpec) else int(spec)
    dim = n + 2
    psi = np.zeros(dim, dtype=complex)
    if isinstance(kind, (int, np.integer)):
        kind = f"site:{kind}"
    kind = kind.strip().lower()
    if kind == "vacuum":
        psi[0] = 1.0
    elif kind.startswith("site:"):
        k = _parse_site(kind[5:], n)
        psi[k] = 1.0
    elif kind.startswith("bell:"):
        parts = kind[5:].split(",")
        if len(parts) != 2:
            raise SpecError(f"bell state needs two sites, got {kind!r}")
        a, k = (_parse_site(p, n) for p in parts)
        if a == k:
            raise SpecError("bell state needs two distinct sites")
        psi[a] = psi[k] = 1.0 / np.sqrt(2.0)
    else:
        raise SpecError(f"unknown initial state {kind!r}")
    return np.outer(psi, psi.conj())


def _parse_site(text: str, n: int) -> int:
    try:
        k = int(text)
    except ValueError:
        raise SpecError(f"bad site label {text!r}") from None
    if not 1 <= k <= n:
        raise SpecError(f"site {k} outside 1..{n}")
    return k


def populations(rho: np.ndarray) -> np.ndarray:
    return np.real(np.diag(rho)).copy()
