"""Agreement between the closed-form oracles and the linear-solve propagator."""

from __future__ import annotations

import math

import numpy as np

from .oracles import N2Params, N3Params, delta_p_limit, p_sink_n2, p_sink_n3
from .presets import large_detuning_chain
from .propagate import p_sink_infinite


def _log_uniform(rng, lo, hi, size=None):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size))


def random_n2(rng) -> N2Params:
    g1, g2, diss, sink = _log_uniform(rng, 1e-3, 10.0, 4)
    return N2Params(float(_log_uniform(rng, 1e-2, 1.0)), g1, g2, diss, sink)


def random_n3(rng) -> N3Params:
    g1, g2, g3, rate = _log_uniform(rng, 1e-3, 10.0, 4)
    return N3Params(float(_log_uniform(rng, 1e-2, 1.0)), g1, g2, g3, rate)


def oracle_errors(n_samples: int = 100, seed: int = 0) -> dict[str, np.ndarray]:
    rng = np.random.default_rng([seed, 2])
    n2 = [random_n2(rng) for _ in range(n_samples)]
    n3 = [random_n3(rng) for _ in range(n_samples)]
    return {
        "n2": np.array([abs(p_sink_n2(p) - p_sink_infinite(p.to_spec())) for p in n2]),
        "n3": np.array([abs(p_sink_n3(p) - p_sink_infinite(p.to_spec())) for p in n3]),
    }


def large_detuning_gain(v: float, f: float, omega_2: float, gamma_2: float) -> float:
    """Propagator gain of dephasing ``gamma_2`` on the middle site of the detuned chain."""
    return (p_sink_infinite(large_detuning_chain(v, f, omega_2, gamma_2))
            - p_sink_infinite(large_detuning_chain(v, f, omega_2, 0.0)))


def oracle_agreement(n_samples: int = 100, seed: int = 0, tol: float = 1e-7) -> list[dict]:
    errs = oracle_errors(n_samples, seed)
    rows = [
        {"check": f"two-site closed form ({n_samples} draws)", "max_error": float(errs["n2"].max()),
         "tol": tol},
        {"check": f"three-site closed form ({n_samples} draws)",
         "max_error": float(errs["n3"].max()), "tol": tol},
    ]
    gain = large_detuning_gain(1e-3, 1e4, 100.0, 99.0)
    rows.append({"check": "large-detuning limit at v=1e-3",
                 "max_error": abs(gain - delta_p_limit(99.0, 100.0, 1e4)), "tol": 1e-2})
    for r in rows:
        r["passed"] = r["max_error"] <= r["tol"]
    return rows
