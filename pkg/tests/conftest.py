import math

import numpy as np
import pytest
from hypothesis import strategies as st

from dephasing_transport.network import NetworkSpec

ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def record_criterion():
    def record(name: str, passed: bool, detail: str = ""):
        ACCEPTANCE[name] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=_criterion_key):
        passed, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")


def _criterion_key(name: str):
    head = name.split()[0].rstrip(":")
    digits = "".join(c for c in head if c.isdigit())
    return (int(digits) if digits else 99, name)


rates = st.floats(0.0, 2.0, allow_nan=False, allow_infinity=False)


@st.composite
def network_specs(draw, max_sites: int = 5):
    n = draw(st.integers(1, max_sites))
    omega = draw(st.lists(st.floats(-3, 3), min_size=n, max_size=n))
    pairs = [(k, l) for k in range(1, n + 1) for l in range(k + 1, n + 1)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    couplings = [(k, l, draw(st.floats(-1.5, 1.5))) for k, l in chosen]
    return NetworkSpec(
        n_sites=n,
        omega=omega,
        couplings=couplings,
        gamma_diss=draw(st.lists(rates, min_size=n, max_size=n)),
        gamma_deph=draw(st.lists(rates, min_size=n, max_size=n)),
        sink_site=draw(st.integers(1, n)),
        sink_rate=draw(rates),
    )


@st.composite
def density_matrices(draw, dim: int):
    """Random density matrix from a seeded Ginibre draw."""
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_spec(rng: np.random.Generator, n: int = 3) -> NetworkSpec:
    """Moderate random network: everything O(1), all sites lossy."""
    couplings = [(k, l, rng.uniform(-1, 1)) for k in range(1, n + 1) for l in range(k + 1, n + 1)]
    return NetworkSpec(
        n_sites=n,
        omega=rng.uniform(-1, 1, n),
        couplings=couplings,
        gamma_diss=rng.uniform(0.05, 0.5, n),
        gamma_deph=rng.uniform(0.0, 1.0, n),
        sink_site=int(rng.integers(1, n + 1)),
        sink_rate=rng.uniform(0.2, 1.0),
    )


INF = math.inf
