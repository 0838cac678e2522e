"""Closed-form sink probabilities for short uniform chains and the large-detuning limit.

All rates use the same normalisation as :mod:`dephasing_transport.network`.
"""

from __future__ import annotations

from dataclasses import dataclass

from .network import NetworkSpec
from .presets import linear_chain


class UndefinedInputError(ValueError):
    pass


@dataclass(frozen=True)
class N2Params:
    """Two resonant sites, equal dissipation ``diss`` on both, sink on site 2."""

    v: float
    gamma_1: float
    gamma_2: float
    diss: float
    sink_rate: float

    def __post_init__(self):
        if min(self.gamma_1, self.gamma_2, self.diss, self.sink_rate) < 0:
            raise UndefinedInputError("rates must be non-negative")

    def to_spec(self, omega: float = 0.0) -> NetworkSpec:
        return linear_chain(
            2, self.v, omega, self.diss, self.sink_rate, (self.gamma_1, self.gamma_2)
        )


@dataclass(frozen=True)
class N3Params:
    """Uniform three-site chain; dissipation and sink rate all equal ``rate``."""

    v: float
    gamma_1: float
    gamma_2: float
    gamma_3: float
    rate: float

    def __post_init__(self):
        if min(self.gamma_1, self.gamma_2, self.gamma_3, self.rate) < 0:
            raise UndefinedInputError("rates must be non-negative")

    def to_spec(self, omega: float = 0.0) -> NetworkSpec:
        return linear_chain(
            3, self.v, omega, self.rate, self.rate,
            (self.gamma_1, self.gamma_2, self.gamma_3),
        )


def p_sink_n2(p: N2Params) -> float:
    g = p.gamma_1 + p.gamma_2
    d, s, v2 = p.diss, p.sink_rate, p.v * p.v
    x = 2 * d**3 + d * s * (3 * d + s)
    den = x + d * (d + s) * g + (s + 2 * d) * v2
    if den <= 0:
        raise UndefinedInputError("denominator vanishes (all rates and coupling zero)")
    return s * v2 / den


def p_sink_n3(p: N3Params) -> float:
    # The numerator carries v**4; a v**2 numerator is not homogeneous of
    # degree five like the denominator.
    g1, g2, g3, r = p.gamma_1, p.gamma_2, p.gamma_3, p.rate
    v2 = p.v * p.v
    a = 5 * g1 + 5 * g2 + 4 * g3
    b = g1 * g2 + g1 * g3 + g2 * g3
    c = (
        g1 * (g2**2 + g3**2)
        + g2 * (g1**2 + g3**2)
        + g3 * (g1**2 + g2**2)
        + 2 * g1 * g2 * g3
    )
    d = 32 * g3 + 25 * g2 + 29 * g1
    den = (
        36 * r**5
        + 6 * a * r**4
        + 2 * r**3 * (3 * g1**2 + 3 * g2**2 + 8 * b + 2 * g3**2 + 32 * v2)
        + r**2 * (2 * c + d * v2)
        + r * v2 * (3 * g1**2 + 7 * b + 4 * g3**2 + 15 * v2)
        + 4 * (g1 + g3) * v2**2
    )
    if den <= 0:
        raise UndefinedInputError("denominator vanishes")
    return (4 * r + g1 + g3) * v2**2 / den


def delta_p_limit(gamma_2: float, omega_2: float, f: float) -> float:
    """Small-coupling limit of the dephasing gain on the strongly detuned chain."""
    if f <= 0 or omega_2 <= 1:
        raise UndefinedInputError("requires f > 0 and omega_2 > 1")
    q = (omega_2 - 1) ** 2 + gamma_2**2
    fg = f * gamma_2
    return fg * fg / (fg * fg + 3 * fg * q + q * q)


def delta_p_limit_peak(omega_2: float, f: float) -> float:
    """Value of :func:`delta_p_limit` at its maximiser ``gamma_2 = omega_2 - 1``."""
    w = omega_2 - 1
    return f * f / (f * f + 6 * f * w + 4 * w * w)
