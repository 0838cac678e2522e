import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dephasing_transport.checks import large_detuning_gain, oracle_agreement
from dephasing_transport.oracles import (
    N2Params,
    N3Params,
    UndefinedInputError,
    delta_p_limit,
    delta_p_limit_peak,
    p_sink_n2,
    p_sink_n3,
)
from dephasing_transport.propagate import p_sink_infinite

pos = st.floats(1e-3, 10.0)
hop = st.floats(1e-2, 1.0)


def test_two_site_hand_value():
    # v = diss = sink = 1, no dephasing: 1 / (6 + 3)
    assert p_sink_n2(N2Params(1.0, 0.0, 0.0, 1.0, 1.0)) == pytest.approx(1 / 9, rel=1e-15)


@settings(max_examples=40, deadline=None)
@given(v=hop, g1=pos, g2=pos, d=pos, s=pos)
def test_two_site_formula_matches_steady_state(v, g1, g2, d, s):
    p = N2Params(v, g1, g2, d, s)
    assert p_sink_n2(p) == pytest.approx(p_sink_infinite(p.to_spec()), abs=1e-7)


@settings(max_examples=40, deadline=None)
@given(v=hop, g1=pos, g2=pos, g3=pos, r=pos)
def test_three_site_formula_matches_steady_state(v, g1, g2, g3, r):
    p = N3Params(v, g1, g2, g3, r)
    assert p_sink_n3(p) == pytest.approx(p_sink_infinite(p.to_spec()), abs=1e-7)


@settings(max_examples=40, deadline=None)
@given(v=hop, g=pos, d=pos, s=pos, extra=st.floats(1e-3, 5.0))
def test_two_site_monotone_in_dephasing(v, g, d, s, extra):
    lo = p_sink_n2(N2Params(v, g, g, d, s))
    hi = p_sink_n2(N2Params(v, g + extra, g + extra, d, s))
    assert hi < lo


def squared_gradient(v, r, gt, h=1e-6):
    """Central-difference gradient with respect to gt, where gamma = gt**2."""
    grad = np.zeros(3)
    for i in range(3):
        up, dn = gt.copy(), gt.copy()
        up[i] += h
        dn[i] -= h
        grad[i] = (p_sink_n3(N3Params(v, *up**2, r)) - p_sink_n3(N3Params(v, *dn**2, r))) / (2 * h)
    return grad


def test_three_site_gradient_vanishes_only_at_zero():
    axis = np.linspace(0.0, 2.0, 6)
    for v in (0.05, 0.3, 1.0):
        for r in (0.01, 0.3, 3.0):
            assert np.abs(squared_gradient(v, r, np.zeros(3))).max() < 1e-9
            for gt in np.array(np.meshgrid(axis, axis, axis)).reshape(3, -1).T[1:]:
                grad = squared_gradient(v, r, gt)
                assert np.all(grad <= 1e-12)
                assert np.abs(grad).max() > 0


@settings(max_examples=40, deadline=None)
@given(v=hop, g1=pos, g2=pos, g3=pos, r=pos)
def test_three_site_is_probability(v, g1, g2, g3, r):
    assert 0 < p_sink_n3(N3Params(v, g1, g2, g3, r)) <= 1


@settings(max_examples=20, deadline=None)
@given(v=hop, g=pos, s=pos)
def test_two_site_lossless_is_complete(v, g, s):
    assert p_sink_n2(N2Params(v, g, 0.0, 0.0, s)) == pytest.approx(1.0, rel=1e-14)


def test_three_site_hand_value():
    # v = r = 1 with no dephasing: 4 / (36 + 64 + 15)
    assert p_sink_n3(N3Params(1.0, 0, 0, 0, 1.0)) == pytest.approx(4 / 115, rel=1e-15)
    assert p_sink_infinite(N3Params(1.0, 0, 0, 0, 1.0).to_spec()) == pytest.approx(4 / 115)


def test_limit_maximised_at_detuning():
    omega_2, f = 100.0, 1e3
    grid = np.linspace(0.0, 1000.0, 100_001)
    values = np.array([delta_p_limit(g, omega_2, f) for g in grid])
    assert grid[values.argmax()] == pytest.approx(omega_2 - 1, abs=0.02)
    assert values.max() == pytest.approx(delta_p_limit_peak(omega_2, f), rel=1e-12)


def test_limit_peak_near_one_for_large_f():
    assert delta_p_limit_peak(100.0, 1e4) >= 0.94
    assert delta_p_limit(0.0, 100.0, 1e4) == 0.0


def test_limit_agrees_with_propagator():
    target = delta_p_limit(99.0, 100.0, 1e4)
    err = [abs(large_detuning_gain(v, 1e4, 100.0, 99.0) - target) for v in (1e-2, 1e-3)]
    assert err[1] <= 1e-2
    assert err[1] < err[0]


def test_undefined_inputs():
    with pytest.raises(UndefinedInputError):
        N2Params(1.0, -1.0, 0.0, 1.0, 1.0)
    with pytest.raises(UndefinedInputError):
        p_sink_n2(N2Params(0.0, 0.0, 0.0, 0.0, 0.0))
    with pytest.raises(UndefinedInputError):
        delta_p_limit(1.0, 1.0, 10.0)


def test_agreement_report():
    rows = oracle_agreement(n_samples=20, seed=3)
    assert all(r["passed"] for r in rows)
