import math

import numpy as np
import pytest
from scipy.linalg import expm

from dephasing_transport.collision import (
    CalibrationError,
    CollisionSchedule,
    calibrate_angle,
    collision_evolve,
)
from dephasing_transport.network import NetworkSpec, build_liouvillian, initial_state, unvec, vec
from dephasing_transport.presets import FMO_GAMMA_OPT_T5, fmo_preset, linear_chain
from dephasing_transport.propagate import evolve, p_sink_at

from conftest import random_spec


def test_calibration_values():
    assert calibrate_angle(0.0, 0.1) == 0.0
    assert calibrate_angle(math.log(math.sqrt(2)), 1.0) == pytest.approx(math.pi / 4, rel=1e-14)
    with pytest.raises(CalibrationError):
        calibrate_angle(-1.0, 0.1)
    with pytest.raises(CalibrationError):
        calibrate_angle(1e4, 1.0)


def test_schedule_validation():
    with pytest.raises(ValueError):
        CollisionSchedule(0.1, (2.0,), 1.0)
    with pytest.raises(ValueError):
        CollisionSchedule(0.3, (0.1,), 1.0)
    with pytest.raises(ValueError):
        CollisionSchedule(0.1, (0.1,), 1.0, memory=0)
    assert CollisionSchedule(0.1, (0.1,), 1.0).n_steps == 10


def single_site_coherence(gamma, dt, T, explicit=False):
    spec = NetworkSpec(1, [0.0], [], [0.0])
    schedule = CollisionSchedule.calibrated([gamma], dt, T)
    psi = np.array([1, 1, 0]) / np.sqrt(2)
    traj = collision_evolve(spec, schedule, np.outer(psi, psi), n_samples=11,
                            explicit=explicit, store_states=True)
    return traj.times, 2 * np.abs(traj.states[:, 0, 1])


@pytest.mark.parametrize("explicit", [False, True])
def test_single_site_matches_lindblad_decay(explicit):
    gamma = 2.0
    times, coh = single_site_coherence(gamma, 0.01 / gamma, 2.0, explicit)
    spec = NetworkSpec(1, [0.0], [], [0.0], [gamma])
    psi = np.array([1, 1, 0]) / np.sqrt(2)
    lind = np.array([2 * abs(unvec(expm(build_liouvillian(spec) * t) @ vec(np.outer(psi, psi)))[0, 1])
                     for t in times])
    np.testing.assert_allclose(coh, lind, rtol=1e-2)
    np.testing.assert_allclose(coh, np.exp(-gamma * times), rtol=1e-12)


def test_zero_angles_reproduce_coherent_dynamics():
    spec = fmo_preset()
    schedule = CollisionSchedule(1e-2, (0.0,) * 7, 5.0)
    traj = collision_evolve(spec, schedule, n_samples=51)
    ref = evolve(build_liouvillian(spec), initial_state(spec, 1), 5.0, times=traj.times,
                 method="expm")
    assert np.abs(traj.populations - ref.populations).max() <= 1e-8


@pytest.mark.parametrize("seed", range(3))
def test_dilation_agrees_with_reduced_map(seed):
    spec = random_spec(np.random.default_rng(seed), n=3)
    schedule = CollisionSchedule(0.05, (0.3, 0.0, 1.2), 1.0)
    a = collision_evolve(spec, schedule, store_states=True, n_samples=21)
    b = collision_evolve(spec, schedule, store_states=True, n_samples=21, explicit=True)
    assert a.diagnostics["backend"] == "collision-reduced"
    assert b.diagnostics["backend"] == "collision-dilation"
    assert np.abs(a.states - b.states).max() <= 1e-13


def brute_force_memory(spec, angles, dt, steps, memory, rho0):
    """Joint network + one qubit per site as plain Kronecker products."""
    n, d = spec.n_sites, spec.dim
    m_env = n
    env_dim = 2**m_env
    big = d * env_dim
    eye_env = np.eye(env_dim)
    gen_sys = build_liouvillian(spec, include_dephasing=False)
    prop_sys = expm(gen_sys * dt)

    def apply_sys(rho_big):
        # (Phi x id) via blockwise action on every env matrix element
        r = rho_big.reshape(d, env_dim, d, env_dim)
        out = np.empty_like(r)
        for e in range(env_dim):
            for f in range(env_dim):
                out[:, e, :, f] = unvec(prop_sys @ vec(r[:, e, :, f]), d)
        return out.reshape(big, big)

    def collision(k, q, theta):
        proj = np.zeros((d, d))
        proj[k, k] = 1
        c, s = math.cos(theta), math.sin(theta)
        ry = np.array([[c, -s], [s, c]])
        ops = [np.eye(2)] * m_env
        ops[q] = ry
        rot = ops[0]
        for o in ops[1:]:
            rot = np.kron(rot, o)
        return np.kron(proj, rot) + np.kron(np.eye(d) - proj, eye_env)

    fresh = np.zeros((env_dim, env_dim))
    fresh[0, 0] = 1
    rho = np.kron(rho0, fresh)
    unitaries = [collision(k, k - 1, angles[k - 1]) for k in range(1, n + 1)]
    for step in range(1, steps + 1):
        rho = apply_sys(rho)
        for u in unitaries:
            rho = u @ rho @ u.conj().T
        if step % memory == 0:
            rho = np.kron(np.trace(rho.reshape(d, env_dim, d, env_dim), axis1=1, axis2=3), fresh)
    return np.trace(rho.reshape(d, env_dim, d, env_dim), axis1=1, axis2=3)


@pytest.mark.parametrize("memory", [1, 2, 3])
def test_memory_path_matches_brute_force(memory):
    spec = linear_chain(2, 0.8, (0.0, 0.5), 0.1, 0.6)
    angles = (0.4, 0.9)
    dt, steps = 0.1, 12
    schedule = CollisionSchedule(dt, angles, dt * steps, memory)
    rho0 = initial_state(spec, 1)
    traj = collision_evolve(spec, schedule, rho0, store_states=True)
    expected = brute_force_memory(spec, angles, dt, steps, memory, rho0)
    assert np.abs(traj.final_state - expected).max() <= 1e-12


def test_memory_changes_dynamics():
    spec = linear_chain(2, 0.8, (0.0, 0.5), 0.1, 0.6)
    a = collision_evolve(spec, CollisionSchedule(0.1, (0.4, 0.9), 2.0, 1))
    b = collision_evolve(spec, CollisionSchedule(0.1, (0.4, 0.9), 2.0, 4))
    assert b.diagnostics["backend"] == "collision-joint"
    assert abs(a.final_p_sink - b.final_p_sink) > 1e-6


def test_markovian_limit_error_decreases():
    spec = random_spec(np.random.default_rng(5), n=3)
    gammas = np.array(spec.gamma_deph)
    gmax = gammas.max()
    T = 1.0
    ref = unvec(expm(build_liouvillian(spec) * T) @ vec(initial_state(spec, 1)), spec.dim)
    errors = []
    for scale in (1e-1, 1e-2, 1e-3):
        dt = T / math.ceil(T / (scale / gmax))
        schedule = CollisionSchedule.calibrated(gammas, dt, T)
        traj = collision_evolve(spec, schedule, store_states=True, n_samples=2)
        errors.append(np.linalg.norm(traj.final_state - ref))
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 1e-3


def test_trace_preserved_per_step():
    spec = fmo_preset()
    schedule = CollisionSchedule.calibrated(FMO_GAMMA_OPT_T5, 1e-3, 1.0)
    traj = collision_evolve(spec, schedule)
    assert traj.diagnostics["max_trace_drift"] <= 1e-10
    assert np.all(np.diff(traj.p_sink) >= -1e-12)


def test_factor_scales_rates():
    a = CollisionSchedule.calibrated([2.0, 0.5], 1e-2, 1.0, factor=0.16)
    b = CollisionSchedule.calibrated([0.32, 0.08], 1e-2, 1.0)
    assert a.angles == b.angles


def test_dephasing_assistance_survives_collisions():
    spec = fmo_preset()
    p0 = collision_evolve(spec, CollisionSchedule.calibrated([0.0] * 7, 1e-2, 5.0)).final_p_sink
    p1 = collision_evolve(spec, CollisionSchedule.calibrated(FMO_GAMMA_OPT_T5, 1e-3, 5.0)).final_p_sink
    assert p1 > p0
    assert p1 == pytest.approx(p_sink_at(fmo_preset(FMO_GAMMA_OPT_T5), 5.0), rel=2e-2)
