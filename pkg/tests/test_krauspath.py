import numpy as np
import pytest
from scipy.linalg import expm

from scspovm.analysis import KrausAccumulator
from scspovm.krauspath import (
    PathConfig,
    grouped_isotropy_check,
    polar_unitary,
    rotation_angle,
    run_paths,
    run_single_path,
    sample_mu,
    step_path,
)
from scspovm.spin import build_spin_system, rotation_unitary, spin_component

from conftest import random_direction


def test_config_validation():
    with pytest.raises(ValueError):
        PathConfig(n_qubits=0, delta_t=0.01, total_time=1.0)
    with pytest.raises(ValueError):
        PathConfig(n_qubits=2, delta_t=0.0, total_time=1.0)
    with pytest.raises(ValueError):
        PathConfig(n_qubits=2, delta_t=0.01, total_time=0.015)  # not a multiple
    with pytest.raises(ValueError):
        PathConfig(n_qubits=2, delta_t=0.01, total_time=1.0, mu_variance_mode="x")
    with pytest.raises(ValueError):
        PathConfig(n_qubits=2, delta_t=0.01, total_time=1.0, n_paths=0)
    cfg = PathConfig(n_qubits=2, delta_t=0.01, total_time=1.0)
    assert cfg.n_steps == 100


def test_sample_mu_statistics():
    cfg = PathConfig(n_qubits=2, delta_t=0.01, total_time=1.0, kappa=1.0,
                     mu_variance_mode="third")
    rng = np.random.default_rng(0)
    draws = np.array([sample_mu(rng, cfg) for _ in range(10**5)])
    target = 1.0 / (3 * 0.01)
    for c in range(3):
        assert abs(draws[:, c].var() - target) / target < 0.02
        assert abs(draws[:, c].mean()) < 4 * np.sqrt(target / draws.shape[0])
    for a, b in ((0, 1), (0, 2), (1, 2)):
        assert abs(np.corrcoef(draws[:, a], draws[:, b])[0, 1]) < 0.02

    cfg_unit = PathConfig(n_qubits=2, delta_t=0.01, total_time=1.0,
                          mu_variance_mode="unit")
    draws = np.array([sample_mu(rng, cfg_unit) for _ in range(10**4)])
    assert abs(draws.var() - 100.0) / 100.0 < 0.05


def test_step_path_trivial_cases(sys4):
    cfg = PathConfig(n_qubits=4, delta_t=0.01, total_time=1.0)
    acc = KrausAccumulator.identity(sys4.dim)
    before = acc.matrix.copy()
    step_path(sys4, acc, [0.0, 0.0, 0.0], cfg)
    assert np.array_equal(acc.matrix, before)

    step_path(sys4, acc, [0.0, 0.0, 10.0], cfg)
    # diagonal positive factor exp((kappa dt / 2) |mu| M)
    expected = np.exp(0.5 * 0.01 * 10.0 * sys4.m_values)
    rebuilt = np.exp(acc.log_scale) * acc.matrix
    assert np.allclose(np.diag(rebuilt).real / np.sqrt(sys4.dim),
                       expected / np.sqrt(sys4.dim), atol=1e-12)
    assert np.max(np.abs(rebuilt - np.diag(expected))) < 1e-12


def test_step_path_matches_expm_products():
    s = build_spin_system(2)
    cfg = PathConfig(n_qubits=2, delta_t=0.05, total_time=1.0)
    acc = KrausAccumulator.identity(s.dim)
    mus = [np.array([3.0, -1.0, 2.0]), np.array([-2.0, 0.5, 1.5])]
    for mu in mus:
        step_path(s, acc, mu, cfg)
    oracle = np.eye(s.dim, dtype=complex)
    for mu in mus:
        oracle = expm(0.5 * cfg.kappa * cfg.delta_t
                      * spin_component(s, mu / np.linalg.norm(mu))
                      * np.linalg.norm(mu)) @ oracle
    rebuilt = np.exp(acc.log_scale) * acc.matrix
    assert np.max(np.abs(rebuilt - oracle)) < 1e-12


def test_grouped_isotropy_exact_axes(sys4):
    axes = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]]
    assert grouped_isotropy_check(sys4, axes) < 1e-12


def test_grouped_isotropy_single_direction(sys4):
    dev = grouped_isotropy_check(sys4, [[0, 0, 1.0]])
    jz2 = sys4.jz @ sys4.jz
    expected = np.max(np.abs(np.linalg.eigvalsh(
        jz2 - sys4.j * (sys4.j + 1) / 3 * np.eye(sys4.dim))))
    assert abs(dev - expected) < 1e-12
    assert dev > 1.0


def test_grouped_isotropy_haar_scaling(sys4):
    rng = np.random.default_rng(1)
    devs = {}
    for l in (100, 10000):
        dirs = np.array([random_direction(rng) for _ in range(l)])
        devs[l] = grouped_isotropy_check(sys4, dirs)
    # CLT: deviation shrinks like 1/sqrt(l)
    ratio = devs[100] / devs[10000]
    assert 3 < ratio < 30
    assert devs[10000] < 0.5


def test_polar_unitary_and_rotation_angle(sys4):
    rng = np.random.default_rng(2)
    axis, angle = random_direction(rng), 0.8
    u = rotation_unitary(sys4, axis, angle)
    assert abs(rotation_angle(sys4, u) - angle) < 1e-10
    # unitary recovered from a synthetic polar product U exp(a n.J)
    n = random_direction(rng)
    w, v = np.linalg.eigh(spin_component(sys4, n))
    stretch = (v * np.exp(0.4 * w)) @ v.conj().T
    acc = KrausAccumulator.identity(sys4.dim)
    acc.accumulate(u @ stretch)
    u_rec = polar_unitary(sys4, acc, 0.4, n)
    phase = np.trace(u_rec @ u.conj().T) / sys4.dim
    phase /= abs(phase)
    assert np.max(np.abs(u_rec - phase * u)) < 1e-10


def test_run_single_path_shapes():
    cfg = PathConfig(n_qubits=4, delta_t=0.01, total_time=0.1, n_paths=1,
                     seed=3, store_series=True)
    alphas, avec, axis, drift, axis_series, angles, res = run_single_path(cfg, 0)
    assert alphas.shape == (10,)
    assert axis_series.shape == (10, 3)
    assert angles.shape == (10,)
    assert abs(np.linalg.norm(axis) - 1) < 1e-10
    assert np.allclose(avec, np.abs(avec[2] / axis[2]) * axis)
    assert res < 1e-8  # exact exponential stepping stays in the family
    assert 0 <= drift <= np.pi


def test_run_paths_small_time_variance():
    cfg = PathConfig(n_qubits=4, delta_t=0.001, total_time=0.01, n_paths=200,
                     seed=4)
    st = run_paths(cfg)
    # kappa T = 0.01: variance ~ kT/12 = 8.3e-4, far below 1
    assert st.alpha_var < 5e-3
    assert abs(st.alpha_mean) < 0.05


def test_run_paths_diffusion_and_isotropy():
    cfg = PathConfig(n_qubits=4, delta_t=0.01, total_time=1.0, n_paths=500,
                     seed=5)
    st = run_paths(cfg)
    assert st.residual_max < 1e-8
    # linear growth of the variance
    slope, intercept = np.polyfit(st.times, st.alpha_var_series, 1)
    assert 0.9 / 12 < slope < 1.25 / 12
    assert abs(intercept) < 0.01
    # all three components of the alpha vector diffuse equally
    comp_var = st.final_alpha_vectors.var(axis=0, ddof=1)
    assert comp_var.max() / comp_var.min() < 1.5
    # ensemble mean consistent with zero
    assert abs(st.alpha_mean) < 4 * np.sqrt(st.alpha_var / cfg.n_paths)


def test_axis_freezes_and_unitary_wanders():
    cfg = PathConfig(n_qubits=4, delta_t=0.01, total_time=3.0, n_paths=40,
                     seed=6, store_series=True)
    st = run_paths(cfg)
    n_steps = st.axis_series.shape[1]
    early = slice(int(0.05 * n_steps), int(0.15 * n_steps))
    late = slice(int(0.9 * n_steps), n_steps)

    def axis_motion(block):
        cos = np.clip(np.abs(np.sum(block[:, 1:] * block[:, :-1], axis=2)), -1, 1)
        return np.arccos(cos)

    early_motion = np.median(axis_motion(st.axis_series[:, early]))
    late_motion = np.median(axis_motion(st.axis_series[:, late]))
    assert late_motion < 0.5 * early_motion  # axis freezes as alpha grows

    # per-step unitary rotation angle approaches a nonzero stationary level
    mid_angles = np.median(st.step_angle_series[:, int(0.55 * n_steps):int(0.75 * n_steps)])
    late_angles = np.median(st.step_angle_series[:, late])
    assert late_angles > 0.01
    assert 0.5 < late_angles / mid_angles < 2.0
