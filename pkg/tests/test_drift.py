import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from mcfswitch.drift import DriftState, PathImpairments, drift_trajectory, step_drift, wavelength_phase_offsets
from mcfswitch.field import ContractError


def test_zero_diffusion_leaves_state_unchanged():
    s = DriftState(np.array([0.1, 1.0, 2.0, 3.0]), 0.0, 5)
    for _ in range(10):
        s = step_drift(s, 1e-3)
    np.testing.assert_array_equal(s.theta_n, [0.1, 1.0, 2.0, 3.0])


@given(st.integers(0, 2**31), st.floats(0.01, 10.0))
def test_same_seed_same_trajectory(seed, d):
    a = b = DriftState(np.zeros(4), d, seed)
    for _ in range(5):
        a, b = step_drift(a, 1e-3), step_drift(b, 1e-3)
        np.testing.assert_array_equal(a.theta_n, b.theta_n)


def test_step_is_pure():
    s = DriftState(np.zeros(4), 1.0, 3)
    np.testing.assert_array_equal(step_drift(s, 0.1).theta_n, step_drift(s, 0.1).theta_n)


def test_wrapped_to_two_pi():
    s = DriftState(np.zeros(4), 100.0, 9)
    for _ in range(50):
        s = step_drift(s, 0.1)
        assert np.all((s.theta_n >= 0) & (s.theta_n < 2 * np.pi))


def test_trajectory_matches_repeated_steps():
    s = DriftState(np.array([0.5, 0.0, 1.0, 2.0]), 0.7, 11)
    traj, end = drift_trajectory(s, 1e-2, 20)
    cur = s
    for row in traj:
        cur = step_drift(cur, 1e-2)
        np.testing.assert_allclose(cur.theta_n, np.mod(row, 2 * np.pi), atol=1e-12)
    np.testing.assert_allclose(end.theta_n, cur.theta_n, atol=1e-12)


def test_increment_variance_and_gaussianity():
    d, dt, n = 1.0, 1e-3, 1_000_000
    traj, _ = drift_trajectory(DriftState(np.zeros(4), d, 2024), dt, n)
    inc = np.diff(np.vstack([np.zeros(4), traj]), axis=0)
    var = inc.var(axis=0, ddof=1)
    np.testing.assert_allclose(var, d * dt, rtol=0.05)
    # chi-square interval for the sample variance at 99.9 %
    lo, hi = stats.chi2.ppf([0.0005, 0.9995], n - 1) / (n - 1) * d * dt
    assert np.all((var > lo) & (var < hi))
    z = inc / math.sqrt(d * dt)
    for k in range(4):
        assert stats.kstest(z[:200_000, k], "norm").pvalue > 0.01
        assert stats.ttest_1samp(z[:, k], 0.0).pvalue > 0.01
        r = np.corrcoef(z[:-1, k], z[1:, k])[0, 1]
        assert abs(r) < 4 / math.sqrt(n)


def test_paths_are_independent():
    traj, _ = drift_trajectory(DriftState(np.zeros(4), 1.0, 8), 1e-3, 200_000)
    inc = np.diff(traj, axis=0)
    c = np.corrcoef(inc.T)
    assert np.max(np.abs(c - np.eye(4))) < 4 / math.sqrt(inc.shape[0])


def test_step_rejects_nonpositive_dt():
    s = DriftState(np.zeros(4), 1.0, 1)
    with pytest.raises(ContractError):
        step_drift(s, 0.0)
    with pytest.raises(ContractError):
        drift_trajectory(s, -1.0, 3)


def test_negative_diffusion_rejected():
    with pytest.raises(ContractError):
        DriftState(np.zeros(4), -1.0, 1)


def test_wavelength_offset_zero_at_reference():
    imp = PathImpairments(delta_length=(0, 1e-4, 2e-4, -3e-4))
    np.testing.assert_array_equal(wavelength_phase_offsets(imp, 1550e-9, 1550e-9), 0.0)


def test_wavelength_offset_zero_without_mismatch():
    imp = PathImpairments()
    np.testing.assert_array_equal(wavelength_phase_offsets(imp, 1530e-9, 1550e-9), 0.0)


def test_wavelength_offset_arithmetic():
    imp = PathImpairments(delta_length=(0, 100e-6, 0, 0), group_index=1.468)
    phi = wavelength_phase_offsets(imp, 1540e-9, 1550e-9)
    expected = 2 * math.pi * 1.468 * 1e-4 * (1 / 1540e-9 - 1 / 1550e-9)
    assert phi[1] == pytest.approx(expected, rel=1e-12)
    assert phi[1] == pytest.approx(3.86, abs=0.01)


@given(st.floats(1e-7, 1e-3), st.floats(1530.0, 1565.0))
def test_wavelength_offset_first_order_antisymmetric(dl, ref_nm):
    imp = PathImpairments(delta_length=(0, dl, -dl, 0.5 * dl))
    ref = ref_nm * 1e-9
    plus = wavelength_phase_offsets(imp, ref + 1e-9, ref)
    minus = wavelength_phase_offsets(imp, ref - 1e-9, ref)
    for k in (1, 2, 3):
        assert abs(plus[k] + minus[k]) < 0.02 * abs(plus[k])


def test_wavelength_out_of_band():
    with pytest.raises(ContractError):
        wavelength_phase_offsets(PathImpairments(), 1.0e-6, 1550e-9)
    with pytest.raises(ContractError):
        wavelength_phase_offsets(PathImpairments(), 1550e-9, 1.8e-6)


def test_impairment_contracts():
    with pytest.raises(ContractError):
        PathImpairments(loss_db=(-1, 0, 0, 0))
    with pytest.raises(ContractError):
        PathImpairments(group_index=2.5)
    with pytest.raises(ContractError):
        PathImpairments(delta_length=(0, np.inf, 0, 0))


def test_default_loss_budget():
    imp = PathImpairments()
    np.testing.assert_allclose(imp.path_loss_db(), 3.3 + 2.2 + 2.2)
