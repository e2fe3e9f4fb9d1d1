import numpy as np
import pytest

from mcfswitch import engine
from mcfswitch.controller import actuate_timeline, codes_to_phase, command_codes, command_target, initial_state, po_step
from mcfswitch.drift import DriftState, drift_trajectory
from mcfswitch.engine import HOLD, TRACK
from mcfswitch.field import ContractError
from mcfswitch.scenario import Device, MonitorModel, _run_kernel, monitor_sample, reference_powers

THETA0 = np.array([0.0, 1.0, 2.0, 3.0])


def applied(dev, target):
    """Table phases as realized by the DAC."""
    return codes_to_phase(command_codes(dev.table[target], dev.actuator), dev.actuator)


def reference_loop(cfg, dev, schedule, n, seed, n_sub, theta0):
    """Closed loop assembled from the public pieces, one control sample at a time."""
    a = dev.actuator
    traj, _ = drift_trajectory(DriftState(theta0, cfg.drift.diffusion, seed), a.sample_period, n)
    traj = traj + (theta0 - np.mod(theta0, 2 * np.pi))
    changes = {s: tgt for s, _, tgt in schedule[1:]}
    state = initial_state(dev.splitter, schedule[0][2], actuator=a, po=dev.po)
    mon = MonitorModel(control_rate=a.sample_rate)
    r = None
    monitor, corrections = [], []
    for s in range(n):
        if s in changes:
            state = command_target(state, changes[s])
        _, rf = actuate_timeline(state.dac_codes[None, :], a, oversample=n_sub, initial=r)
        r = rf[-1]
        fine = np.array([reference_powers(dev, traj[s] + rf[f]) for f in range(n_sub)])
        m = monitor_sample(fine[:, state.target_core], a.sample_period / n_sub, mon)[0]
        monitor.append(m)
        state = po_step(state, m)
        corrections.append(state.correction.copy())
    return np.array(monitor), np.array(corrections), state


@pytest.mark.parametrize("rise_tau", [0.0, 0.3186e-6])
def test_kernel_matches_reference_loop(cfg, rise_tau):
    cfg.actuator.rise_tau = rise_tau
    cfg.drift.diffusion = 50.0
    dev = Device.from_config(cfg)
    sched = [(0, TRACK, 0), (150, TRACK, 2), (153, TRACK, 1), (260, TRACK, 3)]
    n = 400
    res = _run_kernel(cfg, dev, sched, n, seed=5, n_sub=10, theta0=THETA0)
    mon, corr, state = reference_loop(cfg, dev, sched, n, 5, 10, THETA0)
    np.testing.assert_allclose(res.monitor, mon, rtol=1e-6, atol=1e-12)
    np.testing.assert_allclose(res.correction, state.correction, atol=1e-12)
    np.testing.assert_array_equal(res.direction, state.direction)
    assert res.final_target == state.target_core


def test_fast_average_matches_fine_loop(cfg):
    cfg.drift.diffusion = 20.0
    dev = Device.from_config(cfg)
    n = 20_000
    sched = [(0, TRACK, 0), (5000, TRACK, 1), (5003, TRACK, 2), (12000, TRACK, 3)]
    a = _run_kernel(cfg, dev, sched, n, seed=4, n_sub=10, theta0=THETA0)
    b = _run_kernel(cfg, dev, sched, n, seed=4, n_sub=10, theta0=THETA0, fine_window=(0, n))
    np.testing.assert_allclose(a.monitor, b.monitor, rtol=1e-11, atol=1e-14)
    np.testing.assert_allclose(a.coarse, b.coarse, rtol=1e-11, atol=1e-14)
    np.testing.assert_array_equal(a.correction, b.correction)
    # the fine record averages back to the per-sample monitor reading
    fine_mean = b.fine.reshape(n, 10, 4).mean(axis=1)
    np.testing.assert_allclose(fine_mean[np.arange(n), 0][:5000], b.monitor[:5000], rtol=1e-12)


def test_fast_average_large_residuals(cfg):
    # slow actuator: long slews take the non-series branch as well
    cfg.actuator.rise_tau = 3e-6
    dev = Device.from_config(cfg)
    n = 3000
    sched = [(0, TRACK, 0)] + [(s, TRACK, (s // 40) % 4) for s in range(40, n, 40)]
    a = _run_kernel(cfg, dev, sched, n, seed=2, n_sub=20, theta0=THETA0)
    b = _run_kernel(cfg, dev, sched, n, seed=2, n_sub=20, theta0=THETA0, fine_window=(0, n))
    np.testing.assert_allclose(a.monitor, b.monitor, rtol=1e-11, atol=1e-14)


def test_chunking_is_invisible(cfg, monkeypatch):
    dev = Device.from_config(cfg)
    sched = [(0, HOLD, 0), (700, TRACK, 0), (1500, TRACK, 2)]
    a = _run_kernel(cfg, dev, sched, 3000, seed=9, n_sub=10, block=10, fine_window=(1490, 1520))
    monkeypatch.setattr(engine, "CHUNK", 97)
    b = _run_kernel(cfg, dev, sched, 3000, seed=9, n_sub=10, block=10, fine_window=(1490, 1520))
    for name in ("coarse", "monitor", "fine", "phase_log", "theta", "correction"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))


def test_hold_follows_drift_only(cfg):
    dev = Device.from_config(cfg)
    n = 5000
    res = _run_kernel(cfg, dev, [(0, HOLD, 1)], n, seed=3, n_sub=10, theta0=THETA0)
    np.testing.assert_array_equal(res.correction, 0.0)
    traj, _ = drift_trajectory(DriftState(THETA0, cfg.drift.diffusion, 3), dev.actuator.sample_period, n)
    np.testing.assert_allclose(np.mod(res.theta, 2 * np.pi), np.mod(traj[-1], 2 * np.pi), atol=1e-9)
    # the monitor reads the static device at the drifted phases
    last = reference_powers(dev, traj[-1] + applied(dev, 1))[1]
    assert res.monitor[-1] == pytest.approx(last, rel=1e-9)


def test_static_device_without_drift(cfg):
    cfg.drift.diffusion = 0.0
    dev = Device.from_config(cfg)
    res = _run_kernel(cfg, dev, [(0, HOLD, 2)], 50, seed=1, n_sub=10, theta0=np.zeros(4))
    np.testing.assert_allclose(res.coarse, np.tile(reference_powers(dev, applied(dev, 2)), (50, 1)), rtol=1e-9)


def test_coarse_blocks_are_monitor_means(cfg):
    dev = Device.from_config(cfg)
    res = _run_kernel(cfg, dev, [(0, TRACK, 0)], 4000, seed=1, n_sub=10, block=40)
    np.testing.assert_allclose(res.coarse[:, 0], res.monitor.reshape(-1, 40).mean(axis=1), rtol=1e-12)


def test_simulate_argument_checks(cfg):
    dev = Device.from_config(cfg)
    with pytest.raises(ValueError):
        _run_kernel(cfg, dev, [(5, TRACK, 0)], 100, seed=1, n_sub=10)
    with pytest.raises(ValueError):
        _run_kernel(cfg, dev, [(0, TRACK, 0)], 101, seed=1, n_sub=10, block=10)


# monitor model


def test_monitor_constant_power_unchanged():
    m = MonitorModel()
    out = monitor_sample(np.full((4, 1000), 0.37), 1.25e-6 / 100, m)
    np.testing.assert_allclose(out, 0.37, rtol=1e-14)
    assert out.shape == (4, 10)


def test_monitor_ook_average():
    from mcfswitch.ber import prbs_generate

    dt = 1e-9  # one bit per step at 1 Gb/s
    bits = prbs_generate(15, 1, 1250 * 40).astype(float)
    p1, p0 = 1.0, 10 ** (-0.9)
    p = np.where(bits == 1, p1, p0)
    out = monitor_sample(p, dt, MonitorModel())
    ones = bits.reshape(-1, 1250).mean(axis=1)
    np.testing.assert_allclose(out, p0 + (p1 - p0) * ones, rtol=1e-12)
    # density fluctuation of 1250 fair bits per window
    sd = (p1 - p0) * 0.5 / np.sqrt(1250)
    assert np.all(np.abs(out - (p1 + p0) / 2) < 5 * sd)


def test_monitor_suppresses_fast_ripple():
    dt = 1e-9
    t = np.arange(125_000) * dt
    p = 1.0 + 0.5 * np.sin(2 * np.pi * 10e6 * t + 0.3)
    out = monitor_sample(p, dt, MonitorModel())
    assert np.max(np.abs(out - 1.0)) < 0.05 * 0.5


def test_monitor_needs_resolution():
    with pytest.raises(ContractError):
        monitor_sample(np.ones(100), 1.25e-6 / 5, MonitorModel())
    with pytest.raises(ContractError):
        MonitorModel(bandwidth_hz=1e5)
