"""Reproducible experiments wiring device, drift, controller, monitor and transceiver.

Each ``run_*`` function takes a validated :class:`ScenarioConfig` and returns
a :class:`ScenarioResult`. Results depend only on the config (seed
included); reruns are bit-identical.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import ber as ber_mod
from .config import LinkSection, ScenarioConfig
from .controller import ACTIVE, PENDING, ActuatorConfig, POConfig, codes_to_phase, command_codes, switching_table
from .drift import PathImpairments, wavelength_phase_offsets
from .engine import HOLD, TRACK, KernelResult, simulate
from .field import (
    N_PATHS,
    ContractError,
    TransferMatrix,
    make_splitter,
    output_powers,
    phase_set,
    propagate,
    unit_input,
)
from .metrics import (
    MetricError,
    MetricsReport,
    PowerTrace,
    adjacent_cores,
    core_dwell,
    extinction_ratio,
    ic_xt,
    insertion_loss,
    rise_time_10_90,
    visibility,
)


@dataclass(frozen=True)
class MonitorModel:
    """Control photodiode plus digital low-pass, seen as a block average."""

    bandwidth_hz: float = 150e6
    control_rate: float = 0.8e6
    responsivity: float = 1.0

    def __post_init__(self):
        if self.bandwidth_hz < self.control_rate:
            raise ContractError("monitor bandwidth must be >= control rate")
        if self.responsivity <= 0:
            raise ContractError("responsivity must be > 0")


def monitor_sample(p, dt: float, m: MonitorModel) -> np.ndarray:
    """Average fine-resolution powers over each control-sample window.

    ``p`` has the time axis last; a trailing partial window is dropped. The
    result has one column per control sample.
    """
    p = np.asarray(p, dtype=float)
    n_per = int(round(1.0 / (m.control_rate * dt)))
    if n_per < 10:
        raise ContractError("monitor input must resolve >= 10 points per control sample")
    n_win = p.shape[-1] // n_per
    blocks = p[..., : n_win * n_per].reshape(p.shape[:-1] + (n_win, n_per))
    return m.responsivity * blocks.mean(axis=-1)


def link_loss_db(link: LinkSection) -> float:
    """End-to-end link loss; a loopback traverses the fiber twice."""
    passes = 2.0 if link.loopback else 1.0
    return passes * link.length_m * 1e-3 * link.fiber_loss_db_per_km + link.connector_loss_db


@dataclass(frozen=True)
class Device:
    splitter: TransferMatrix
    impairments: PathImpairments
    actuator: ActuatorConfig
    po: POConfig
    table: np.ndarray
    input_core: int = 0
    tap_loss_db: float = 0.0

    @classmethod
    def from_config(cls, cfg: ScenarioConfig) -> "Device":
        splitter = make_splitter(cfg.device.splitter)
        imp = cfg.impairments
        return cls(
            splitter=splitter,
            impairments=PathImpairments(imp.loss_db, imp.delta_length, imp.group_index, imp.splitter_loss_db),
            actuator=ActuatorConfig(cfg.actuator.dac_bits, cfg.actuator.v_max, cfg.actuator.v_pi,
                                    cfg.actuator.sample_rate, cfg.actuator.rise_tau),
            po=POConfig(cfg.controller.step, cfg.controller.dwell, cfg.controller.settle_samples,
                        cfg.controller.edge_drop),
            table=switching_table(splitter, cfg.device.input_core),
            input_core=cfg.device.input_core,
            tap_loss_db=cfg.monitor.tap_loss_db,
        )

    def amplitudes(self) -> np.ndarray:
        return self.impairments.amplitudes() * 10 ** (-self.tap_loss_db / 20)

    def powers(self, phases, amplitudes=None) -> np.ndarray:
        """Static output powers for total per-path phases."""
        amp = self.amplitudes() if amplitudes is None else np.asarray(amplitudes, dtype=float)
        m = self.splitter.entries
        z = amp * np.exp(1j * np.asarray(phases, dtype=float)) * (m @ unit_input(self.input_core))
        return output_powers(m @ z)

    def routed_power(self, target: int) -> float:
        return float(self.powers(self.table[target])[target])


@dataclass
class ScenarioResult:
    name: str
    report: MetricsReport
    trace: PowerTrace | None = None
    fine_trace: PowerTrace | None = None
    tables: dict = field(default_factory=dict)  # name -> {column: 1-D array}


def _initial_theta(cfg: ScenarioConfig, seed: int) -> np.ndarray:
    if cfg.drift.initial == "aligned":
        return np.zeros(N_PATHS)
    return np.random.default_rng([seed, 1]).uniform(0.0, 2 * np.pi, N_PATHS)


def _run_kernel(cfg: ScenarioConfig, dev: Device, schedule, n_ctrl: int, *, seed: int, n_sub: int,
                block: int = 1, fine_window=(0, 0), static_phase=None, diffusion=None,
                theta0=None) -> KernelResult:
    a = dev.actuator
    return simulate(
        mbs=dev.splitter.entries,
        amplitudes=dev.amplitudes(),
        static_phase=np.zeros(N_PATHS) if static_phase is None else static_phase,
        theta0=_initial_theta(cfg, seed) if theta0 is None else theta0,
        diffusion=cfg.drift.diffusion if diffusion is None else diffusion,
        seed=seed,
        table=dev.table,
        schedule=schedule,
        n_ctrl=n_ctrl,
        sample_period=a.sample_period,
        n_sub=n_sub,
        rise_tau=a.rise_tau,
        v_pi=a.v_pi,
        v_max=a.v_max,
        n_codes=a.n_codes,
        po_step_rad=dev.po.step,
        dwell=dev.po.dwell,
        settle_samples=dev.po.settle_samples,
        edge_drop=dev.po.edge_drop,
        responsivity=cfg.monitor.responsivity,
        input_field=unit_input(dev.input_core),
        block=block,
        fine_window=fine_window,
    )


def coarse_trace(res: KernelResult, sample_period: float) -> PowerTrace:
    idx = np.arange(res.coarse.shape[0]) * res.block
    return PowerTrace(idx * sample_period, res.coarse.T, res.coarse_target, idx)


def fine_trace(res: KernelResult, sample_period: float) -> PowerTrace | None:
    n = res.fine.shape[0]
    if n == 0:
        return None
    k = np.arange(n)
    s = res.fine_lo + k // res.n_sub
    t = (res.fine_lo * res.n_sub + k + 1) * (sample_period / res.n_sub)
    return PowerTrace(t, res.fine.T, res.fine_target, s)


def _samples(seconds: float, a: ActuatorConfig) -> int:
    return int(round(seconds * a.sample_rate))


def _db(x):
    return 10 * np.log10(x)


def _target_metrics(p_mean: np.ndarray, target: int) -> dict:
    """Extinction and adjacent-core IC-XT from time-averaged powers."""
    others = [j for j in range(N_PATHS) if j != target]
    adj = adjacent_cores(target)
    return {
        "extinction_db": extinction_ratio(p_mean[target], p_mean[others].mean()),
        "ic_xt_adjacent_db": [ic_xt(p_mean[target], p_mean[j]) for j in adj],
        "insertion_loss_db": insertion_loss(1.0, p_mean[target]),
    }


def run_stabilization(cfg: ScenarioConfig) -> ScenarioResult:
    """Free-running interval followed by perturb-and-observe stabilization."""
    dev = Device.from_config(cfg)
    sc, a = cfg.scenario, dev.actuator
    block = sc.record_block
    n_ctrl = max(block, int(round(_samples(sc.duration_s, a) / block)) * block)
    free = min(_samples(sc.free_running_s, a), n_ctrl)
    tgt = sc.target_core
    schedule = [(0, HOLD, tgt)] if free > 0 else []
    if free < n_ctrl:
        schedule.append((free, TRACK, tgt))
    res = _run_kernel(cfg, dev, schedule, n_ctrl, seed=sc.seed, n_sub=sc.oversample, block=block)
    trace = coarse_trace(res, a.sample_period)

    p_max = dev.routed_power(tgt)
    start = free + _samples(sc.settle_s, a)
    post = trace.control_sample_index >= start
    pre = trace.control_sample_index + block <= free
    rep = MetricsReport()
    extra = {"routed_power_ideal": p_max}
    if np.any(pre):
        norm = trace.p[tgt, pre] / p_max
        extra["free_running_min_norm"] = float(norm.min())
        extra["free_running_max_norm"] = float(norm.max())
        pm = trace.p[:, pre].mean(axis=1)
        extra["extinction_pre_db"] = extinction_ratio(pm[tgt], np.delete(pm, tgt).mean()) \
            if pm[tgt] >= np.delete(pm, tgt).mean() else float("nan")
    if np.any(post):
        pm = trace.p[:, post].mean(axis=1)
        m = _target_metrics(pm, tgt)
        rep.extinction_db = m["extinction_db"]
        rep.insertion_loss_db = m["insertion_loss_db"]
        for j in range(N_PATHS):
            if j != tgt:
                rep.ic_xt_db[tgt, j] = ic_xt(pm[tgt], pm[j])
        blocks = trace.p[:, post]
        per_block = np.array([_db(blocks[j] / blocks[tgt]) for j in adjacent_cores(tgt)])
        extra.update(
            ic_xt_mean_db=float(np.mean(m["ic_xt_adjacent_db"])),
            ic_xt_min_db=float(per_block.min()),
            ic_xt_max_db=float(per_block.max()),
            stabilized_norm=float(pm[tgt] / p_max),
        )
    rep.extra = extra
    return ScenarioResult("stabilize", rep, trace)


def run_switching(cfg: ScenarioConfig) -> ScenarioResult:
    """Lock on the first core, then step round-robin through all cores."""
    dev = Device.from_config(cfg)
    sw, a = cfg.switching, dev.actuator
    n_ctrl = _samples(sw.duration_s, a)
    lock = _samples(sw.lock_s, a)
    period = sw.period_samples
    first = cfg.scenario.target_core
    schedule = [(0, TRACK, first)]
    for i, s in enumerate(range(lock, n_ctrl, period)):
        schedule.append((s, TRACK, (first + i + 1) % N_PATHS))
    lo, hi = lock - 2 * period, min(n_ctrl, lock + sw.record_samples)
    res = _run_kernel(cfg, dev, schedule, n_ctrl, seed=cfg.scenario.seed, n_sub=sw.oversample,
                      fine_window=(max(lo, 0), hi))
    ft = fine_trace(res, a.sample_period)
    trace = coarse_trace(res, a.sample_period)

    T = a.sample_period
    rises, flyback, dwells = [], [], []
    for i, s in enumerate(range(lock, hi - 2 * period, period)):
        core = (first + i + 1) % N_PATHS
        dwells.append(core_dwell(ft, core, s * T, (s + 2 * period) * T))
        try:
            rises.append(rise_time_10_90(ft, core, t_start=s * T, t_stop=(s + period) * T))
        except MetricError:
            continue
        flyback.append(bool(res.flyback[s - res.fine_lo]))
    rises, flyback, dwells = np.array(rises), np.array(flyback, dtype=bool), np.array(dwells)
    rep = MetricsReport()
    # transitions where a path command crosses the DAC range edge swing
    # the long way round and run slower; the median is the typical switch
    rep.rise_time_s = float(np.median(rises)) if rises.size else float("nan")
    on = []
    off = []
    for s in range(lock + period, hi - period, period):
        seg = ft.window(s * T + 0.75 * period * T, (s + period) * T)
        core = int(seg.target_core[0])
        on.append(seg.p[core].mean())
        off.append(np.delete(seg.p, core, axis=0).mean())
    if on:
        rep.extinction_db = extinction_ratio(float(np.mean(on)), float(np.mean(off)))
    nan = float("nan")
    rep.extra = {
        "period_samples": period,
        "commanded_dwell_s": period * T,
        "dwell_mean_s": float(dwells.mean()) if dwells.size else nan,
        "dwell_max_error_s": float(np.max(np.abs(dwells - period * T))) if dwells.size else nan,
        "n_transitions": int(rises.size),
        "rise_time_mean_s": float(rises.mean()) if rises.size else nan,
        "rise_time_max_s": float(rises.max()) if rises.size else nan,
        "n_rise_over_0p7us": int(np.count_nonzero(rises > 0.7e-6)),
        "n_long_swing_transitions": int(np.count_nonzero(flyback)),
        "usable_window_s": period * T - rep.rise_time_s,
    }
    return ScenarioResult("switch", rep, trace, ft)


def _stabilized_core_powers(cfg: ScenarioConfig, dev: Device, target: int, seconds: float,
                            seed: int, static_phase=None):
    """Short locked run on ``target``; mean powers over its second half."""
    a = dev.actuator
    n = max(_samples(seconds, a), 2)
    res = _run_kernel(cfg, dev, [(0, TRACK, target)], n, seed=seed, n_sub=cfg.scenario.oversample,
                      static_phase=static_phase)
    return res, res.coarse[n // 2:].mean(axis=0)


def settled_phases(dev: Device, res: KernelResult, target: int) -> np.ndarray:
    """Realized modulator phases once the last command has settled.

    An unevaluated perturbation still pending at the end of the run is
    removed, so the result is the controller's operating point.
    """
    corr = res.correction.copy()
    if res.po_state[PENDING] > 0:
        k = int(res.po_state[ACTIVE])
        corr[k] -= res.direction[k] * dev.po.step
    return codes_to_phase(command_codes(dev.table[target] + corr, dev.actuator), dev.actuator)


def run_ber_sweep(cfg: ScenarioConfig, power_grid_dbm=None) -> ScenarioResult:
    """Back-to-back and per-core BER curves with crosstalk penalties."""
    b = cfg.ber
    t = cfg.transceiver
    tcfg = ber_mod.TransceiverConfig(t.bit_rate, t.prbs_order, t.sensitivity_dbm, t.extinction_tx, t.q_ref)
    if power_grid_dbm is None:
        n = int(round((b.power_max_dbm - b.power_min_dbm) / b.power_step_db)) + 1
        power_grid_dbm = b.power_min_dbm + b.power_step_db * np.arange(n)
    grid = np.asarray(power_grid_dbm, dtype=float)
    if grid.size == 0:
        raise ContractError("power grid is empty")

    dev = Device.from_config(cfg)
    b2b = ber_mod.ber_curve(grid, tcfg)
    s_b2b = ber_mod.curve_crossing_dbm(b2b, 1e-9)
    curves = {"power_dbm": grid, "ber_b2b": np.array([p.ber for p in b2b])}
    rep = MetricsReport()
    extra = {"sensitivity_b2b_dbm": s_b2b}
    penalties = []
    for core in range(N_PATHS):
        _, pm = _stabilized_core_powers(cfg, dev, core, b.stabilize_s, cfg.scenario.seed)
        for j in range(N_PATHS):
            if j != core:
                rep.ic_xt_db[core, j] = ic_xt(pm[core], pm[j])
        xt = float(np.mean([rep.ic_xt_db[core, j] for j in adjacent_cores(core)]))
        pen_model = ber_mod.crosstalk_penalty(xt)
        curve = ber_mod.ber_curve(grid, tcfg, pen_model)
        pen = ber_mod.curve_crossing_dbm(curve, 1e-9) - s_b2b
        penalties.append(pen)
        curves[f"ber_core{core + 1}"] = np.array([p.ber for p in curve])
        extra[f"ic_xt_core{core + 1}_db"] = xt
        extra[f"penalty_core{core + 1}_db"] = pen
    extra["penalty_mean_db"] = float(np.mean(penalties))

    bits = ber_mod.prbs_generate(t.prbs_order, b.prbs_seed, b.mc_bits)
    mc_rows = []
    for i, target in enumerate(b.mc_targets):
        p_rx = ber_mod.required_power_dbm(target, tcfg)
        errors, mc = ber_mod.monte_carlo_ber(bits, p_rx, tcfg, seed=cfg.scenario.seed + i)
        expected = ber_mod.analytic_ber(p_rx, tcfg)
        sigma = np.sqrt(expected * (1 - expected) / bits.size)
        mc_rows.append((p_rx, expected, mc, errors, (mc - expected) / sigma))
    mc_cols = ("received_dbm", "ber_analytic", "ber_monte_carlo", "errors", "z_score")
    mc = np.array(mc_rows, dtype=float).reshape(-1, len(mc_cols))
    tables = {"curves": curves, "monte_carlo": {c: mc[:, i] for i, c in enumerate(mc_cols)}}
    extra["mc_max_abs_z"] = float(np.max(np.abs([r[4] for r in mc_rows]))) if mc_rows else float("nan")
    extra["mc_bits"] = int(bits.size)
    rep.extra = extra
    return ScenarioResult("ber-sweep", rep, tables=tables)


def run_wdm_sweep(cfg: ScenarioConfig, lambda_grid_nm=None) -> ScenarioResult:
    """Stabilize at the reference wavelength, then sweep without re-locking.

    The probe wavelength sees the phases the controller holds for the
    reference; output powers are averaged over the last ``average_s`` of the
    locked run, as a slow power meter would.
    """
    w = cfg.wdm
    if lambda_grid_nm is None:
        n = int(round((w.lambda_max_nm - w.lambda_min_nm) / w.lambda_step_nm)) + 1
        lambda_grid_nm = w.lambda_min_nm + w.lambda_step_nm * np.arange(n)
    grid = np.asarray(lambda_grid_nm, dtype=float)
    if grid.size == 0 or grid.min() < 1527.0 - 1e-9 or grid.max() > 1569.0 + 1e-9:
        raise ContractError("wavelength grid must be non-empty and inside [1527, 1569] nm")
    dev = Device.from_config(cfg)
    a = dev.actuator
    tgt = cfg.scenario.target_core
    n = max(_samples(w.stabilize_s, a), 2)
    n_avg = min(max(_samples(w.average_s, a), 1), n // 2)
    res = _run_kernel(cfg, dev, [(0, TRACK, tgt)], n, seed=cfg.scenario.seed, n_sub=cfg.scenario.oversample,
                      fine_window=(n - n_avg, n))
    m = dev.splitter.entries
    path_in = dev.amplitudes() * (m @ unit_input(dev.input_core))
    vis = []
    for lam in grid:
        off = wavelength_phase_offsets(dev.impairments, lam * 1e-9, w.lambda_ref_nm * 1e-9)
        y = (path_in * np.exp(1j * (res.phase_log + off))) @ m.T
        p = output_powers(y).mean(axis=0)
        vis.append((p.max() - p.min()) / (p.max() + p.min()))
    vis = np.array(vis)
    coef = np.polyfit(grid, vis, 2)
    fit = np.polyval(coef, grid)
    ss_res = float(np.sum((vis - fit) ** 2))
    ss_tot = float(np.sum((vis - vis.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    band = (grid >= 1540.0) & (grid <= 1560.0)
    rep = MetricsReport(visibility=float(np.interp(w.lambda_ref_nm, grid, vis)))
    rep.extra = {
        "visibility_min_1540_1560": float(vis[band].min()) if np.any(band) else float("nan"),
        "visibility_mean_1540_1560": float(vis[band].mean()) if np.any(band) else float("nan"),
        "visibility_min": float(vis.min()),
        "quadratic_r2": r2,
        "quadratic_coef": [float(c) for c in coef],
    }
    return ScenarioResult("wdm-sweep", rep, tables={"visibility": {"lambda_nm": grid, "visibility": vis}})


def run_network(cfg: ScenarioConfig) -> ScenarioResult:
    """Two loopback links on two cores with a switch command mid-run."""
    if len(cfg.links) < 2:
        raise ContractError("network scenario needs at least two links")
    dev = Device.from_config(cfg)
    n_cfg, a = cfg.network, dev.actuator
    link_a, link_b = cfg.links[0], cfg.links[1]
    block = cfg.scenario.record_block
    n_ctrl = int(round(_samples(n_cfg.duration_s, a) / block)) * block
    sw = _samples(n_cfg.switch_time_s, a)
    schedule = [(0, TRACK, link_a.core), (sw, TRACK, link_b.core)]
    res = _run_kernel(cfg, dev, schedule, n_ctrl, seed=cfg.scenario.seed, n_sub=cfg.scenario.oversample,
                      block=block, fine_window=(sw - 4, sw + 8))
    trace = coarse_trace(res, a.sample_period)
    ft = fine_trace(res, a.sample_period)
    T = a.sample_period
    win = _samples(n_cfg.window_s, a)
    idx = trace.control_sample_index
    before = (idx >= sw - win) & (idx + block <= sw)
    after = (idx >= sw + block) & (idx < sw + block + win)
    p_before = trace.p[:, before].mean(axis=1)
    p_after = trace.p[:, after].mean(axis=1)

    rep = MetricsReport()
    extra = {}
    tcfg = ber_mod.TransceiverConfig(cfg.transceiver.bit_rate, cfg.transceiver.prbs_order,
                                     cfg.transceiver.sensitivity_dbm, cfg.transceiver.extinction_tx,
                                     cfg.transceiver.q_ref)
    for link, p_on, p_off in ((link_a, p_before, p_after), (link_b, p_after, p_before)):
        loss = link_loss_db(link)
        rx_on = n_cfg.launch_dbm + _db(p_on[link.core]) - loss
        rx_off = n_cfg.launch_dbm + _db(p_off[link.core]) - loss
        name = link.name
        extra[f"{name}_loss_db"] = loss
        extra[f"{name}_received_dbm"] = rx_on
        extra[f"{name}_ic_xt_db"] = rx_off - rx_on
        extra[f"{name}_ber"] = ber_mod.analytic_ber(rx_on, tcfg)
        extra[f"{name}_error_free"] = bool(extra[f"{name}_ber"] < 1e-12)
    extra["received_power_delta_db"] = extra[f"{link_a.name}_received_dbm"] - extra[f"{link_b.name}_received_dbm"]

    t_sw = sw * T
    new = ft.p[link_b.core]
    old = ft.p[link_a.core]
    final_new, start_new = new[-1], new[ft.t <= t_sw][-1]
    i90 = np.nonzero((ft.t >= t_sw) & (new >= start_new + 0.9 * (final_new - start_new)))[0]
    extra["switch_time_s"] = t_sw
    extra["transfer_time_s"] = float(ft.t[i90[0]] - t_sw) if i90.size else float("nan")
    extra["transfer_limit_s"] = T + 0.7e-6
    extra["old_core_residual_norm"] = float(old[-1] / old[ft.t <= t_sw][-1])
    rep.extra = extra
    return ScenarioResult("network", rep, trace, ft)


def run_fringe_characterization(cfg: ScenarioConfig, n_points: int | None = None) -> ScenarioResult:
    """Two-path fringes under a full-scale triangular drive and four-path on/off contrast."""
    dev = Device.from_config(cfg)
    a = dev.actuator
    n_codes = a.n_codes if n_points is None else n_points
    up = np.linspace(0, a.n_codes - 1, n_codes).round() * a.rad_per_code
    drive = np.concatenate([up, up[::-1]])
    amp = dev.amplitudes()
    rep = MetricsReport()
    two = {}
    columns = {"drive_rad": drive}
    for k in range(1, N_PATHS):
        mask = np.zeros(N_PATHS)
        mask[[0, k]] = 1.0
        fringe = np.empty((N_PATHS, drive.size))
        for i, ph in enumerate(drive):
            phases = np.zeros(N_PATHS)
            phases[k] = ph
            fringe[:, i] = dev.powers(phases, amp * mask)
        two[k] = [visibility(fringe[j]) for j in range(N_PATHS)]
        columns[f"path{k + 1}_core1"] = fringe[0]
    four = []
    on_off = np.array([dev.powers(dev.table[m]) for m in range(N_PATHS)])
    for core in range(N_PATHS):
        p_on = on_off[core, core]
        p_off = np.delete(on_off[:, core], core).mean()
        four.append((p_on - p_off) / (p_on + p_off))
    v2 = float(np.mean([v for vals in two.values() for v in vals]))
    rep.visibility = float(np.mean(four))
    rep.insertion_loss_db = insertion_loss(1.0, on_off[0, 0])
    rep.extra = {
        "two_path_visibility_mean": v2,
        "four_path_visibility_mean": float(np.mean(four)),
        **{f"two_path_visibility_path{k + 1}": float(np.mean(v)) for k, v in two.items()},
        **{f"four_path_visibility_core{c + 1}": float(v) for c, v in enumerate(four)},
    }
    return ScenarioResult("fringe", rep, tables={"fringes": columns})


def reference_powers(dev: Device, phases) -> np.ndarray:
    """Same quantity as :meth:`Device.powers` via the generic propagation path."""
    return output_powers(propagate(unit_input(dev.input_core), dev.splitter, phases,
                                   losses_db=dev.impairments.path_loss_db() + dev.tap_loss_db))


SCENARIOS = {
    "stabilize": run_stabilization,
    "switch": run_switching,
    "ber-sweep": run_ber_sweep,
    "wdm-sweep": run_wdm_sweep,
    "network": run_network,
}


def _run_named(name: str, cfg: ScenarioConfig) -> ScenarioResult:
    return SCENARIOS[name](cfg)


def run_seeds(name: str, cfg: ScenarioConfig, seeds, workers: int | None = None) -> list[ScenarioResult]:
    """Run one scenario for several seeds as independent processes.

    Results come back in the order of ``seeds``. With one worker (the
    default on a single-CPU host) everything runs inline.
    """
    cfgs = [cfg.with_seed(s) for s in seeds]
    workers = workers or os.cpu_count() or 1
    if workers == 1 or len(cfgs) <= 1:
        return [_run_named(name, c) for c in cfgs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_named, [name] * len(cfgs), cfgs))
