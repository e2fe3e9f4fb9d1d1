"""Calibrated default parameters and the fits that produce them.

The stored values in :data:`CALIBRATED` are outputs of the ``fit_*``
functions below, rounded and frozen so that defaults do not depend on a run.
They are model calibrations, not measurements. ``mcfswitch calibrate`` reruns
every fit and reports the results next to the stored values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, least_squares

from .controller import ActuatorConfig, actuate_timeline, switching_table
from .drift import DriftState, PathImpairments, drift_trajectory, wavelength_phase_offsets
from .field import N_PATHS, make_splitter, output_powers, propagate, unit_input
from .metrics import rise_time_10_90

# Reference figures the fits aim at.
TARGETS = {
    "extinction_db": 19.8,
    "ic_xt_mean_db": -16.25,
    "two_path_visibility": 0.97,
    "arm_loss_db": 3.3,
    "wdm_min_visibility": 0.994,
    "rise_time_s": 0.7e-6,
    "decorrelation_s": 1.0,
}

DELTA_LENGTH_PATTERN = (0.0, 1.0, -0.6, 0.3)

CALIBRATED = {
    "loss_db": (2.7875, 1.2163, 3.8447, 6.0468),
    "delta_length": (0.0, 2.76e-06, -1.656e-06, 8.28e-07),
    "diffusion": 0.98,
    "rise_tau": 3.186e-07,
}


@dataclass(frozen=True)
class FitResult:
    name: str
    value: object
    achieved: dict


def static_powers(splitter, imp: PathImpairments, phases, input_core: int = 0) -> np.ndarray:
    """Output powers of the device for a phase set (no drift, no dynamics)."""
    return output_powers(propagate(unit_input(input_core), splitter, phases, losses_db=imp.path_loss_db()))


def _relative_metrics(rel, splitter, table, target: int = 0):
    imp = PathImpairments(loss_db=tuple(-20 * np.log10(rel / rel.max())), splitter_loss_db=0.0)
    p = static_powers(splitter, imp, table[target])
    others = [j for j in range(N_PATHS) if j != target]
    er = 10 * np.log10(p[target] / p[others].mean())
    adj = [(target - 1) % N_PATHS, (target + 1) % N_PATHS]
    ic = float(np.mean(10 * np.log10(p[adj] / p[target])))
    v2 = float(np.mean([2 * rel[0] * rel[k] / (rel[0] ** 2 + rel[k] ** 2) for k in range(1, N_PATHS)]))
    return er, ic, v2


def fit_amplitudes(splitter_kind: str = "dft", targets: dict = TARGETS) -> FitResult:
    """Per-arm amplitude imbalance matching extinction, IC-XT and two-path visibility.

    Arm 0 is the amplitude reference. The fitted relative amplitudes are then
    scaled so their mean corresponds to the nominal arm loss.
    """
    splitter = make_splitter(splitter_kind)
    table = switching_table(splitter)

    def resid(x):
        er, ic, v2 = _relative_metrics(np.array([1.0, *x]), splitter, table)
        return [
            (er - targets["extinction_db"]) / 2.0,
            (ic - targets["ic_xt_mean_db"]) / 2.0,
            (v2 - targets["two_path_visibility"]) / 0.02,
        ]

    best = None
    for x0 in ([1.2, 1.0, 0.8], [0.8, 1.05, 1.2], [1.1, 0.9, 0.75]):
        sol = least_squares(resid, x0, bounds=([0.3] * 3, [2.0] * 3))
        if best is None or sol.cost < best.cost:
            best = sol
    rel = np.array([1.0, *best.x])
    amp = rel / rel.mean() * 10 ** (-targets["arm_loss_db"] / 20)
    loss_db = tuple(float(v) for v in np.round(-20 * np.log10(amp), 4))
    er, ic, v2 = _relative_metrics(rel, splitter, table)
    return FitResult("loss_db", loss_db, {"extinction_db": er, "ic_xt_mean_db": ic, "two_path_visibility": v2})


def wdm_visibility(imp: PathImpairments, splitter, lambdas_m, lambda_ref_m: float, target: int = 0,
                   phases=None) -> np.ndarray:
    """Max-to-min output-port visibility with phases frozen at ``lambda_ref_m``."""
    base = switching_table(splitter)[target] if phases is None else np.asarray(phases, dtype=float)
    out = []
    for lam in np.atleast_1d(lambdas_m):
        p = static_powers(splitter, imp, base + wavelength_phase_offsets(imp, lam, lambda_ref_m))
        out.append((p.max() - p.min()) / (p.max() + p.min()))
    return np.array(out)


def fit_delta_length(loss_db=CALIBRATED["loss_db"], splitter_kind: str = "dft",
                     target_min_v: float = TARGETS["wdm_min_visibility"],
                     band_nm=(1540.0, 1560.0), lambda_ref_nm: float = 1550.0,
                     pattern=DELTA_LENGTH_PATTERN) -> FitResult:
    """Scale of the arm length mismatch giving ``target_min_v`` across ``band_nm``."""
    splitter = make_splitter(splitter_kind)
    grid = np.linspace(band_nm[0], band_nm[1], 41) * 1e-9
    pat = np.asarray(pattern, dtype=float)

    def min_v(scale):
        imp = PathImpairments(loss_db=tuple(loss_db), delta_length=tuple(pat * scale))
        return wdm_visibility(imp, splitter, grid, lambda_ref_nm * 1e-9).min()

    v0 = min_v(0.0)
    if v0 <= target_min_v:
        raise ValueError(f"visibility {v0:.4f} at zero mismatch is already below the target")
    scale = brentq(lambda s: min_v(s) - target_min_v, 0.0, 1e-3, xtol=1e-12)
    scale = float(np.round(scale, 8))
    return FitResult("delta_length", tuple(float(v) for v in pat * scale),
                     {"scale_m": scale, "min_visibility": float(min_v(scale))})


def fit_rise_tau(target_rise: float = TARGETS["rise_time_s"], oversample: int = 1000) -> FitResult:
    """Actuator time constant whose simulated 10-90 % phase step matches ``target_rise``."""

    def rise(tau):
        cfg = ActuatorConfig(rise_tau=tau)
        codes = np.array([0] * 2 + [cfg.n_codes - 1] * 6)
        t, ph = actuate_timeline(codes, cfg, oversample=oversample)
        return rise_time_10_90((t, ph), t_start=2 * cfg.sample_period - t[1])

    tau = brentq(lambda x: rise(x) - target_rise, 0.05e-6, 1e-6, xtol=1e-13)
    tau = float(np.round(tau, 10))
    return FitResult("rise_tau", tau, {"rise_time_s": rise(tau), "ratio": target_rise / tau})


def fit_diffusion(loss_db=CALIBRATED["loss_db"], decorrelation_s: float = TARGETS["decorrelation_s"],
                  n_runs: int = 400, seed: int = 7, splitter_kind: str = "dft") -> FitResult:
    """Drift diffusion giving a free-running decorrelation time of ``decorrelation_s``.

    The aligned target-core power is simulated under unit diffusion for an
    ensemble of drift realizations. Its excess over the incoherent level
    decays exponentially; the fitted rate per unit diffusion sets the value.
    """
    splitter = make_splitter(splitter_kind)
    imp = PathImpairments(loss_db=tuple(loss_db))
    phases = switching_table(splitter)[0]
    dt, n = 0.01, 100
    c = splitter.entries[0, :] * (splitter.entries @ unit_input(0)) * imp.amplitudes() * np.exp(1j * phases)
    p0 = abs(c.sum()) ** 2
    p_inc = float(np.sum(abs(c) ** 2))
    acc = np.zeros(n)
    rng = np.random.default_rng(seed)
    for _ in range(n_runs):
        s = DriftState(np.zeros(N_PATHS), 1.0, int(rng.integers(2**31)))
        traj, _ = drift_trajectory(s, dt, n)
        acc += np.abs(np.exp(1j * traj) @ c) ** 2
    excess = (acc / n_runs - p_inc) / (p0 - p_inc)
    t = dt * np.arange(1, n + 1)
    keep = excess > 0.05
    rate = -np.polyfit(t[keep], np.log(excess[keep]), 1)[0]
    d = float(np.round(1.0 / (rate * decorrelation_s), 2))
    return FitResult("diffusion", d, {"rate_per_unit_diffusion": float(rate)})


def run_all(splitter_kind: str = "dft") -> dict[str, FitResult]:
    amp = fit_amplitudes(splitter_kind)
    return {
        "loss_db": amp,
        "delta_length": fit_delta_length(amp.value, splitter_kind),
        "rise_tau": fit_rise_tau(),
        "diffusion": fit_diffusion(amp.value, splitter_kind=splitter_kind),
    }
