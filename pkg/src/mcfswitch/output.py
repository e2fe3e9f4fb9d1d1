"""Writing scenario results: CSV traces, CSV tables and the JSON report.

Files contain no timestamps or host details, so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import __version__
from .config import ScenarioConfig
from .metrics import PowerTrace
from .scenario import ScenarioResult

TRACE_COLUMNS = ("time_s", "p_core1", "p_core2", "p_core3", "p_core4", "target_core", "control_sample_index")
TRACE_FMT = ["%.9e"] * 5 + ["%d", "%d"]


def write_trace(trace: PowerTrace, path: Path) -> Path:
    """Trace rows: time, four output powers, target core (0-3) and control sample index."""
    n = trace.t.size
    target = np.zeros(n, dtype=np.int64) if trace.target_core is None else trace.target_core
    index = np.full(n, -1, dtype=np.int64) if trace.control_sample_index is None else trace.control_sample_index
    data = np.column_stack([trace.t, trace.p.T, target, index])
    np.savetxt(path, data, fmt=TRACE_FMT, delimiter=",", header=",".join(TRACE_COLUMNS), comments="")
    return path


def write_table(columns: dict, path: Path) -> Path:
    names = list(columns)
    data = np.column_stack([np.asarray(columns[c], dtype=float) for c in names])
    np.savetxt(path, data, fmt="%.9e", delimiter=",", header=",".join(names), comments="")
    return path


def calibrated_params(cfg: ScenarioConfig) -> dict:
    """Model parameters in effect that come from calibration fits."""
    return {
        "loss_db": list(cfg.impairments.loss_db),
        "delta_length_m": list(cfg.impairments.delta_length),
        "diffusion_rad2_per_s": cfg.drift.diffusion,
        "rise_tau_s": cfg.actuator.rise_tau,
    }


def build_report(result: ScenarioResult, cfg: ScenarioConfig, files: list[str] | None = None,
                 extra: dict | None = None) -> dict:
    rep = {
        "scenario": result.name,
        "version": __version__,
        "seed": cfg.scenario.seed,
        "config_hash": cfg.hash(),
        "metrics": result.report.to_record(),
        "calibrated_params": calibrated_params(cfg),
        "config": cfg.to_dict(),
        "files": sorted(files or []),
    }
    if extra:
        rep.update(extra)
    return rep


def dumps_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False, default=_json_default) + "\n"


def _json_default(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"not JSON serializable: {type(v).__name__}")


def write_result(result: ScenarioResult, cfg: ScenarioConfig, out_dir, extra: dict | None = None) -> dict:
    """Write every artifact of a scenario run into ``out_dir``; returns the report."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = result.name.replace("-", "_")
    files = []
    if result.trace is not None:
        files.append(write_trace(result.trace, out / f"{stem}_trace.csv").name)
    if result.fine_trace is not None:
        files.append(write_trace(result.fine_trace, out / f"{stem}_fine_trace.csv").name)
    for name, cols in result.tables.items():
        files.append(write_table(cols, out / f"{stem}_{name}.csv").name)
    report = build_report(result, cfg, files, extra)
    (out / f"{stem}_report.json").write_text(dumps_report(report))
    return report
