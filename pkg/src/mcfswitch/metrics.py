"""Figures of merit computed from simulated power traces."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .field import N_PATHS, ContractError


class MetricError(ValueError):
    """A metric is undefined for the given input."""


@dataclass(frozen=True)
class PowerTrace:
    """Per-core output power on a uniform time grid.

    ``p`` has shape (4, N) in linear units. ``target_core`` and
    ``control_sample_index`` are optional per-sample annotations used when
    the trace is written out.
    """

    t: np.ndarray
    p: np.ndarray
    target_core: np.ndarray | None = None
    control_sample_index: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 2 or p.shape[0] != N_PATHS or p.shape[1] != t.shape[0]:
            raise ContractError(f"trace power must be (4, {t.shape[0]}), got {p.shape}")
        if t.size > 1:
            dt = np.diff(t)
            if np.any(dt <= 0):
                raise ContractError("trace time must be strictly increasing")
            if not np.allclose(dt, dt[0], rtol=1e-6, atol=0.0):
                raise ContractError("trace time grid must be uniform")
        if np.any(p < 0):
            raise ContractError("trace powers must be >= 0")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "p", p)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    def __len__(self):
        return self.t.size

    def window(self, t0: float, t1: float) -> "PowerTrace":
        sel = (self.t >= t0) & (self.t < t1)
        pick = lambda a: None if a is None else a[sel]  # noqa: E731
        return PowerTrace(self.t[sel], self.p[:, sel], pick(self.target_core), pick(self.control_sample_index))


@dataclass
class MetricsReport:
    visibility: float = float("nan")
    ic_xt_db: np.ndarray = field(default_factory=lambda: np.full((N_PATHS, N_PATHS), np.nan))
    extinction_db: float = float("nan")
    insertion_loss_db: float = float("nan")
    rise_time_s: float = float("nan")
    extra: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        """Flatten to a single-level mapping of plain Python scalars."""
        rec = {k: v for k, v in asdict(self).items() if k not in ("ic_xt_db", "extra")}
        for i in range(N_PATHS):
            for j in range(N_PATHS):
                if i != j:
                    rec[f"ic_xt_db_{i + 1}_{j + 1}"] = self.ic_xt_db[i, j]
        rec.update(self.extra)
        return {k: _plain(v) for k, v in rec.items()}


def _plain(v):
    if isinstance(v, np.generic):
        v = v.item()
    if isinstance(v, float) and not np.isfinite(v):
        return None
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def _db(ratio):
    return 10.0 * np.log10(ratio)


def visibility(fringe, robust: bool = False) -> float:
    """Fringe visibility ``(Pmax - Pmin) / (Pmax + Pmin)``.

    ``fringe`` is a 1-D power series (or a single-core :class:`PowerTrace`
    row). With ``robust=True`` the 1st/99th percentiles replace min/max,
    which keeps drift-induced outliers from dominating.
    """
    p = np.asarray(fringe.p if isinstance(fringe, PowerTrace) else fringe, dtype=float).ravel()
    if p.size < 2:
        raise MetricError("visibility needs at least two samples")
    if robust:
        lo, hi = np.percentile(p, [1.0, 99.0])
    else:
        lo, hi = p.min(), p.max()
    if hi + lo <= 0 or hi - lo <= 1e-15 * max(hi, 1e-300):
        raise MetricError("visibility undefined for a constant trace")
    return float((hi - lo) / (hi + lo))


def ic_xt(p_selected: float, p_adjacent: float) -> float:
    """Inter-core crosstalk ``10 log10(P_adjacent / P_selected)`` in dB.

    Negative when the selected core dominates.
    """
    if not (p_selected > 0 and p_adjacent > 0):
        raise MetricError("IC-XT needs strictly positive powers")
    # difference of logs keeps ic_xt(a, b) == -ic_xt(b, a) exact
    return float(10.0 * np.log10(p_adjacent) - 10.0 * np.log10(p_selected))


def ic_xt_matrix(p_by_target) -> np.ndarray:
    """IC-XT for every (selected, other) pair.

    ``p_by_target[i]`` are the four output powers while core ``i`` is
    selected. Entry ``[i, j]`` is the crosstalk into core ``j``.
    """
    p = np.asarray(p_by_target, dtype=float)
    out = np.full((N_PATHS, N_PATHS), np.nan)
    for i in range(N_PATHS):
        if not np.all(np.isfinite(p[i])):
            continue
        for j in range(N_PATHS):
            if i != j and p[i, j] > 0 and p[i, i] > 0:
                out[i, j] = ic_xt(p[i, i], p[i, j])
    return out


def adjacent_cores(core: int) -> tuple[int, int]:
    """Nearest neighbours in the square four-core layout (ring order)."""
    return ((core - 1) % N_PATHS, (core + 1) % N_PATHS)


def adjacent_mask() -> np.ndarray:
    m = np.zeros((N_PATHS, N_PATHS), dtype=bool)
    for i in range(N_PATHS):
        for j in adjacent_cores(i):
            m[i, j] = True
    return m


def extinction_ratio(p_high: float, p_low: float) -> float:
    if not (p_low > 0 and p_high >= p_low):
        raise MetricError("extinction ratio needs p_high >= p_low > 0")
    return float(_db(p_high / p_low))


def insertion_loss(p_in: float, p_out: float) -> float:
    if not (p_in > 0 and p_out > 0):
        raise MetricError("insertion loss needs positive powers")
    return float(_db(p_in / p_out))


def _crossing(t, y, level, start):
    """First time at or after index ``start`` where ``y`` reaches ``level``."""
    above = np.nonzero(y[start:] >= level)[0]
    if above.size == 0:
        return None
    k = start + above[0]
    if k == 0 or y[k] == y[k - 1]:
        return t[k]
    return t[k - 1] + (level - y[k - 1]) * (t[k] - t[k - 1]) / (y[k] - y[k - 1])


def rise_time_10_90(trace, core: int = 0, t_start: float | None = None, t_stop: float | None = None) -> float:
    """10-90 % rise time of the first rising step of ``core``.

    The step amplitude is taken between the first and last sample of the
    analysed window, so the window should start on the low plateau and end
    on the high one. Crossing times are linearly interpolated.
    """
    if isinstance(trace, PowerTrace):
        t, y = trace.t, trace.p[core]
    else:
        t, y = (np.asarray(a, dtype=float) for a in trace)
    sel = np.ones(t.size, dtype=bool)
    if t_start is not None:
        sel &= t >= t_start
    if t_stop is not None:
        sel &= t <= t_stop
    t, y = t[sel], y[sel]
    if t.size < 3:
        raise MetricError("no step found: window too short")
    lo, hi = y[0], y[-1]
    if hi - lo <= 1e-12 * max(abs(hi), 1e-300):
        raise MetricError("no rising step found")
    t10 = _crossing(t, y, lo + 0.1 * (hi - lo), 0)
    i10 = np.searchsorted(t, t10)
    t90 = _crossing(t, y, lo + 0.9 * (hi - lo), max(i10 - 1, 0))
    if t10 is None or t90 is None:
        raise MetricError("no rising step found")
    return float(t90 - t10)


def dwell_segments(trace: PowerTrace, share: float = 0.5) -> np.ndarray:
    """Durations for which each output core stays selected.

    A core counts as selected from the first sample where it carries at
    least ``share`` of the total output power until another core does.
    Samples in between (mid-transition) extend the previous selection. The
    first and last runs are dropped since the window cuts them.
    """
    if not 0.25 < share <= 1.0:
        raise MetricError("share must lie in (0.25, 1]")
    tot = trace.p.sum(axis=0)
    frac = np.divide(trace.p, tot, out=np.zeros_like(trace.p), where=tot > 0)
    dom = np.where(frac.max(axis=0) >= share, np.argmax(frac, axis=0), -1)
    known = np.nonzero(dom >= 0)[0]
    if known.size == 0:
        return np.array([])
    # carry the last selected core through undecided samples
    fill = np.maximum.accumulate(np.where(dom >= 0, np.arange(dom.size), -1))
    dom = np.where(fill >= 0, dom[np.maximum(fill, 0)], -1)[known[0]:]
    change = np.nonzero(np.diff(dom))[0] + 1
    edges = np.concatenate([[0], change, [dom.size]])
    lengths = np.diff(edges) * trace.dt
    return lengths[1:-1]


def core_dwell(trace: PowerTrace, core: int, t_start: float, t_stop: float, share: float = 0.5) -> float:
    """Time within ``[t_start, t_stop)`` during which ``core`` carries at least ``share`` of the output."""
    if not 0 <= core < trace.p.shape[0]:
        raise MetricError(f"core {core} out of range")
    w = trace.window(t_start, t_stop)
    tot = w.p.sum(axis=0)
    held = w.p[core] >= share * tot
    return float(np.count_nonzero(held & (tot > 0)) * trace.dt)
