"""Two-rate time-domain simulation kernel.

The optical field is evaluated ``n_sub`` times per control sample while the
controller, the DAC and the drift advance once per control sample. The loop
is compiled with numba; :func:`simulate` is the Python-facing wrapper that
feeds it drift increments chunk by chunk from a numpy ``Generator``.

Per-path fields are split into a static part (paths whose realized phase has
reached its DAC command) and a moving part. Only moving paths are evaluated at
fine resolution. Small phase increments use a seventh-order series for
``exp(i x)``, accurate to ~3e-13 for ``|x| <= 0.1``.

Outside the recorded window only the per-sample mean power is needed. All
moving residuals shrink by the same factor per fine step, so the sample means
of ``exp(i x0 d^f)`` (single paths and path pairs alike) follow from one power
series in ``x0`` with precomputed geometric sums ``mean_f d^(p f)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .controller import LAST, N_SLOTS, PENDING, REFLECTED, SETTLE, command_phase, po_core, po_retarget

HOLD = 0
TRACK = 1
SNAP_TOL = 1e-5
SERIES_MAX = 0.1
MEAN_ORDER = 9
CHUNK = 1 << 16
RESYNC = 4096

# integer kernel state slots
SEG, MODE, TARGET, BLK_COUNT, BLK_IDX, SAMPLE, DIRTY = range(7)


@njit(cache=True, inline="always")
def _cis(x):
    if abs(x) <= SERIES_MAX:
        x2 = x * x
        c = 1.0 - x2 * (0.5 - x2 * (1.0 / 24.0 - x2 * (1.0 / 720.0)))
        s = x * (1.0 - x2 * (1.0 / 6.0 - x2 * (1.0 / 120.0 - x2 * (1.0 / 5040.0))))
        return complex(c, s)
    return complex(np.cos(x), np.sin(x))


@njit(cache=True, inline="always")
def _mean_cis(x0, gsum):
    # mean over f of exp(i x0 d^f), given gsum[p] = mean over f of d^(p f)
    tot = complex(gsum[0], 0.0)
    term = complex(1.0, 0.0)
    for p in range(1, gsum.shape[0]):
        term *= complex(0.0, x0 / p)
        tot += term * gsum[p]
    return tot


@njit(cache=True, inline="always")
def _sample_means(e, moving, n_moving, n_sub, decay, zf, zbar, pair):
    for m in range(n_moving):
        k = moving[m]
        zbar[m] = 0.0
        for f in range(n_sub):
            e[k] *= decay
            zf[m, f] = _cis(e[k])
            zbar[m] += zf[m, f]
        zbar[m] /= n_sub
    for a in range(n_moving):
        for b in range(a + 1, n_moving):
            t = 0.0j
            for f in range(n_sub):
                t += zf[a, f].conjugate() * zf[b, f]
            pair[a, b] = t / n_sub


@njit(cache=True)
def _run_chunk(mbs, w, static_phase, theta, ph, inc, n_steps,
               table, seg_start, seg_mode, seg_target,
               n_sub, decay, gsum, decay_n, code_ph, v_pi, v_max, n_codes,
               corr, direction, edge, st, step, dwell, settle_samples, edge_drop,
               resp, block, fine_lo, fine_hi,
               ks, codes, prev_codes, cmd_cache, cq, r, blk,
               coarse, coarse_tgt, fine, fine_tgt, monitor, phase_log, flyback):
    n = 4
    rad_per_code = v_max / (n_codes - 1) * np.pi / v_pi
    half_lsb = 0.5 * rad_per_code
    half = n_codes // 2
    q = np.empty(n)
    e = np.empty(n)
    base = np.empty(n, dtype=np.complex128)
    ys = np.empty(n, dtype=np.complex128)
    y = np.empty(n, dtype=np.complex128)
    acc = np.empty(n)
    moving = np.empty(n, dtype=np.int64)
    zf = np.empty((n, n_sub), dtype=np.complex128)
    zbar = np.empty(n, dtype=np.complex128)
    pair = np.empty((n, n), dtype=np.complex128)
    n_seg = seg_start.shape[0]

    for i in range(n_steps):
        s = ks[SAMPLE]
        while ks[SEG] + 1 < n_seg and seg_start[ks[SEG] + 1] == s:
            ks[SEG] += 1
            new_mode = seg_mode[ks[SEG]]
            new_target = seg_target[ks[SEG]]
            if new_mode == TRACK and ks[MODE] != TRACK:
                st[PENDING] = 0.0
                st[LAST] = np.nan
                st[SETTLE] = 0.0
                st[REFLECTED] = 0.0
            if new_target != ks[TARGET] and new_mode == TRACK:
                po_retarget(corr, direction, st, step, settle_samples)
            ks[MODE] = new_mode
            ks[TARGET] = new_target
            ks[DIRTY] = 1
        target = ks[TARGET]

        if inc.shape[0] > 0:
            if s % RESYNC == 0:
                for k in range(n):
                    theta[k] += inc[i, k]
                    ph[k] = np.exp(1j * theta[k])
            else:
                for k in range(n):
                    theta[k] += inc[i, k]
                    ph[k] *= _cis(inc[i, k])

        wrapped = False
        if ks[DIRTY] != 0:
            for k in range(n):
                cmd = table[target, k] + corr[k]
                if cmd == cmd_cache[k] and prev_codes[k] >= 0:
                    continue
                cmd_cache[k] = cmd
                phi = command_phase(cmd, half_lsb)
                volts = min(max(phi * v_pi / np.pi, 0.0), v_max)
                c = np.int64(np.rint(volts / v_max * (n_codes - 1)))
                if prev_codes[k] >= 0 and abs(c - prev_codes[k]) > half:
                    wrapped = True
                if c != codes[k] or prev_codes[k] < 0:
                    codes[k] = c
                    cq[k] = w[k] * code_ph[c]
            ks[DIRTY] = 0
        for k in range(n):
            q[k] = codes[k] * rad_per_code
            if np.isnan(r[k]):
                r[k] = q[k]
            e[k] = r[k] - q[k]
            base[k] = cq[k] * ph[k]

        n_moving = 0
        for j in range(n):
            ys[j] = 0.0
        for k in range(n):
            if abs(e[k]) < SNAP_TOL or decay == 0.0:
                e[k] = 0.0
                for j in range(n):
                    ys[j] += mbs[j, k] * base[k]
            else:
                moving[n_moving] = k
                n_moving += 1

        record = fine_lo <= s < fine_hi
        if n_moving == 0 and not record:
            for j in range(n):
                acc[j] = ys[j].real * ys[j].real + ys[j].imag * ys[j].imag
        elif not record:
            # only the sample mean is needed: expand |ys + sum_m c_m z_m|^2
            # and average the phasor products over the fine steps
            e_max = 0.0
            for m in range(n_moving):
                e_max = max(e_max, abs(e[moving[m]]))
            if 2.0 * e_max * decay <= SERIES_MAX:
                for a in range(n_moving):
                    zbar[a] = _mean_cis(e[moving[a]], gsum)
                    for b in range(a + 1, n_moving):
                        pair[a, b] = _mean_cis(e[moving[b]] - e[moving[a]], gsum)
                for m in range(n_moving):
                    e[moving[m]] *= decay_n
            else:
                _sample_means(e, moving, n_moving, n_sub, decay, zf, zbar, pair)
            for j in range(n):
                tot = ys[j].real * ys[j].real + ys[j].imag * ys[j].imag
                for a in range(n_moving):
                    ca = mbs[j, moving[a]] * base[moving[a]]
                    tot += ca.real * ca.real + ca.imag * ca.imag
                    tot += 2.0 * (ys[j].conjugate() * ca * zbar[a]).real
                    for b in range(a + 1, n_moving):
                        cb = mbs[j, moving[b]] * base[moving[b]]
                        tot += 2.0 * (ca.conjugate() * cb * pair[a, b]).real
                acc[j] = tot
            for m in range(n_moving):
                k = moving[m]
                if abs(e[k]) < SNAP_TOL:
                    e[k] = 0.0
        else:
            for j in range(n):
                acc[j] = 0.0
            for f in range(n_sub):
                for j in range(n):
                    y[j] = ys[j]
                for m in range(n_moving):
                    k = moving[m]
                    e[k] *= decay
                    z = base[k] * _cis(e[k])
                    for j in range(n):
                        y[j] += mbs[j, k] * z
                for j in range(n):
                    pj = y[j].real * y[j].real + y[j].imag * y[j].imag
                    acc[j] += pj
                    fine[(s - fine_lo) * n_sub + f, j] = pj
                fine_tgt[(s - fine_lo) * n_sub + f] = target
            for j in range(n):
                acc[j] /= n_sub
            for m in range(n_moving):
                k = moving[m]
                if abs(e[k]) < SNAP_TOL:
                    e[k] = 0.0

        for k in range(n):
            r[k] = q[k] + e[k]
            prev_codes[k] = codes[k]
            if record:
                phase_log[s - fine_lo, k] = r[k] + theta[k] + static_phase[k]
        if record:
            flyback[s - fine_lo] = wrapped

        mon = resp * acc[target]
        monitor[s] = mon

        if ks[BLK_COUNT] == 0:
            coarse_tgt[ks[BLK_IDX]] = target
        for j in range(n):
            blk[j] += acc[j]
        ks[BLK_COUNT] += 1
        if ks[BLK_COUNT] == block:
            for j in range(n):
                coarse[ks[BLK_IDX], j] = blk[j] / block
                blk[j] = 0.0
            ks[BLK_COUNT] = 0
            ks[BLK_IDX] += 1

        if ks[MODE] == TRACK:
            po_core(mon, corr, direction, edge, st, step, dwell, wrapped, table[target], edge_drop, half_lsb)
            ks[DIRTY] = 1
        ks[SAMPLE] += 1


@dataclass
class KernelResult:
    """Raw kernel output. Powers are optical (linear, input power = 1)."""

    coarse: np.ndarray          # (n_blocks, 4) block means
    coarse_target: np.ndarray   # target core at block start
    fine: np.ndarray            # (n_fine, 4) every fine step inside the window
    fine_target: np.ndarray
    monitor: np.ndarray         # (n_ctrl,) monitor reading per control sample
    phase_log: np.ndarray       # (n_window, 4) total path phase at the end of each window sample
    flyback: np.ndarray         # (n_window,) a DAC command jumped by more than half its range
    theta: np.ndarray           # drift phases after the last sample
    realized: np.ndarray        # realized modulator phases after the last sample
    correction: np.ndarray
    direction: np.ndarray
    edge_clear: np.ndarray
    po_state: np.ndarray
    final_target: int
    block: int
    n_sub: int
    fine_lo: int


def simulate(*, mbs, amplitudes, static_phase, theta0, diffusion, seed, table, schedule,
             n_ctrl, sample_period, n_sub, rise_tau, v_pi, v_max, n_codes,
             po_step_rad, dwell, settle_samples, edge_drop=0.25, responsivity=1.0,
             input_field=None, block=1, fine_window=(0, 0), correction0=None) -> KernelResult:
    """Run ``n_ctrl`` control samples.

    ``schedule`` is a sequence of ``(start_sample, mode, target)`` with mode
    :data:`HOLD` (phases held, drift uncompensated) or :data:`TRACK`
    (perturb-and-observe active). The first entry must start at sample 0.
    Drift increments come from ``numpy.random.Generator(PCG64(seed))``, one
    row of four standard normals per control sample.
    """
    sched = sorted(schedule, key=lambda x: x[0])
    if not sched or sched[0][0] != 0:
        raise ValueError("schedule must start at sample 0")
    if n_ctrl % block:
        raise ValueError("n_ctrl must be a multiple of block")
    mbs = np.ascontiguousarray(mbs, dtype=np.complex128)
    if input_field is None:
        x = np.zeros(4, dtype=np.complex128)
        x[0] = 1.0
    else:
        x = np.asarray(input_field, dtype=np.complex128)
    static_phase = np.asarray(static_phase, dtype=float)
    w = (mbs @ x) * np.asarray(amplitudes, dtype=float) * np.exp(1j * static_phase)
    dt = sample_period / n_sub
    decay = float(np.exp(-dt / rise_tau)) if rise_tau > 0 else 0.0
    powers = decay ** np.outer(np.arange(MEAN_ORDER), np.arange(1, n_sub + 1))
    gsum = powers.mean(axis=1)
    rad_per_code = v_max / (n_codes - 1) * np.pi / v_pi
    code_ph = np.exp(1j * rad_per_code * np.arange(n_codes))
    lo, hi = (int(v) for v in fine_window)
    lo, hi = max(lo, 0), min(max(hi, lo), n_ctrl)
    n_fine = (hi - lo) * n_sub

    theta = np.array(theta0, dtype=float)
    ph = np.exp(1j * theta)
    corr = np.zeros(4) if correction0 is None else np.array(correction0, dtype=float)
    direction = np.ones(4, dtype=np.int64)
    st = np.zeros(N_SLOTS)
    st[0], st[LAST] = 1.0, np.nan
    edge = np.zeros(4, dtype=np.int64)
    ks = np.array([0, sched[0][1], sched[0][2], 0, 0, 0, 1], dtype=np.int64)
    codes = np.zeros(4, dtype=np.int64)
    prev_codes = np.full(4, -1, dtype=np.int64)
    cmd_cache = np.full(4, np.nan)
    cq = np.zeros(4, dtype=np.complex128)
    r = np.full(4, np.nan)
    blk = np.zeros(4)
    coarse = np.zeros((n_ctrl // block, 4))
    coarse_tgt = np.zeros(n_ctrl // block, dtype=np.int64)
    fine = np.zeros((n_fine, 4))
    fine_tgt = np.zeros(n_fine, dtype=np.int64)
    monitor = np.zeros(n_ctrl)
    phase_log = np.zeros((hi - lo, 4))
    flyback = np.zeros(hi - lo, dtype=np.bool_)

    sigma = np.sqrt(np.broadcast_to(np.asarray(diffusion, dtype=float), (4,)) * sample_period)
    drifting = bool(np.any(sigma > 0))
    rng = np.random.Generator(np.random.PCG64(seed))
    seg_start = np.array([s[0] for s in sched], dtype=np.int64)
    seg_mode = np.array([s[1] for s in sched], dtype=np.int64)
    seg_target = np.array([s[2] for s in sched], dtype=np.int64)
    table = np.ascontiguousarray(table, dtype=float)
    no_inc = np.zeros((0, 4))

    done = 0
    while done < n_ctrl:
        m = min(CHUNK, n_ctrl - done)
        inc = rng.standard_normal((m, 4)) * sigma if drifting else no_inc
        _run_chunk(
            mbs, w, static_phase, theta, ph, inc, m,
            table, seg_start, seg_mode, seg_target,
            int(n_sub), decay, gsum, decay ** n_sub, code_ph, float(v_pi), float(v_max), int(n_codes),
            corr, direction, edge, st, float(po_step_rad), int(dwell), float(settle_samples), float(edge_drop),
            float(responsivity), int(block), lo, hi,
            ks, codes, prev_codes, cmd_cache, cq, r, blk,
            coarse, coarse_tgt, fine, fine_tgt, monitor, phase_log, flyback,
        )
        done += m
    return KernelResult(coarse, coarse_tgt, fine, fine_tgt, monitor, phase_log, flyback, theta, r, corr, direction, edge, st,
                        int(ks[TARGET]), block, n_sub, lo)
