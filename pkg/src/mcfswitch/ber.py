"""On-off keyed transceiver: PRBS source, Gaussian-noise BER, crosstalk penalty."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.special import erfc, erfcinv

from .field import ContractError

# Maximal-length feedback taps (Fibonacci form), orders 7..37.
# The sequence obeys s[j] = XOR of s[j - t] over the listed t.
PRBS_TAPS = {
    7: (7, 6),
    8: (8, 6, 5, 4),
    9: (9, 5),
    10: (10, 7),
    11: (11, 9),
    12: (12, 6, 4, 1),
    13: (13, 4, 3, 1),
    14: (14, 5, 3, 1),
    15: (15, 14),
    16: (16, 15, 13, 4),
    17: (17, 14),
    18: (18, 11),
    19: (19, 6, 2, 1),
    20: (20, 17),
    21: (21, 19),
    22: (22, 21),
    23: (23, 18),
    24: (24, 23, 22, 17),
    25: (25, 22),
    26: (26, 6, 2, 1),
    27: (27, 5, 2, 1),
    28: (28, 25),
    29: (29, 27),
    30: (30, 6, 4, 1),
    31: (31, 28),
    32: (32, 22, 2, 1),
    33: (33, 20),
    34: (34, 27, 2, 1),
    35: (35, 33),
    36: (36, 25),
    37: (37, 5, 4, 3, 2, 1),
}

BER_FLOOR = 1e-300


@dataclass(frozen=True)
class TransceiverConfig:
    bit_rate: float = 1e9
    prbs_order: int = 15
    sensitivity_dbm: float = -24.0
    extinction_tx: float = 9.0
    q_ref: float = 6.0

    def __post_init__(self):
        if self.bit_rate <= 0:
            raise ContractError("bit_rate must be > 0")
        if self.prbs_order not in PRBS_TAPS:
            raise ContractError(f"prbs_order {self.prbs_order} outside [7, 37]")
        if self.extinction_tx <= 0:
            raise ContractError("extinction_tx must be > 0 dB")


@dataclass(frozen=True)
class BerPoint:
    received_power_dbm: float
    ber: float


@njit(cache=True)
def _lfsr_bits(taps, seed, n):
    out = np.empty(n, dtype=np.uint8)
    order = taps[0]
    mask = (np.int64(1) << order) - 1
    reg = np.int64(seed) & mask
    for j in range(n):
        bit = np.int64(0)
        for t in taps:
            bit ^= (reg >> (t - 1)) & 1
        out[j] = bit
        reg = ((reg << 1) | bit) & mask
    return out


def prbs_generate(order: int, seed: int, n_bits: int) -> np.ndarray:
    """``n_bits`` of the maximal-length sequence of the given order.

    ``seed`` is the initial register content; bit ``t-1`` of the register
    plays the role of ``s[j - t]``.
    """
    if order not in PRBS_TAPS:
        raise ContractError(f"PRBS order {order} not supported (7..37)")
    if seed % (1 << order) == 0:
        raise ContractError("PRBS seed must be non-zero in the low `order` bits")
    if n_bits < 0:
        raise ContractError("n_bits must be >= 0")
    taps = np.array(PRBS_TAPS[order], dtype=np.int64)
    return _lfsr_bits(taps, np.int64(seed), int(n_bits))


def q_factor(received_dbm, cfg: TransceiverConfig):
    return cfg.q_ref * 10.0 ** ((np.asarray(received_dbm, dtype=float) - cfg.sensitivity_dbm) / 20.0)


def ber_from_q(q):
    return 0.5 * erfc(np.asarray(q, dtype=float) / np.sqrt(2.0))


def analytic_ber(received_dbm, cfg: TransceiverConfig, penalty_db: float = 0.0):
    """Gaussian-noise OOK bit error rate at a received power (dBm).

    A sensitivity penalty shifts the curve to higher power.
    """
    r = np.asarray(received_dbm, dtype=float)
    if not np.all(np.isfinite(r)):
        raise ContractError("received power must be finite")
    ber = ber_from_q(q_factor(r - penalty_db, cfg))
    return float(ber) if ber.ndim == 0 else ber


def required_power_dbm(target_ber: float, cfg: TransceiverConfig, penalty_db: float = 0.0) -> float:
    """Received power at which the analytic curve hits ``target_ber``."""
    if not 0 < target_ber < 0.5:
        raise ContractError("target BER must lie in (0, 0.5)")
    q = np.sqrt(2.0) * erfcinv(2.0 * target_ber)
    return float(cfg.sensitivity_dbm + 20.0 * np.log10(q / cfg.q_ref) + penalty_db)


def crosstalk_penalty(ic_xt_db: float) -> float:
    """Power penalty (dB) of coherent in-band crosstalk closing the eye.

    ``penalty = -10 log10(1 - 2 sqrt(eps))`` with ``eps`` the crosstalk
    power ratio; the eye is closed at eps = 1/4 (about -6.02 dB).
    """
    if not ic_xt_db < 0:
        raise ContractError(f"crosstalk must be negative in dB, got {ic_xt_db}")
    closure = 2.0 * np.sqrt(10.0 ** (ic_xt_db / 10.0))
    if closure >= 1.0:
        raise ContractError(f"crosstalk {ic_xt_db} dB closes the eye completely")
    return float(-10.0 * np.log10(1.0 - closure))


def ber_curve(power_grid_dbm, cfg: TransceiverConfig, penalty_db: float = 0.0) -> list[BerPoint]:
    grid = np.sort(np.asarray(power_grid_dbm, dtype=float))
    if grid.size == 0:
        raise ContractError("power grid is empty")
    bers = np.atleast_1d(analytic_ber(grid, cfg, penalty_db))
    return [BerPoint(float(p), float(b)) for p, b in zip(grid, bers)]


def curve_crossing_dbm(curve: list[BerPoint], target_ber: float = 1e-9) -> float:
    """Power where a sampled BER curve crosses ``target_ber``.

    Interpolates ``log10(BER)`` linearly between the bracketing grid points.
    """
    p = np.array([pt.received_power_dbm for pt in curve])
    lb = np.log10(np.maximum([pt.ber for pt in curve], BER_FLOOR))
    goal = np.log10(target_ber)
    idx = np.nonzero((lb[:-1] >= goal) & (lb[1:] <= goal))[0]
    if idx.size == 0:
        raise ContractError(f"curve does not cross BER {target_ber}")
    i = idx[0]
    if lb[i] == lb[i + 1]:
        return float(p[i])
    return float(p[i] + (goal - lb[i]) * (p[i + 1] - p[i]) / (lb[i + 1] - lb[i]))


def monte_carlo_ber(bits, received_dbm: float, cfg: TransceiverConfig, seed: int,
                    penalty_db: float = 0.0, chunk: int = 1 << 20) -> tuple[int, float]:
    """Count decision errors for a bit pattern under Gaussian receiver noise.

    Mark and space levels follow the transmitter extinction ratio, the noise
    standard deviation is set so that ``(mark - space) / (2 sigma)`` equals the
    analytic Q at this power, and decisions use the mid-level threshold.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    n = bits.size
    if n == 0:
        raise ContractError("no bits given")
    q = float(q_factor(received_dbm - penalty_db, cfg))
    expected = float(ber_from_q(q))
    if n < 10.0 / max(expected, 1e-300):
        warnings.warn(
            f"{n} bits resolve BER {expected:.2e} poorly (fewer than 10 expected errors)",
            stacklevel=2,
        )
    mark = 1.0
    space = 10.0 ** (-cfg.extinction_tx / 10.0)
    thresh = 0.5 * (mark + space)
    sigma = (mark - space) / (2.0 * q) if q > 0 else np.inf
    rng = np.random.default_rng(seed)
    errors = 0
    for i in range(0, n, chunk):
        b = bits[i:i + chunk]
        level = np.where(b == 1, mark, space)
        if np.isinf(sigma):
            decided = rng.integers(0, 2, size=b.size).astype(np.uint8)
        else:
            decided = (level + sigma * rng.standard_normal(b.size) > thresh).astype(np.uint8)
        errors += int(np.count_nonzero(decided != b))
    return errors, errors / n
