"""Digital phase controller: DAC quantization, perturb-and-observe, switching.

The perturb-and-observe update lives in :func:`po_core`, a numba kernel that
works on plain arrays. :func:`po_step` wraps it for the immutable
:class:`ControlLoopState`, and the scenario engine calls it directly inside
its time loop, so both routes share one implementation.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit
from scipy.signal import lfilter

from .field import (
    N_PATHS,
    TWO_PI,
    ContractError,
    TransferMatrix,
    make_dft_splitter,
    output_powers,
    phase_set,
    propagate,
    unit_input,
)

ROUTING_TOL = 1e-9
MODES = ("free-running", "stabilizing", "switching")

# scalar slots of the P&O bookkeeping array
ACTIVE, COUNT, LAST, PENDING, SETTLE, REFLECTED = range(6)
N_SLOTS = 6


class RoutingError(RuntimeError):
    pass


@dataclass(frozen=True)
class ActuatorConfig:
    dac_bits: int = 12
    v_max: float = 10.0
    v_pi: float = 5.0
    sample_rate: float = 0.8e6
    rise_tau: float = 0.3186e-6

    def __post_init__(self):
        if not 8 <= self.dac_bits <= 16:
            raise ContractError(f"dac_bits {self.dac_bits} outside [8, 16]")
        if self.v_pi <= 0 or self.v_max <= 0:
            raise ContractError("v_pi and v_max must be > 0")
        if self.sample_rate <= 0:
            raise ContractError("sample_rate must be > 0")
        if self.rise_tau < 0:
            raise ContractError("rise_tau must be >= 0")

    @property
    def n_codes(self) -> int:
        return 2**self.dac_bits

    @property
    def rad_per_code(self) -> float:
        return self.v_max / (self.n_codes - 1) * np.pi / self.v_pi

    @property
    def sample_period(self) -> float:
        return 1.0 / self.sample_rate


@dataclass(frozen=True)
class POConfig:
    """Perturb-and-observe tuning.

    ``step`` in rad, ``dwell`` in samples per path. ``edge_drop`` sets when
    the controller crosses the DAC range edge (see :func:`po_core`), in
    units of ``step**2`` relative power drop.
    """

    step: float = 0.05
    dwell: int = 2
    settle_samples: int = 1
    edge_drop: float = 0.25

    def __post_init__(self):
        if self.step <= 0 or self.dwell < 1 or self.settle_samples < 0 or self.edge_drop < 0:
            raise ContractError("invalid P&O configuration")


def quantize_phase(target: float, cfg: ActuatorConfig) -> tuple[int, float]:
    """Map a phase to the nearest DAC code; returns ``(code, realized_phase)``.

    Voltages outside ``[0, v_max]`` are clamped.
    """
    if not np.isfinite(target):
        raise ContractError("target phase must be finite")
    code = int(quantize_codes(np.array([target]), cfg)[0])
    return code, code * cfg.rad_per_code


def quantize_codes(targets, cfg: ActuatorConfig) -> np.ndarray:
    volts = np.clip(np.asarray(targets, dtype=float) * cfg.v_pi / np.pi, 0.0, cfg.v_max)
    return np.rint(volts / cfg.v_max * (cfg.n_codes - 1)).astype(np.int64)


def codes_to_phase(codes, cfg: ActuatorConfig) -> np.ndarray:
    return np.asarray(codes, dtype=float) * cfg.rad_per_code


@njit(cache=True)
def command_phase(x, half_lsb):
    """Wrap a phase command into the DAC range ``[-half_lsb, 2 pi - half_lsb)``.

    Phases within half a code below 2 pi quantize to code 0 rather than the
    top code, so a command never sits on the far end of the range for a
    value that is equivalent to zero.
    """
    phi = x % (2.0 * np.pi)
    if phi >= 2.0 * np.pi - half_lsb:
        phi -= 2.0 * np.pi
    return phi


def command_codes(phases, cfg: ActuatorConfig) -> np.ndarray:
    """DAC codes for wrapped phase commands (see :func:`command_phase`)."""
    h = 0.5 * cfg.rad_per_code
    wrapped = np.array([command_phase(float(x), h) for x in np.atleast_1d(phases)])
    return quantize_codes(wrapped, cfg)


@njit(cache=True)
def po_core(power, corr, direction, edge, st, step, dwell, wrapped, base, edge_drop, half_lsb):
    """One perturb-and-observe decision after observing ``power``.

    ``corr``, ``direction`` and ``edge`` are per-path arrays (path 0 is never
    touched); ``st`` holds the scalar slots named at module level; ``base``
    is the table row of the current target and ``half_lsb`` half a DAC code
    in rad. Arrays are updated in place.

    The command range spans exactly one period, so a perturbation across
    its edge drags the phase the long way round. Such a probe is reflected
    inward instead. Near an optimum a single path has relative curvature of
    at most 1/4, so an inward probe losing more than ``edge_drop * step**2``
    of the power means the optimum lies beyond the edge; the path is then
    cleared to cross on its next outward move.
    """
    n = corr.shape[0]
    active = int(st[ACTIVE])
    if st[SETTLE] > 0:
        if st[PENDING] > 0:
            corr[active] = (corr[active] - direction[active] * step) % (2.0 * np.pi)
        st[SETTLE] -= 1
        st[PENDING] = 0.0
        st[LAST] = np.nan
        st[REFLECTED] = 0.0
        return
    if wrapped:
        # actuator flyback: this sample and the slew tail in the next one
        # carry no usable gradient
        st[PENDING] = 0.0
        st[LAST] = np.nan
        st[SETTLE] = 1.0
        st[REFLECTED] = 0.0
        return
    if st[PENDING] > 0:
        if power < st[LAST]:
            direction[active] = -direction[active]
            if st[REFLECTED] > 0 and st[LAST] - power > edge_drop * step * step * st[LAST]:
                edge[active] = 1
        elif st[REFLECTED] > 0:
            edge[active] = 0
        st[COUNT] += 1
        if st[COUNT] >= dwell:
            st[COUNT] = 0
            active = active + 1
            if active >= n:
                active = 1
            st[ACTIVE] = active
    st[LAST] = power
    st[REFLECTED] = 0.0
    nxt = command_phase(base[active] + corr[active], half_lsb) + direction[active] * step
    if nxt < -half_lsb or nxt >= 2.0 * np.pi - half_lsb:
        if edge[active] > 0:
            edge[active] = 0
        else:
            direction[active] = -direction[active]
            st[REFLECTED] = 1.0
    corr[active] = (corr[active] + direction[active] * step) % (2.0 * np.pi)
    st[PENDING] = 1.0


@njit(cache=True)
def po_retarget(corr, direction, st, step, settle_samples):
    """Discard an unevaluated perturbation and blank the next samples."""
    active = int(st[ACTIVE])
    if st[PENDING] > 0:
        corr[active] = (corr[active] - direction[active] * step) % (2.0 * np.pi)
    st[PENDING] = 0.0
    st[LAST] = np.nan
    st[SETTLE] = settle_samples
    st[REFLECTED] = 0.0


def _dft_table() -> np.ndarray:
    m = np.arange(N_PATHS)
    return np.mod(TWO_PI * np.outer(m, m) / N_PATHS, TWO_PI)


def _is_dft(splitter: TransferMatrix) -> bool:
    return np.allclose(splitter.entries, make_dft_splitter().entries, atol=1e-14)


def switching_phases(target_core: int, splitter: TransferMatrix, input_core: int = 0) -> np.ndarray:
    """Modulator phases that route ``input_core`` to ``target_core``.

    Path 1 carries no modulator, so the set is normalized to zero phase
    there. The DFT splitter uses the closed-form table; other splitters use
    phase alignment of the four partial fields.
    """
    if not 0 <= target_core < N_PATHS:
        raise ContractError(f"target core {target_core} outside 0..3")
    if not splitter.is_unitary:
        raise ContractError("splitter must be unitary")
    if _is_dft(splitter) and input_core == 0:
        phases = _dft_table()[target_core]
    else:
        m = splitter.entries
        partial = m[target_core, :] * (m @ unit_input(input_core))
        if np.any(np.abs(partial) < 1e-12):
            raise RoutingError(f"path with no contribution to core {target_core}; not routable")
        phases = phase_set(-np.angle(partial) + np.angle(partial[0]))
    routed = output_powers(propagate(unit_input(input_core), splitter, phases))[target_core]
    if routed < 1.0 - ROUTING_TOL:
        raise RoutingError(f"splitter routes only {routed:.6f} of the power to core {target_core}")
    return phases


def switching_table(splitter: TransferMatrix, input_core: int = 0) -> np.ndarray:
    return np.array([switching_phases(m, splitter, input_core) for m in range(N_PATHS)])


@dataclass(frozen=True)
class ControlLoopState:
    """Controller state between two control samples.

    ``phi_c`` (the applied control phases) is the switching-table entry for
    the target core plus the perturb-and-observe correction.
    """

    table: np.ndarray
    actuator: ActuatorConfig = field(default_factory=ActuatorConfig)
    po: POConfig = field(default_factory=POConfig)
    target_core: int = 0
    mode: str = "stabilizing"
    correction: np.ndarray = field(default_factory=lambda: np.zeros(N_PATHS))
    direction: np.ndarray = field(default_factory=lambda: np.ones(N_PATHS, dtype=np.int64))
    edge_clear: np.ndarray = field(default_factory=lambda: np.zeros(N_PATHS, dtype=np.int64))
    po_phase_index: int = 1
    dwell_count: int = 0
    last_power: float = float("nan")
    pending: bool = False
    settle: int = 0
    reflected: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ContractError(f"unknown mode {self.mode!r}")
        if not 0 <= self.target_core < N_PATHS:
            raise ContractError("target core outside 0..3")
        corr = np.array(self.correction, dtype=float)
        if corr[0] != 0.0:
            raise ContractError("reference path carries no modulator; correction[0] must be 0")
        object.__setattr__(self, "correction", corr)
        object.__setattr__(self, "direction", np.array(self.direction, dtype=np.int64))
        object.__setattr__(self, "edge_clear", np.array(self.edge_clear, dtype=np.int64))
        object.__setattr__(self, "table", np.asarray(self.table, dtype=float))

    @property
    def phi_c(self) -> np.ndarray:
        return phase_set(self.table[self.target_core] + self.correction)

    @property
    def dac_codes(self) -> np.ndarray:
        return command_codes(self.table[self.target_core] + self.correction, self.actuator)

    @property
    def po_step(self) -> float:
        return self.po.step

    def _scalars(self) -> np.ndarray:
        return np.array(
            [self.po_phase_index, self.dwell_count, self.last_power, float(self.pending), self.settle,
             float(self.reflected)],
            dtype=float,
        )

    def _with(self, corr, direction, edge, st) -> "ControlLoopState":
        return replace(
            self,
            correction=corr,
            direction=direction,
            edge_clear=edge,
            po_phase_index=int(st[ACTIVE]),
            dwell_count=int(st[COUNT]),
            last_power=float(st[LAST]),
            pending=bool(st[PENDING]),
            settle=int(st[SETTLE]),
            reflected=bool(st[REFLECTED]),
        )


def initial_state(splitter: TransferMatrix, target_core: int = 0, **kwargs) -> ControlLoopState:
    return ControlLoopState(table=switching_table(splitter), target_core=target_core, **kwargs)


def _code_flyback(before, after, cfg: ActuatorConfig) -> bool:
    return bool(np.any(np.abs(np.asarray(after) - np.asarray(before)) > cfg.n_codes // 2))


def po_step(state: ControlLoopState, monitored_power: float) -> ControlLoopState:
    """Advance the controller by one control sample.

    ``monitored_power`` is the monitor reading for the target core over the
    sample that just ended; it is the only plant information used.
    """
    if state.mode == "free-running":
        raise ContractError("po_step requires a stabilizing or switching controller")
    corr = state.correction.copy()
    direction = state.direction.copy()
    st = state._scalars()
    # flyback detection compares the codes applied during the last sample
    # with those in force before its perturbation
    wrapped = False
    if state.pending:
        prev = corr.copy()
        prev[state.po_phase_index] -= direction[state.po_phase_index] * state.po.step
        before = command_codes(state.table[state.target_core] + prev, state.actuator)
        wrapped = _code_flyback(before, state.dac_codes, state.actuator)
    edge = state.edge_clear.copy()
    po_core(float(monitored_power), corr, direction, edge, st, state.po.step, state.po.dwell, wrapped,
            state.table[state.target_core], state.po.edge_drop, 0.5 * state.actuator.rad_per_code)
    return state._with(corr, direction, edge, st)


def command_target(state: ControlLoopState, target_core: int) -> ControlLoopState:
    """Select a new output core; P&O bookkeeping restarts after settling."""
    if not 0 <= target_core < N_PATHS:
        raise ContractError("target core outside 0..3")
    corr = state.correction.copy()
    direction = state.direction.copy()
    st = state._scalars()
    po_retarget(corr, direction, st, state.po.step, state.po.settle_samples)
    return replace(state._with(corr, direction, state.edge_clear.copy(), st), target_core=target_core)


def actuate_timeline(codes, cfg: ActuatorConfig, oversample: int = 10, initial=None):
    """Realized modulator phase on a fine time grid.

    Parameters
    ----------
    codes : array_like, shape (n_samples,) or (n_samples, k)
        DAC codes, one row per control sample.
    cfg : ActuatorConfig
    oversample : int
        Fine steps per control sample (>= 10).
    initial : array_like, optional
        Realized phase before the first sample; defaults to the first code.

    Returns
    -------
    t : numpy.ndarray
        Fine-grid times in seconds, ``n_samples * oversample`` points.
    phase : numpy.ndarray
        Realized phase at the end of every fine step.
    """
    if oversample < 10:
        raise ContractError("actuation needs at least 10 fine steps per control sample")
    held = np.repeat(codes_to_phase(codes, cfg), oversample, axis=0)
    dt = cfg.sample_period / oversample
    t = np.arange(held.shape[0]) * dt
    if cfg.rise_tau == 0:
        return t, held

    decay = np.exp(-dt / cfg.rise_tau)
    r0 = held[0] if initial is None else np.asarray(initial, dtype=float)
    # exact step-invariant discretization of a first-order lag:
    # r[n] = decay * r[n-1] + (1 - decay) * q[n]
    out, _ = lfilter([1.0 - decay], [1.0, -decay], held, axis=0, zi=np.asarray([r0 * decay]).reshape((1,) + held.shape[1:]))
    return t, out
