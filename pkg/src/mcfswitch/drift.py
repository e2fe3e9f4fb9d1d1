"""Environmental phase drift and static path impairments."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .field import N_PATHS, TWO_PI, ContractError, phase_set

BAND_MIN = 1.2e-6
BAND_MAX = 1.7e-6


def _fresh_rng_state(seed: int) -> dict:
    return np.random.Generator(np.random.PCG64(seed)).bit_generator.state


@dataclass(frozen=True)
class DriftState:
    """Per-path Wiener phase drift.

    The generator state is carried inside the value, so stepping is a pure
    function of ``(state, dt)`` and two states built from the same seed
    produce identical trajectories.
    """

    theta_n: np.ndarray
    diffusion: np.ndarray
    rng_seed: int
    rng_state: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "theta_n", phase_set(self.theta_n))
        d = np.broadcast_to(np.asarray(self.diffusion, dtype=float), (N_PATHS,)).copy()
        if np.any(d < 0) or not np.all(np.isfinite(d)):
            raise ContractError("diffusion must be finite and >= 0")
        object.__setattr__(self, "diffusion", d)
        if self.rng_state is None:
            object.__setattr__(self, "rng_state", _fresh_rng_state(self.rng_seed))

    def _generator(self) -> np.random.Generator:
        bg = np.random.PCG64()
        bg.state = self.rng_state
        return np.random.Generator(bg)


def step_drift(s: DriftState, dt: float) -> DriftState:
    """Advance the drift by ``dt`` seconds.

    Each path receives an independent N(0, diffusion * dt) increment.
    """
    if not dt > 0:
        raise ContractError(f"dt must be > 0, got {dt}")
    rng = s._generator()
    inc = rng.standard_normal(N_PATHS) * np.sqrt(s.diffusion * dt)
    return replace(s, theta_n=s.theta_n + inc, rng_state=rng.bit_generator.state)


def drift_trajectory(s: DriftState, dt: float, n_steps: int) -> tuple[np.ndarray, DriftState]:
    """Vectorized equivalent of ``n_steps`` calls to :func:`step_drift`.

    Returns the unwrapped phases after each step, shape ``(n_steps, 4)``,
    and the final state. The random stream is consumed in the same order as
    repeated single steps, so both routes agree sample for sample.
    """
    if not dt > 0:
        raise ContractError(f"dt must be > 0, got {dt}")
    rng = s._generator()
    inc = rng.standard_normal((n_steps, N_PATHS)) * np.sqrt(s.diffusion * dt)
    traj = s.theta_n + np.cumsum(inc, axis=0)
    end = replace(s, theta_n=traj[-1] if n_steps else s.theta_n, rng_state=rng.bit_generator.state)
    return traj, end


@dataclass(frozen=True)
class PathImpairments:
    """Static per-path imperfections of the interferometer arms.

    ``loss_db`` is the per-arm loss (modulator or reference pad);
    ``splitter_loss_db`` is the lumped DMUX/beam-splitter chain loss, applied
    once on the splitting side and once on the recombining side.
    """

    loss_db: tuple = (3.3, 3.3, 3.3, 3.3)
    delta_length: tuple = (0.0, 0.0, 0.0, 0.0)
    group_index: float = 1.468
    splitter_loss_db: float = 2.2

    def __post_init__(self):
        loss = np.asarray(self.loss_db, dtype=float)
        dl = np.asarray(self.delta_length, dtype=float)
        if loss.shape != (N_PATHS,) or dl.shape != (N_PATHS,):
            raise ContractError("loss_db and delta_length need 4 entries each")
        if np.any(loss < 0) or self.splitter_loss_db < 0:
            raise ContractError("losses must be >= 0 dB")
        if not np.all(np.isfinite(dl)):
            raise ContractError("delta_length must be finite")
        if not 1.0 <= self.group_index <= 2.0:
            raise ContractError(f"group_index {self.group_index} outside [1, 2]")
        object.__setattr__(self, "loss_db", tuple(float(v) for v in loss))
        object.__setattr__(self, "delta_length", tuple(float(v) for v in dl))

    def path_loss_db(self) -> np.ndarray:
        """Total loss seen by each arm, splitter chain included."""
        return np.asarray(self.loss_db) + 2.0 * self.splitter_loss_db

    def amplitudes(self) -> np.ndarray:
        return 10.0 ** (-self.path_loss_db() / 20.0)


def wavelength_phase_offsets(imp: PathImpairments, lam: float, lam_ref: float) -> np.ndarray:
    """Extra phase per arm at wavelength ``lam`` relative to ``lam_ref``.

    Returned unwrapped (radians); ``phi_i = 2 pi n_g dL_i (1/lam - 1/lam_ref)``.
    """
    for v in (lam, lam_ref):
        if not BAND_MIN <= v <= BAND_MAX:
            raise ContractError(f"wavelength {v} m outside [{BAND_MIN}, {BAND_MAX}]")
    dl = np.asarray(imp.delta_length)
    return TWO_PI * imp.group_index * dl * (1.0 / lam - 1.0 / lam_ref)
