"""Complex-field model of the four-path multicore-fiber Mach-Zehnder.

The device is two 4x4 multicore beam splitters with a diagonal phase stage
(and an optional per-path loss stage) in between::

    y = M_bs @ L @ M_theta @ M_bs @ x

Fields are plain complex numpy arrays of length 4. Power is ``|field|**2`` in
linear units, normalized so that a total input power of 1.0 is the 0 dB
reference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

N_PATHS = 4
TWO_PI = 2.0 * np.pi
UNITARY_TOL = 1e-12

KINDS = ("splitter", "phase-stage", "composed", "lossy")


class ContractError(ValueError):
    """Raised when an operation receives an input violating its contract."""


def field_vector(x) -> np.ndarray:
    """Validate and return a length-4 complex field vector."""
    v = np.asarray(x, dtype=complex)
    if v.shape != (N_PATHS,):
        raise ContractError(f"field vector must have shape (4,), got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ContractError("field vector has non-finite entries")
    return v


def phase_set(p) -> np.ndarray:
    """Validate four phases and wrap them into [0, 2pi)."""
    v = np.asarray(p, dtype=float)
    if v.shape != (N_PATHS,):
        raise ContractError(f"phase set must have 4 entries, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ContractError("phase set has non-finite entries")
    w = np.mod(v, TWO_PI)
    # np.mod can return exactly 2pi for tiny negative inputs
    w[w >= TWO_PI] = 0.0
    return w


def unitarity_error(m: np.ndarray) -> float:
    """Max-norm of ``M^H M - I``."""
    m = np.asarray(m)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


@dataclass(frozen=True)
class TransferMatrix:
    entries: np.ndarray
    kind: str

    def __post_init__(self):
        e = np.array(self.entries, dtype=complex)
        if e.shape != (N_PATHS, N_PATHS):
            raise ContractError(f"transfer matrix must be 4x4, got {e.shape}")
        if self.kind not in KINDS:
            raise ContractError(f"unknown transfer matrix kind {self.kind!r}")
        if self.kind in ("splitter", "phase-stage") and unitarity_error(e) >= UNITARY_TOL:
            raise ContractError(f"{self.kind} matrix is not unitary")
        if self.kind == "lossy":
            s = np.linalg.svd(e, compute_uv=False)
            if s.max() > 1.0 + UNITARY_TOL:
                raise ContractError("lossy matrix has gain (singular value > 1)")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    def __matmul__(self, other):
        if isinstance(other, TransferMatrix):
            kind = "composed"
            prod = self.entries @ other.entries
            if unitarity_error(prod) >= UNITARY_TOL:
                kind = "lossy"
            return TransferMatrix(prod, kind)
        return self.entries @ np.asarray(other)

    @property
    def is_unitary(self) -> bool:
        return unitarity_error(self.entries) < UNITARY_TOL


def make_dft_splitter() -> TransferMatrix:
    """Normalized 4-point DFT coupler: ``M[j, k] = exp(-2 pi i j k / 4) / 2``."""
    jk = np.outer(np.arange(N_PATHS), np.arange(N_PATHS))
    return TransferMatrix(np.exp(-2j * np.pi * jk / N_PATHS) / 2.0, "splitter")


def make_hadamard_splitter() -> TransferMatrix:
    """Sylvester Hadamard coupler ``H4 / 2`` (real, symmetric)."""
    h2 = np.array([[1.0, 1.0], [1.0, -1.0]])
    return TransferMatrix(np.kron(h2, h2) / 2.0, "splitter")


SPLITTERS = {
    "dft": make_dft_splitter,
    "hadamard": make_hadamard_splitter,
}


def make_splitter(kind: str) -> TransferMatrix:
    try:
        return SPLITTERS[kind]()
    except KeyError:
        raise ContractError(f"unknown splitter kind {kind!r}; expected one of {sorted(SPLITTERS)}") from None


def phase_stage(p) -> TransferMatrix:
    return TransferMatrix(np.diag(np.exp(1j * phase_set(p))), "phase-stage")


def loss_stage(losses_db) -> TransferMatrix:
    losses_db = np.asarray(losses_db, dtype=float)
    if losses_db.shape != (N_PATHS,) or np.any(losses_db < 0):
        raise ContractError("losses must be 4 non-negative dB values")
    kind = "lossy" if np.any(losses_db > 0) else "phase-stage"
    return TransferMatrix(np.diag(10.0 ** (-losses_db / 20.0)).astype(complex), kind)


def propagate(x, splitter: TransferMatrix, p, losses_db=None) -> np.ndarray:
    """Propagate input field ``x`` through the interferometer.

    Parameters
    ----------
    x : array_like, shape (4,)
        Complex input field per core.
    splitter : TransferMatrix
        Beam splitter used for both the splitting and recombining stage.
    p : array_like, shape (4,)
        Total phase per path in radians (drift plus modulator).
    losses_db : array_like, shape (4,), optional
        Per-path power loss, applied between the phase stage and the
        recombining splitter.

    Returns
    -------
    numpy.ndarray
        Complex output field per core.
    """
    x = field_vector(x)
    if not splitter.is_unitary:
        raise ContractError("splitter must be unitary")
    m = splitter.entries
    z = np.exp(1j * phase_set(p)) * (m @ x)
    if losses_db is not None:
        z = np.diag(loss_stage(losses_db).entries) * z
    return m @ z


def device_matrix(splitter: TransferMatrix, p, losses_db=None) -> TransferMatrix:
    """Full 4x4 transfer matrix of the device for a given phase set."""
    stages = phase_stage(p)
    if losses_db is not None:
        stages = loss_stage(losses_db) @ stages
    return splitter @ stages @ splitter


def output_powers(y) -> np.ndarray:
    y = np.asarray(y)
    return (y * y.conj()).real


def total_power(v) -> float:
    return float(np.sum(output_powers(v)))


def unit_input(core: int = 0) -> np.ndarray:
    x = np.zeros(N_PATHS, dtype=complex)
    x[core] = 1.0
    return x
