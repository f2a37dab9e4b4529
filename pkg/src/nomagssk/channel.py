"""Rayleigh flat-fading user channels and the AWGN link.

SNR convention: the pairwise error probability of the minimum-distance set
detector equals Q(sqrt(snr/M_a * |h_j,eff - h_k,eff|^2)) exactly, i.e. the
complex noise variance per receive antenna is N0 = P / (2 * snr).  This is
the Es/2N0 calibration implied by the closed-form union bound used in
analysis; see NoiseSpec.from_snr.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, InvalidGainTargets
from .system import SystemConfig, TransmitVector


class GainClass(str, Enum):
    CELL_CENTER = "cell_center"
    CELL_EDGE = "cell_edge"


CELL_CENTER_MIN_GAIN = 0.6
CELL_EDGE_MAX_GAIN = 0.4


@dataclass(frozen=True)
class UserChannel:
    """Per-user M_r x M_t complex channel with a gain-class tag."""

    matrix: np.ndarray = field(repr=False)
    gain_class: GainClass
    avg_gain: float

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=complex)
        if matrix.ndim != 2:
            raise DimensionMismatch("channel matrix must be 2-D (m_r x m_t)")
        if not np.all(np.isfinite(matrix)):
            raise InvalidGainTargets("channel matrix entries must be finite")
        object.__setattr__(self, "matrix", matrix)

    @property
    def m_r(self) -> int:
        return self.matrix.shape[0]

    @property
    def m_t(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class NoiseSpec:
    """AWGN description tied to the average receive SNR knob.

    variance is the total complex noise variance E|n|^2 per receive antenna.
    """

    variance: float
    snr_linear: float

    def __post_init__(self):
        # variance == 0 is allowed as the exact noiseless limit
        if self.variance < 0 or self.snr_linear <= 0:
            raise InvalidGainTargets("noise variance must be >= 0 and SNR > 0")

    @classmethod
    def from_snr(cls, snr_linear: float, signal_power: float = 1.0) -> "NoiseSpec":
        # N0 = P / (2*snr): matches the printed Q(sqrt(snr/M_a * |.|^2)) bound.
        return cls(variance=signal_power / (2.0 * snr_linear), snr_linear=snr_linear)


def classify_gain(gain: float) -> GainClass:
    return GainClass.CELL_CENTER if gain >= CELL_CENTER_MIN_GAIN else GainClass.CELL_EDGE


def draw_channel_matrix(rng: np.random.Generator, m_r: int, m_t: int,
                        gain: float) -> np.ndarray:
    """i.i.d. CN(0, gain^2) entries: per-entry RMS magnitude equals gain."""
    z = rng.standard_normal((2, m_r, m_t))
    return gain * (z[0] + 1j * z[1]) / math.sqrt(2)


def sample_user_channels(config: SystemConfig, gain_targets,
                         rng: np.random.Generator) -> list:
    """Draw one Rayleigh channel per user, strongest user first."""
    gains = [float(g) for g in gain_targets]
    n_users = config.n_noma + config.k_spatial
    if len(gains) != n_users:
        raise InvalidGainTargets(
            f"expected {n_users} gain targets, got {len(gains)}")
    if any(g <= 0 for g in gains):
        raise InvalidGainTargets("gain targets must be > 0")
    if any(b > a for a, b in zip(gains, gains[1:])):
        raise InvalidGainTargets("gain targets must be in decreasing order")
    channels = []
    for gain in gains:
        matrix = draw_channel_matrix(rng, config.m_r, config.m_t, gain)
        channels.append(UserChannel(matrix=matrix,
                                    gain_class=classify_gain(gain),
                                    avg_gain=gain))
    return channels


def apply_channel(tx: TransmitVector, ch: UserChannel, noise: NoiseSpec,
                  rng: np.random.Generator) -> np.ndarray:
    """y = H x + n with i.i.d. complex Gaussian noise of the given variance."""
    x = tx.entries
    if x.shape[0] != ch.m_t:
        raise DimensionMismatch(
            f"transmit vector length {x.shape[0]} != m_t {ch.m_t}")
    z = rng.standard_normal((2, ch.m_r))
    n = math.sqrt(noise.variance / 2.0) * (z[0] + 1j * z[1])
    return ch.matrix @ x + n


def effective_channel(ch: UserChannel, antenna_set) -> np.ndarray:
    """Sum of the channel columns named by the (1-based) antenna set."""
    for antenna in antenna_set:
        if not 1 <= antenna <= ch.m_t:
            raise IndexOutOfRange(f"antenna {antenna} not in 1..{ch.m_t}")
    cols = [a - 1 for a in antenna_set]
    return ch.matrix[:, cols].sum(axis=1)


def effective_channels_all(ch: UserChannel, codebook) -> np.ndarray:
    """Effective channel of every codebook set, shape (m_r, n_h)."""
    out = np.empty((ch.m_r, codebook.n_h), dtype=complex)
    for j, antenna_set in enumerate(codebook.sets):
        out[:, j] = effective_channel(ch, antenna_set)
    return out
