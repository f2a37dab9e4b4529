"""Detection: ML antenna-set search for cell-edge users, SIC for NOMA users."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import UserChannel, effective_channels_all
from .errors import DimensionMismatch, RankOutOfRange
from .system import (
    AntennaSetCodebook,
    Constellation,
    PowerAllocation,
    superposed_constellation,
)


@dataclass(frozen=True)
class SetDecision:
    set_index: int
    metric_values: tuple


@dataclass(frozen=True)
class SicTrace:
    detected_symbols: tuple                 # decode order: largest alpha first
    residuals: tuple = field(repr=False)    # combined residual after each subtraction
    own_symbol: complex = 0j


def ml_antenna_set_detect(y, codebook: AntennaSetCodebook, ch: UserChannel,
                          snr_linear: float) -> SetDecision:
    """argmin_j || y - sqrt(rho'/M_a) h_j,eff ||^2 over the codebook.

    Constant-envelope hypothesis: snr_linear is the squared amplitude of the
    (noise-normalized) transmit signal.  Ties break to the lowest index.
    """
    y = np.asarray(y, dtype=complex).reshape(-1)
    if y.shape[0] != ch.m_r:
        raise DimensionMismatch(f"y has length {y.shape[0]}, channel m_r {ch.m_r}")
    m_a = len(codebook.sets[0])
    effs = effective_channels_all(ch, codebook)           # (m_r, n_h)
    amp = math.sqrt(snr_linear / m_a)
    metrics = np.sum(np.abs(y[:, None] - amp * effs) ** 2, axis=0)
    best = int(np.argmin(metrics))                         # argmin takes first minimum
    return SetDecision(set_index=best, metric_values=tuple(float(m) for m in metrics))


def joint_set_symbol_detect(y, codebook: AntennaSetCodebook, ch: UserChannel,
                            alloc: PowerAllocation, total_power: float,
                            mod_order: int) -> SetDecision:
    """Joint ML over (antenna set, superposed symbol) hypotheses.

    Unlike the constant-envelope detector this stays exact when the radiated
    symbol X is a modulated superposition, so it is what the link-level
    campaigns use whenever the envelope fluctuates.
    """
    y = np.asarray(y, dtype=complex).reshape(-1)
    if y.shape[0] != ch.m_r:
        raise DimensionMismatch(f"y has length {y.shape[0]}, channel m_r {ch.m_r}")
    m_a = len(codebook.sets[0])
    effs = effective_channels_all(ch, codebook)            # (m_r, n_h)
    values, _ = superposed_constellation(mod_order, alloc, total_power)
    hyp = effs[:, :, None] * (values[None, None, :] / math.sqrt(m_a))
    metrics = np.sum(np.abs(y[:, None, None] - hyp) ** 2, axis=0)   # (n_h, n_sym)
    per_set = metrics.min(axis=1)
    best = int(np.argmin(per_set))
    return SetDecision(set_index=best, metric_values=tuple(float(m) for m in per_set))


def demap_set_to_bits(decision: SetDecision, codebook: AntennaSetCodebook) -> str:
    return codebook.labels[decision.set_index]


def _mrc_combine(y: np.ndarray, h_eff: np.ndarray) -> complex:
    energy = float(np.sum(np.abs(h_eff) ** 2))
    if energy == 0.0:
        raise DimensionMismatch("effective channel has zero energy")
    return complex(np.vdot(h_eff, y) / energy)


def sic_detect(y, user_rank: int, h_eff, alloc: PowerAllocation,
               total_power: float, mod_order: int) -> SicTrace:
    """Successive interference cancellation down to the user's own layer.

    Layers are decoded in decreasing-alpha order (layer N first).  Each layer
    is ML-detected on its scaled constellation treating the not-yet-decoded
    layers as noise, reconstructed and subtracted.  Receive branches are
    maximal-ratio combined before slicing.
    """
    n = len(alloc)
    if not 1 <= user_rank <= n:
        raise RankOutOfRange(f"user_rank {user_rank} not in 1..{n}")
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    h = np.atleast_1d(np.asarray(h_eff, dtype=complex))
    if y.shape != h.shape:
        raise DimensionMismatch(f"y shape {y.shape} != h_eff shape {h.shape}")
    const = Constellation(mod_order)
    amps = np.sqrt(np.asarray(alloc.alphas) * total_power)

    z = _mrc_combine(y, h)
    detected = []
    residuals = []
    for layer in range(n, user_rank, -1):
        idx = int(np.argmin(np.abs(z - amps[layer - 1] * const.points) ** 2))
        x_hat = const.points[idx]
        detected.append(complex(x_hat))
        z = z - amps[layer - 1] * x_hat
        residuals.append(z * h)     # residual mapped back through the channel
    own_idx = int(np.argmin(np.abs(z - amps[user_rank - 1] * const.points) ** 2))
    return SicTrace(detected_symbols=tuple(detected),
                    residuals=tuple(residuals),
                    own_symbol=complex(const.points[own_idx]))


def joint_ml_symbols(y, h_eff, alloc: PowerAllocation, total_power: float,
                     mod_order: int) -> tuple:
    """Exhaustive joint ML over all M^N symbol tuples; oracle for sic_detect."""
    y = np.atleast_1d(np.asarray(y, dtype=complex))
    h = np.atleast_1d(np.asarray(h_eff, dtype=complex))
    values, indices = superposed_constellation(mod_order, alloc, total_power)
    const = Constellation(mod_order)
    metrics = np.sum(np.abs(y[None, :] - values[:, None] * h[None, :]) ** 2, axis=1)
    best = indices[int(np.argmin(metrics))]
    return tuple(complex(const.points[i]) for i in best)
