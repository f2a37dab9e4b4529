"""Scenario configuration, antenna-set codebook, power allocation and encoding.

The transmitter superposes N power-domain user symbols into a single complex
symbol X = sum_i sqrt(alpha_i * P) * x_i and radiates X / sqrt(M_a) from the
M_a antennas named by the active index set.  The choice of index set carries
the cell-edge users' bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations, product

import numpy as np

from .errors import (
    DegenerateAllocation,
    IndexOutOfRange,
    InvalidAntennaConfig,
    LengthMismatch,
    UnsupportedOrder,
)


class Scheme(str, Enum):
    MIMO_NOMA = "mimo_noma"
    NOMA_SSK = "noma_ssk"
    NOMA_GSSK = "noma_gssk"


@dataclass(frozen=True)
class SystemConfig:
    """Full scenario description for one scheme."""

    m_t: int                     # total transmit antennas
    m_a: int                     # active transmit antennas
    m_r: int                     # receive antennas per user
    n_noma: int                  # power-domain users
    k_spatial: int               # spatial-domain (cell-edge) users
    total_power: float = 1.0     # total transmit power budget, linear watts
    mod_order: int = 4
    ftpa_beta: float = 0.4
    scheme: Scheme = Scheme.NOMA_GSSK

    def __post_init__(self):
        if self.m_t < 1 or not (1 <= self.m_a <= self.m_t):
            raise InvalidAntennaConfig(
                f"need 1 <= m_a <= m_t, got m_a={self.m_a}, m_t={self.m_t}")
        if self.m_r < 1 or self.n_noma < 1 or self.k_spatial < 0:
            raise InvalidAntennaConfig("m_r, n_noma must be >= 1; k_spatial >= 0")
        if self.total_power <= 0:
            raise InvalidAntennaConfig("total_power must be > 0")
        if self.mod_order < 2 or self.mod_order & (self.mod_order - 1):
            raise UnsupportedOrder(f"mod_order {self.mod_order} is not a power of two")
        if self.ftpa_beta < 0:
            raise InvalidAntennaConfig("ftpa_beta must be >= 0")
        if self.scheme is Scheme.NOMA_SSK:
            if self.m_a != 1:
                raise InvalidAntennaConfig("NOMA-SSK requires m_a = 1")
            if self.m_t & (self.m_t - 1):
                raise InvalidAntennaConfig("NOMA-SSK requires m_t to be a power of two")
        if self.k_spatial > 0 and math.comb(self.m_t, self.m_a) < 2:
            raise InvalidAntennaConfig(
                "spatial users need at least 2 candidate antenna sets")


@dataclass(frozen=True)
class PowerAllocation:
    """Ordered power split over the power-domain users (sums to 1)."""

    alphas: tuple

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        object.__setattr__(self, "alphas", alphas)
        if not alphas or any(not (0.0 < a < 1.0) for a in alphas) and len(alphas) > 1:
            raise DegenerateAllocation(f"alphas out of (0,1): {alphas}")
        if abs(sum(alphas) - 1.0) > 1e-12:
            raise DegenerateAllocation(f"alphas must sum to 1, got {sum(alphas)}")

    def __len__(self):
        return len(self.alphas)


@dataclass(frozen=True)
class AntennaSetCodebook:
    """GSSK constellation: the first 2^b_h antenna index sets and bit labels."""

    sets: tuple            # tuple of sorted index tuples, 1-based antennas
    n_h: int
    b_h: int
    labels: tuple          # bit string per set, natural binary of the position

    def set_for_label(self, label: str) -> int:
        if len(label) != self.b_h:
            raise LengthMismatch(f"label length {len(label)} != b_h {self.b_h}")
        return int(label, 2)


def build_codebook(m_t: int, m_a: int) -> AntennaSetCodebook:
    """First N_H = 2^floor(log2(C(m_t, m_a))) index sets in lexicographic order."""
    if not 1 <= m_a <= m_t:
        raise InvalidAntennaConfig(f"need 1 <= m_a <= m_t, got ({m_t}, {m_a})")
    n_comb = math.comb(m_t, m_a)
    if n_comb < 2:
        raise InvalidAntennaConfig(f"C({m_t},{m_a}) = {n_comb} < 2")
    b_h = n_comb.bit_length() - 1          # floor(log2(n_comb))
    n_h = 1 << b_h
    sets = []
    for i, combo in enumerate(combinations(range(1, m_t + 1), m_a)):
        if i == n_h:
            break
        sets.append(combo)
    labels = tuple(format(p, f"0{b_h}b") for p in range(n_h))
    return AntennaSetCodebook(sets=tuple(sets), n_h=n_h, b_h=b_h, labels=labels)


def map_bits_to_set(bits: str, codebook: AntennaSetCodebook) -> int:
    """Inverse of the codebook labeling."""
    return codebook.set_for_label(bits)


def ftpa_allocate(channel_power_gains, beta: float, strict: bool = True) -> PowerAllocation:
    """Fractional transmit power allocation: alpha_i ~ g_i^(-beta).

    Gains must be listed in decreasing order (strongest user first), so the
    resulting alphas are increasing.  With strict=True (the default), alphas
    that are not strictly increasing raise DegenerateAllocation.
    """
    gains = np.asarray(channel_power_gains, dtype=float)
    if gains.ndim != 1 or gains.size == 0 or np.any(gains <= 0):
        raise DegenerateAllocation("channel power gains must be positive")
    if np.any(np.diff(gains) > 0):
        raise DegenerateAllocation("gains must be in decreasing order")
    weights = gains ** (-beta)
    alphas = weights / weights.sum()
    if strict and len(alphas) > 1 and not np.all(np.diff(alphas) > 0):
        raise DegenerateAllocation(
            f"alphas {tuple(alphas)} are not strictly increasing; "
            "widen the gain spread or pass strict=False")
    return PowerAllocation(alphas=tuple(alphas))


# ---------------------------------------------------------------------------
# Modulation


def _gray_pam_levels(bits_per_axis: int) -> dict:
    """Gray-labelled PAM levels, most-positive level first (label 0...0)."""
    n = 1 << bits_per_axis
    levels = {}
    for pos in range(n):
        gray = pos ^ (pos >> 1)
        levels[gray] = float(n - 1 - 2 * pos)
    return levels


class Constellation:
    """Gray-labelled, unit-average-energy constellation for one user."""

    def __init__(self, mod_order: int):
        if mod_order < 2 or mod_order & (mod_order - 1):
            raise UnsupportedOrder(f"order {mod_order} is not a power of two")
        self.order = mod_order
        self.bits_per_symbol = mod_order.bit_length() - 1
        points = np.zeros(mod_order, dtype=complex)
        if mod_order == 2:
            points[0], points[1] = 1.0, -1.0
        elif mod_order == 4:
            # first bit -> I sign, second bit -> Q sign; "00" = (1+1j)/sqrt(2)
            for label in range(4):
                i = 1.0 if not (label >> 1) & 1 else -1.0
                q = 1.0 if not label & 1 else -1.0
                points[label] = (i + 1j * q) / math.sqrt(2)
        elif mod_order == 8:
            # Gray-labelled 8-PSK
            for pos in range(8):
                gray = pos ^ (pos >> 1)
                points[gray] = np.exp(2j * np.pi * pos / 8)
        else:
            half = self.bits_per_symbol // 2
            if 2 * half != self.bits_per_symbol:
                raise UnsupportedOrder(
                    f"order {mod_order} >= 16 must be a square QAM constellation")
            axis = _gray_pam_levels(half)
            scale = math.sqrt(2 * (mod_order - 1) / 3.0)
            for label in range(mod_order):
                i_bits = label >> half
                q_bits = label & ((1 << half) - 1)
                points[label] = (axis[i_bits] + 1j * axis[q_bits]) / scale
        self.points = points

    def modulate_index(self, index: int) -> complex:
        return complex(self.points[index])

    def demodulate(self, z) -> np.ndarray:
        """Nearest-point hard decision; returns label indices."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return np.argmin(np.abs(z[:, None] - self.points[None, :]) ** 2, axis=1)


def modulate(bits: str, mod_order: int) -> complex:
    """Map a bit string of length log2(mod_order) to a constellation point."""
    const = Constellation(mod_order)
    if len(bits) != const.bits_per_symbol:
        raise LengthMismatch(
            f"expected {const.bits_per_symbol} bits for order {mod_order}, got {len(bits)}")
    return const.modulate_index(int(bits, 2))


# ---------------------------------------------------------------------------
# Superposition coding


@dataclass(frozen=True)
class SuperposedSymbol:
    value: complex
    constituents: tuple


@dataclass(frozen=True)
class TransmitVector:
    entries: np.ndarray = field(repr=False)
    active_set_index: int

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        object.__setattr__(self, "entries", entries)


def superpose(symbols, alloc: PowerAllocation, total_power: float) -> SuperposedSymbol:
    """X = sum_i sqrt(alpha_i * P) * x_i."""
    if len(symbols) != len(alloc):
        raise LengthMismatch(
            f"{len(symbols)} symbols vs {len(alloc)} power factors")
    amps = np.sqrt(np.asarray(alloc.alphas) * total_power)
    value = complex(np.sum(amps * np.asarray(symbols, dtype=complex)))
    return SuperposedSymbol(value=value, constituents=tuple(symbols))


def build_transmit_vector(x: SuperposedSymbol, set_index: int,
                          codebook: AntennaSetCodebook, m_t: int) -> TransmitVector:
    """Place X / sqrt(M_a) on the antennas of the chosen index set."""
    if not 0 <= set_index < codebook.n_h:
        raise IndexOutOfRange(f"set index {set_index} not in 0..{codebook.n_h - 1}")
    active = codebook.sets[set_index]
    entries = np.zeros(m_t, dtype=complex)
    for antenna in active:
        if not 1 <= antenna <= m_t:
            raise IndexOutOfRange(f"antenna {antenna} not in 1..{m_t}")
        entries[antenna - 1] = x.value / math.sqrt(len(active))
    return TransmitVector(entries=entries, active_set_index=set_index)


def superposed_constellation(mod_order: int, alloc: PowerAllocation,
                             total_power: float):
    """All M^N superposed values X and the per-user symbol indices behind them.

    Tuple order: user 1 (smallest alpha) cycles slowest.  Used by the joint
    detectors and the exhaustive maximum-likelihood oracle.
    """
    const = Constellation(mod_order)
    n = len(alloc)
    amps = np.sqrt(np.asarray(alloc.alphas) * total_power)
    indices = np.array(list(product(range(mod_order), repeat=n)), dtype=np.int64)
    values = (const.points[indices] * amps[None, :]).sum(axis=1)
    return values, indices
