"""Seeded, reproducible Monte Carlo sweeps for BER / SE / EE comparisons.

Reproducibility contract: every trial's randomness is a pure function of
(master_seed, point index, trial index) through a counter-based Philox
stream, and per-block partial sums are reduced in a fixed order.  Results
are therefore bit-identical for any worker count.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import analysis
from .channel import draw_channel_matrix
from .errors import ConfigMismatch, InvalidGainTargets
from .system import (
    PowerAllocation,
    Scheme,
    SystemConfig,
    build_codebook,
    ftpa_allocate,
    superposed_constellation,
    Constellation,
)

_BLOCK = 4096
_CHANNEL_STREAM_TAG = 0x636861      # distinguishes the fixed-channel stream

THREADS_ENV_VAR = "SIM_THREADS"


class Metric(str, Enum):
    CELL_EDGE_BER = "cell_edge_ber"
    SPECTRAL_EFFICIENCY = "spectral_efficiency"
    ENERGY_EFFICIENCY = "energy_efficiency"
    CAPACITY_VS_ANTENNAS = "capacity_vs_antennas"


@dataclass(frozen=True)
class SweepSpec:
    config: SystemConfig
    snr_grid_db: tuple
    trials_per_point: int
    master_seed: int
    metric: Metric
    gain_targets: tuple = None          # defaults derived from user counts
    alphas: tuple = None                # explicit full power split, else FTPA
    constant_envelope: bool = False     # pure GSSK pilot (bound validation)
    fixed_channel: bool = False         # one channel realization for all trials
    ee_accounting: str = "spent"        # "spent" or "total" power denominator
    noma_set_knowledge: str = "detect"  # "detect" or "genie"

    def __post_init__(self):
        grid = tuple(float(s) for s in self.snr_grid_db)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigMismatch("snr_grid_db must be strictly increasing")
        if not grid or self.trials_per_point < 1:
            raise ConfigMismatch("need a nonempty SNR grid and trials >= 1")
        if self.ee_accounting not in ("spent", "total"):
            raise ConfigMismatch(f"unknown ee_accounting {self.ee_accounting!r}")
        if self.noma_set_knowledge not in ("detect", "genie"):
            raise ConfigMismatch(f"unknown noma_set_knowledge {self.noma_set_knowledge!r}")
        object.__setattr__(self, "snr_grid_db", grid)
        if self.gain_targets is not None:
            object.__setattr__(self, "gain_targets",
                               tuple(float(g) for g in self.gain_targets))
        if self.alphas is not None:
            object.__setattr__(self, "alphas",
                               tuple(float(a) for a in self.alphas))


@dataclass(frozen=True)
class SweepPoint:
    snr_db: float
    value: float
    stderr: float
    trials: int
    aux: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SweepResult:
    points: tuple
    metadata: dict

    def to_dict(self) -> dict:
        return {
            "points": [
                {"snr_db": p.snr_db, "value": p.value, "stderr": p.stderr,
                 "trials": p.trials, "aux": p.aux}
                for p in self.points
            ],
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SweepResult":
        points = tuple(
            SweepPoint(snr_db=p["snr_db"], value=p["value"], stderr=p["stderr"],
                       trials=p["trials"], aux=dict(p.get("aux", {})))
            for p in data["points"])
        return cls(points=points, metadata=dict(data["metadata"]))


def default_gain_targets(n_noma: int, k_spatial: int) -> tuple:
    """Cell-center targets spread over [0.8, 1.0], cell-edge over [0.2, 0.4]."""
    centers = np.linspace(1.0, 0.8, n_noma) if n_noma > 1 else np.array([1.0])
    edges = np.linspace(0.4, 0.2, k_spatial) if k_spatial > 1 else \
        (np.array([0.4]) if k_spatial == 1 else np.array([]))
    return tuple(float(g) for g in np.concatenate([centers, edges]))


def resolve_threads(threads=None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(THREADS_ENV_VAR)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# Campaign setup (derived, deterministic quantities shared by all workers)


class _CampaignSetup:
    def __init__(self, spec: SweepSpec):
        cfg = spec.config
        self.spec = spec
        self.is_mimo = cfg.scheme is Scheme.MIMO_NOMA
        if self.is_mimo and cfg.k_spatial != 0:
            raise ConfigMismatch("MIMO-NOMA carries every user in the power domain "
                                 "(set k_spatial = 0 and fold cell-edge users into n_noma)")
        if not self.is_mimo and cfg.k_spatial < 1 and \
                spec.metric is Metric.CELL_EDGE_BER:
            raise ConfigMismatch("cell-edge BER needs k_spatial >= 1")
        self.n_users = cfg.n_noma + cfg.k_spatial
        self.n_noma = cfg.n_noma
        self.gains = spec.gain_targets or default_gain_targets(cfg.n_noma, cfg.k_spatial)
        if len(self.gains) != self.n_users:
            raise InvalidGainTargets(
                f"expected {self.n_users} gain targets, got {len(self.gains)}")

        # power split over the full user population; spatial users spend none
        if spec.alphas is not None:
            if len(spec.alphas) != self.n_users:
                raise InvalidGainTargets(
                    f"expected {self.n_users} alphas, got {len(spec.alphas)}")
            full = np.asarray(spec.alphas, dtype=float)
            if abs(full.sum() - 1.0) > 1e-9 or np.any(np.diff(full) <= 0):
                raise InvalidGainTargets("alphas must be strictly increasing and sum to 1")
        else:
            full = np.asarray(
                ftpa_allocate([g * g for g in self.gains], cfg.ftpa_beta).alphas)
        self.full_alphas = full
        share = float(full[: self.n_noma].sum())
        self.power_share = share
        # the whole budget goes to the NOMA users ("assigns the total power to
        # users other than the cell-edge users"); the cell-edge share only
        # enters the energy-efficiency denominator under "spent" accounting
        self.budget = cfg.total_power
        self.alloc = PowerAllocation(alphas=tuple(full[: self.n_noma] / share))
        self.amps = np.sqrt(np.asarray(self.alloc.alphas) * self.budget)
        self.spent_power = cfg.total_power if (self.is_mimo or
                                               spec.ee_accounting == "total") \
            else share * cfg.total_power

        self.const = Constellation(cfg.mod_order)
        self.bits_per_symbol = self.const.bits_per_symbol
        m = cfg.mod_order
        self.ham_m = np.array([[bin(a ^ b).count("1") for b in range(m)]
                               for a in range(m)], dtype=np.int64)
        self.sup_values, self.sup_indices = superposed_constellation(
            m, self.alloc, self.budget)

        if self.is_mimo:
            self.m_t = cfg.m_t
            self.m_a = cfg.m_t          # every antenna radiates the NOMA signal
            self.codebook = None
        else:
            self.m_t = cfg.m_t
            self.m_a = cfg.m_a
            self.codebook = build_codebook(cfg.m_t, cfg.m_a)
            nh = self.codebook.n_h
            self.set_matrix = np.zeros((nh, cfg.m_t))
            for j, antenna_set in enumerate(self.codebook.sets):
                for antenna in antenna_set:
                    self.set_matrix[j, antenna - 1] = 1.0
            self.ham_nh = np.array([[bin(a ^ b).count("1") for b in range(nh)]
                                    for a in range(nh)], dtype=np.int64)

    def noise_variance(self, snr_linear: float) -> float:
        # Es/2N0 calibration against the full power budget P (see channel module)
        return self.spec.config.total_power / (2.0 * snr_linear)

    def fixed_channels(self) -> np.ndarray:
        """One deterministic channel per user, drawn from a dedicated stream."""
        rng = np.random.default_rng(
            np.random.SeedSequence([self.spec.master_seed & (2 ** 63 - 1),
                                    _CHANNEL_STREAM_TAG]))
        out = np.empty((self.n_users, self.spec.config.m_r, self.m_t), dtype=complex)
        for u, gain in enumerate(self.gains):
            out[u] = draw_channel_matrix(rng, self.spec.config.m_r, self.m_t, gain)
        return out


def _trial_rng(master_seed: int, point_idx: int, trial_idx: int) -> np.random.Generator:
    key = np.array([master_seed & 0xFFFFFFFFFFFFFFFF,
                    ((point_idx + 1) << 40) + trial_idx], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


# ---------------------------------------------------------------------------
# Block simulation


def _draw_block(setup: _CampaignSetup, point_idx: int, block_start: int,
                block_size: int, snr_linear: float):
    """Fill per-trial randomness for one block, fixed draw order per trial."""
    spec = setup.spec
    cfg = spec.config
    b, nu, mr, mt = block_size, setup.n_users, cfg.m_r, setup.m_t
    channels = np.empty((b, nu, mr, mt), dtype=complex)
    set_idx = np.zeros(b, dtype=np.int64)
    sym_idx = np.zeros((b, setup.n_noma), dtype=np.int64)
    noise = np.empty((b, nu, mr), dtype=complex)
    sigma = math.sqrt(setup.noise_variance(snr_linear) / 2.0)
    fixed = setup.fixed_channels() if spec.fixed_channel else None
    spatial = not setup.is_mimo
    for t in range(block_size):
        rng = _trial_rng(spec.master_seed, point_idx, block_start + t)
        if fixed is None:
            for u, gain in enumerate(setup.gains):
                channels[t, u] = draw_channel_matrix(rng, mr, mt, gain)
        else:
            channels[t] = fixed
        if spatial:
            set_idx[t] = rng.integers(0, setup.codebook.n_h)
        sym_idx[t] = rng.integers(0, cfg.mod_order, size=setup.n_noma)
        z = rng.standard_normal((nu, 2, mr))
        noise[t] = sigma * (z[:, 0] + 1j * z[:, 1])
    return channels, set_idx, sym_idx, noise


def _joint_set_metrics(effs_u: np.ndarray, y_u: np.ndarray, values: np.ndarray,
                       m_a: int) -> np.ndarray:
    """min over symbol hypotheses of ||y - (X/sqrt(m_a)) eff_j||^2, per set."""
    ip = np.einsum("brj,br->bj", np.conj(effs_u), y_u)              # (B, n_h)
    ee = np.sum(np.abs(effs_u) ** 2, axis=1)                        # (B, n_h)
    v = values / math.sqrt(m_a)
    cross = -2.0 * np.real(ip[:, :, None] * np.conj(v)[None, None, :])
    metric = cross + (np.abs(v) ** 2)[None, None, :] * ee[:, :, None]
    return metric.min(axis=2)                                       # (B, n_h)


def _sic_decide(setup: _CampaignSetup, z: np.ndarray, user_rank: int) -> np.ndarray:
    """Vectorized SIC chain on MRC-combined observations; own-symbol indices."""
    points = setup.const.points
    amps = setup.amps
    for layer in range(setup.n_noma, user_rank, -1):
        d = np.abs(z[:, None] - amps[layer - 1] * points[None, :]) ** 2
        idx = np.argmin(d, axis=1)
        z = z - amps[layer - 1] * points[idx]
    d = np.abs(z[:, None] - amps[user_rank - 1] * points[None, :]) ** 2
    return np.argmin(d, axis=1)


def _simulate_block(spec: SweepSpec, point_idx: int, snr_db: float,
                    block_start: int, block_size: int) -> dict:
    setup = _CampaignSetup(spec)
    cfg = spec.config
    snr_linear = 10.0 ** (snr_db / 10.0)
    channels, set_idx, sym_idx, noise = _draw_block(
        setup, point_idx, block_start, block_size, snr_linear)
    b = block_size
    acc = {"trials": b, "spatial_bit_err": 0, "spatial_bits": 0,
           "spatial_set_err": 0, "noma_bit_err": 0, "noma_bits": 0,
           "rate_sum": 0.0, "rate_sumsq": 0.0}

    flat = sym_idx @ (cfg.mod_order ** np.arange(setup.n_noma - 1, -1, -1))
    if spec.constant_envelope:
        # pure GSSK pilot at the full power budget: amplitude sqrt(P)
        x_val = np.full(b, math.sqrt(cfg.total_power), dtype=complex)
    else:
        x_val = setup.sup_values[flat]

    n0 = setup.noise_variance(snr_linear)
    want_rate = spec.metric in (Metric.SPECTRAL_EFFICIENCY, Metric.ENERGY_EFFICIENCY)
    rates = np.zeros(b) if want_rate else None

    if setup.is_mimo:
        h_eff = channels.sum(axis=3) / math.sqrt(setup.m_t)   # (B, n, m_r)
        for u in range(setup.n_noma):
            rank = u + 1
            h_u = h_eff[:, u, :]
            y_u = x_val[:, None] * h_u + noise[:, u, :]
            energy = np.sum(np.abs(h_u) ** 2, axis=1)
            if want_rate:
                p_abs = setup.full_alphas * cfg.total_power
                interf = p_abs[:u].sum() * energy
                sinr = p_abs[u] * energy / (interf + n0)
                rates += np.log2(1.0 + sinr)
                continue
            z = np.einsum("br,br->b", np.conj(h_u), y_u) / energy
            own = _sic_decide(setup, z, rank)
            errs = int(setup.ham_m[sym_idx[:, u], own].sum())
            acc["noma_bit_err"] += errs
            acc["noma_bits"] += b * setup.bits_per_symbol
            if u == setup.n_noma - 1:       # weakest layer doubles as cell-edge
                acc["spatial_bit_err"] += errs
                acc["spatial_bits"] += b * setup.bits_per_symbol
                acc["spatial_set_err"] += int((own != sym_idx[:, u]).sum())
    else:
        effs = np.einsum("bumt,jt->bumj", channels, setup.set_matrix)  # (B,u,m_r,n_h)
        gain_sel = np.take_along_axis(
            effs, set_idx[:, None, None, None].repeat(setup.n_users, axis=1)
            .repeat(cfg.m_r, axis=2), axis=3)[..., 0]                  # (B,u,m_r)
        edge = setup.n_users - 1
        # received vector per user
        y_all = gain_sel * (x_val / math.sqrt(setup.m_a))[:, None, None] + noise

        # cell-edge set detection
        effs_edge = effs[:, edge]                                      # (B,m_r,n_h)
        y_edge = y_all[:, edge, :]
        if spec.constant_envelope:
            amp = math.sqrt(cfg.total_power / setup.m_a)
            metrics = np.sum(np.abs(y_edge[:, :, None] - amp * effs_edge) ** 2, axis=1)
        else:
            metrics = _joint_set_metrics(effs_edge, y_edge, setup.sup_values,
                                         setup.m_a)
        set_hat = np.argmin(metrics, axis=1)
        acc["spatial_bit_err"] += int(setup.ham_nh[set_idx, set_hat].sum())
        acc["spatial_bits"] += b * setup.codebook.b_h
        set_err = set_hat != set_idx
        acc["spatial_set_err"] += int(set_err.sum())

        if want_rate:
            for u in range(setup.n_noma):
                h_u = gain_sel[:, u, :] / math.sqrt(setup.m_a)
                energy = np.sum(np.abs(h_u) ** 2, axis=1)
                p_abs = np.asarray(setup.alloc.alphas) * setup.budget
                interf = p_abs[:u].sum() * energy
                sinr = p_abs[u] * energy / (interf + n0)
                rates += np.log2(1.0 + sinr)
            rates += setup.codebook.b_h * (~set_err)
        elif not spec.constant_envelope:
            for u in range(setup.n_noma):
                rank = u + 1
                if spec.noma_set_knowledge == "genie":
                    s_hat_u = set_idx
                else:
                    m_u = _joint_set_metrics(effs[:, u], y_all[:, u, :],
                                             setup.sup_values, setup.m_a)
                    s_hat_u = np.argmin(m_u, axis=1)
                h_u = np.take_along_axis(
                    effs[:, u], s_hat_u[:, None, None].repeat(cfg.m_r, axis=1),
                    axis=2)[..., 0] / math.sqrt(setup.m_a)
                energy = np.sum(np.abs(h_u) ** 2, axis=1)
                z = np.einsum("br,br->b", np.conj(h_u), y_all[:, u, :]) / energy
                own = _sic_decide(setup, z, rank)
                acc["noma_bit_err"] += int(setup.ham_m[sym_idx[:, u], own].sum())
                acc["noma_bits"] += b * setup.bits_per_symbol

    if want_rate:
        acc["rate_sum"] = float(rates.sum())
        acc["rate_sumsq"] = float(np.sum(rates ** 2))
    return acc


# ---------------------------------------------------------------------------
# Sweep drivers


def _reduce_point(spec: SweepSpec, snr_db: float, accs: list) -> SweepPoint:
    total = {k: 0 if isinstance(accs[0][k], int) else 0.0 for k in accs[0]}
    for a in accs:                      # fixed block order
        for k, v in a.items():
            total[k] += v
    trials = total["trials"]
    aux = {}
    if spec.metric is Metric.CELL_EDGE_BER:
        nbits = total["spatial_bits"]
        p = total["spatial_bit_err"] / nbits
        stderr = math.sqrt(p * (1.0 - p) / nbits)
        value = p
        aux["set_error_rate"] = total["spatial_set_err"] / trials
        if total["noma_bits"]:
            aux["noma_ber"] = total["noma_bit_err"] / total["noma_bits"]
    else:
        mean = total["rate_sum"] / trials
        var = max(total["rate_sumsq"] / trials - mean * mean, 0.0)
        stderr = math.sqrt(var / trials)
        value = mean
        if spec.metric is Metric.ENERGY_EFFICIENCY:
            setup = _CampaignSetup(spec)
            value = mean / setup.spent_power
            stderr = stderr / setup.spent_power
            aux["spectral_efficiency"] = mean
    return SweepPoint(snr_db=snr_db, value=value, stderr=stderr,
                      trials=trials, aux=aux)


def _block_task(args):
    spec, point_idx, snr_db, start, size = args
    return point_idx, start, _simulate_block(spec, point_idx, snr_db, start, size)


def run_sweep(spec: SweepSpec, threads=None) -> SweepResult:
    """Execute a BER / SE / EE sweep; deterministic for any thread count."""
    if spec.metric is Metric.CAPACITY_VS_ANTENNAS:
        raise ConfigMismatch("use run_capacity_vs_antennas for the capacity table")
    _CampaignSetup(spec)                # validate config eagerly
    threads = resolve_threads(threads)
    t0 = time.monotonic()
    tasks = []
    for p_idx, snr_db in enumerate(spec.snr_grid_db):
        start = 0
        while start < spec.trials_per_point:
            size = min(_BLOCK, spec.trials_per_point - start)
            tasks.append((spec, p_idx, snr_db, start, size))
            start += size
    if threads == 1 or len(tasks) == 1:
        results = [_block_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_block_task, tasks, chunksize=1))
    per_point = {i: [] for i in range(len(spec.snr_grid_db))}
    for p_idx, start, acc in sorted(results, key=lambda r: (r[0], r[1])):
        per_point[p_idx].append(acc)
    points = tuple(
        _reduce_point(spec, snr_db, per_point[i])
        for i, snr_db in enumerate(spec.snr_grid_db))
    metadata = {
        "scheme": spec.config.scheme.value,
        "metric": spec.metric.value,
        "seed": spec.master_seed,
        "trials_per_point": spec.trials_per_point,
        "config": {
            "m_t": spec.config.m_t, "m_a": spec.config.m_a,
            "m_r": spec.config.m_r, "n_noma": spec.config.n_noma,
            "k_spatial": spec.config.k_spatial,
            "total_power": spec.config.total_power,
            "mod_order": spec.config.mod_order,
            "ftpa_beta": spec.config.ftpa_beta,
        },
        "wall_time_s": time.monotonic() - t0,
    }
    return SweepResult(points=points, metadata=metadata)


def run_ber_sweep(spec: SweepSpec, threads=None) -> SweepResult:
    if spec.metric is not Metric.CELL_EDGE_BER:
        raise ConfigMismatch("spec.metric must be cell_edge_ber")
    return run_sweep(spec, threads=threads)


def run_se_sweep(spec: SweepSpec, threads=None) -> SweepResult:
    if spec.metric is not Metric.SPECTRAL_EFFICIENCY:
        raise ConfigMismatch("spec.metric must be spectral_efficiency")
    return run_sweep(spec, threads=threads)


def run_ee_sweep(spec: SweepSpec, threads=None) -> SweepResult:
    if spec.metric is not Metric.ENERGY_EFFICIENCY:
        raise ConfigMismatch("spec.metric must be energy_efficiency")
    return run_sweep(spec, threads=threads)


# ---------------------------------------------------------------------------
# Closed-form capacity table (data behind the capacity-vs-antennas figure)


def bound_channel(m_r: int, m_t: int, master_seed: int, gain: float = 0.4):
    """Deterministic cell-edge channel realization for closed-form bounds."""
    from .channel import UserChannel, classify_gain

    rng = np.random.default_rng(
        np.random.SeedSequence([master_seed & (2 ** 63 - 1), m_t, _CHANNEL_STREAM_TAG]))
    matrix = draw_channel_matrix(rng, m_r, m_t, gain)
    return UserChannel(matrix=matrix, gain_class=classify_gain(gain), avg_gain=gain)


def run_capacity_vs_antennas(config: SystemConfig, snr_linear: float,
                             m_t_grid, master_seed: int = 0,
                             edge_gain: float = 0.4) -> list:
    """Closed-form rates per scheme per antenna count; P_e from the union bound."""
    rows = []
    n_total = config.n_noma + config.k_spatial
    for m_t in m_t_grid:
        ch = bound_channel(config.m_r, m_t, master_seed, gain=edge_gain)
        # MIMO-NOMA rate is antenna-independent; echoed per grid entry
        rows.append({"scheme": Scheme.MIMO_NOMA.value, "m_t": int(m_t),
                     "value": analysis.capacity_mimo_noma(snr_linear, n_total)})
        if m_t & (m_t - 1) == 0:
            cb = build_codebook(m_t, 1)
            p_e = analysis.ber_union_bound(cb, ch, snr_linear, 1)
            rows.append({"scheme": Scheme.NOMA_SSK.value, "m_t": int(m_t),
                         "value": analysis.capacity_noma_ssk(
                             snr_linear, config.n_noma, m_t, p_e)})
        if m_t >= config.m_a and math.comb(m_t, config.m_a) >= 2:
            cb = build_codebook(m_t, config.m_a)
            p_e = analysis.ber_union_bound(cb, ch, snr_linear, config.m_a)
            r_k = analysis.cell_edge_sum_rate(p_e, m_t, config.m_a)
            rows.append({"scheme": Scheme.NOMA_GSSK.value, "m_t": int(m_t),
                         "value": analysis.capacity_noma_gssk(
                             snr_linear, config.n_noma, r_k)})
    return rows
