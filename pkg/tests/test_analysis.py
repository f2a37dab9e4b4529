import math

import numpy as np
import pytest

from nomagssk import GainClass, UserChannel, build_codebook
from nomagssk.analysis import (
    ber_union_bound,
    capacity_mimo_noma,
    capacity_noma_gssk,
    capacity_noma_ssk,
    cell_edge_sum_rate,
    complexity_mimo_noma_user,
    complexity_totals,
    energy_efficiency,
    q_function,
    table1_report,
)
from nomagssk.channel import draw_channel_matrix
from nomagssk.errors import (
    DomainError,
    InvalidAntennaConfig,
    InvalidSnr,
    RankOutOfRange,
    ZeroPower,
)


def _edge_channel(seed, m_r, m_t, gain=0.4):
    rng = np.random.default_rng(seed)
    return UserChannel(matrix=draw_channel_matrix(rng, m_r, m_t, gain),
                       gain_class=GainClass.CELL_EDGE, avg_gain=gain)


class TestQFunction:
    def test_known_values(self):
        assert q_function(0.0) == pytest.approx(0.5, abs=1e-15)
        assert float(q_function(2.0)) == pytest.approx(0.02275013195, abs=1e-10)
        assert float(q_function(1.0)) == pytest.approx(0.15865525393, abs=1e-10)

    def test_symmetry(self):
        x = np.linspace(-3, 3, 13)
        assert np.allclose(q_function(x) + q_function(-x), 1.0)

    def test_monotone_decreasing(self):
        vals = q_function(np.linspace(-5, 5, 101))
        assert np.all(np.diff(vals) < 0)


class TestUnionBound:
    def test_two_set_manual(self):
        # n_h = 2, b_h = 1: bound = Q(sqrt(snr/m_a * |h1 - h2|^2))
        cb = build_codebook(2, 1)
        h = np.array([[1.0 + 0j, 0.5 + 0j]])
        ch = UserChannel(matrix=h, gain_class=GainClass.CELL_EDGE, avg_gain=0.4)
        snr = 16.0
        expected = float(q_function(math.sqrt(snr * 0.25)))
        assert ber_union_bound(cb, ch, snr, 1) == pytest.approx(expected, rel=1e-12)

    def test_decreasing_in_snr(self):
        cb = build_codebook(5, 2)
        ch = _edge_channel(9, 4, 5)
        vals = [ber_union_bound(cb, ch, 10 ** (s / 10), 2) for s in range(0, 24, 4)]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_clamped_to_unit_interval(self):
        cb = build_codebook(8, 3)
        ch = _edge_channel(1, 4, 8)
        assert ber_union_bound(cb, ch, 1e-6, 3) <= 1.0
        assert ber_union_bound(cb, ch, 1e9, 3) >= 0.0

    def test_per_branch_variant_differs(self):
        cb = build_codebook(5, 2)
        ch = _edge_channel(2, 4, 5)
        mrc = ber_union_bound(cb, ch, 10.0, 2, "mrc")
        pb = ber_union_bound(cb, ch, 10.0, 2, "per_branch")
        assert mrc != pb
        assert mrc < pb      # combining gains shrink the pairwise arguments

    def test_invalid_inputs(self):
        cb = build_codebook(4, 1)
        ch = _edge_channel(0, 2, 4)
        with pytest.raises(InvalidSnr):
            ber_union_bound(cb, ch, 0.0, 1)
        with pytest.raises(InvalidSnr):
            ber_union_bound(cb, ch, 1.0, 1, "median")


class TestCapacity:
    def test_noma_term_pinned(self):
        # log2(100 * log2(log2(3))) = log2(100 * 0.66439) = 6.0540
        assert capacity_mimo_noma(100.0, 3) == pytest.approx(6.0540, abs=2e-4)

    def test_domain_error_small_n(self):
        with pytest.raises(DomainError):
            capacity_mimo_noma(100.0, 2)
        with pytest.raises(DomainError):
            capacity_noma_ssk(100.0, 2, 4, 0.0)

    def test_ssk_adds_spatial_bits(self):
        base = capacity_mimo_noma(100.0, 3)
        assert capacity_noma_ssk(100.0, 3, 8, 0.0) == pytest.approx(base + 3)
        assert capacity_noma_ssk(100.0, 3, 8, 1.0) == pytest.approx(base)

    def test_gssk_uses_sum_rate(self):
        base = capacity_mimo_noma(100.0, 3)
        r_k = cell_edge_sum_rate(0.25, 8, 4)       # floor(log2 C(8,4)) = 6
        assert r_k == pytest.approx(0.75 * 6)
        assert capacity_noma_gssk(100.0, 3, r_k) == pytest.approx(base + 4.5)

    def test_sum_rate_error_free_limit(self):
        assert cell_edge_sum_rate(0.0, 5, 2) == 3.0
        assert cell_edge_sum_rate(1.0, 5, 2) == 0.0


class TestEnergyEfficiency:
    def test_basic_ratio(self):
        assert energy_efficiency(6.0, [0.3, 0.7], 2.0) == pytest.approx(3.0)

    def test_partial_spend(self):
        assert energy_efficiency(4.0, [0.25, 0.25], 1.0) == pytest.approx(8.0)

    def test_zero_power_rejected(self):
        with pytest.raises(ZeroPower):
            energy_efficiency(1.0, [], 1.0)
        with pytest.raises(ZeroPower):
            energy_efficiency(-1.0, [1.0], 1.0)


class TestComplexity:
    ROW1 = dict(n=5, k=2, m_r=4, m_t_noma=4, m_t_gssk=4, m_a=1, m=2)
    ROW2 = dict(n=5, k=2, m_r=4, m_t_noma=8, m_t_gssk=5, m_a=2, m=3)

    def test_mimo_noma_row_values(self):
        assert complexity_totals(**self.ROW1).mimo_noma == 3840
        assert complexity_totals(**self.ROW2).mimo_noma == 793080

    def test_per_user_sums_to_total(self):
        total = sum(complexity_mimo_noma_user(5, j, 4, 4, 2) for j in range(1, 6))
        assert total == complexity_totals(**self.ROW1).mimo_noma

    def test_ssk_corrected_row2(self):
        assert complexity_totals(**self.ROW2).noma_ssk_corrected == 317256

    def test_row1_ssk_variants(self):
        rep = complexity_totals(**self.ROW1)
        assert rep.noma_ssk == 4624
        assert rep.noma_ssk_corrected == 1552

    def test_row2_gssk_variants(self):
        rep = complexity_totals(**self.ROW2)
        assert rep.noma_gssk == pytest.approx(39365.15, abs=0.01)
        assert rep.noma_gssk_corrected == pytest.approx(13157.15, abs=0.01)

    def test_invalid_args(self):
        with pytest.raises(InvalidAntennaConfig):
            complexity_totals(n=2, k=2, m_r=4, m_t_noma=2, m_t_gssk=4, m_a=2, m=2)
        with pytest.raises(RankOutOfRange):
            complexity_mimo_noma_user(3, 4, 1, 1, 2)

    def test_table_report_flags(self):
        rows = table1_report()
        flat = {(i, s): cell for i, row in enumerate(rows)
                for s, cell in row["schemes"].items()}
        assert flat[(0, "mimo_noma")]["match"]
        assert flat[(1, "mimo_noma")]["match"]
        assert flat[(1, "noma_ssk")]["match"]
        # the cells that no formula variant reproduces
        assert not flat[(0, "noma_ssk")]["match"]
        assert not flat[(0, "noma_gssk")]["match"]
        assert not flat[(1, "noma_gssk")]["match"]
