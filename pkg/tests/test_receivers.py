import math

import numpy as np
import pytest

from nomagssk import (
    GainClass,
    PowerAllocation,
    UserChannel,
    build_codebook,
    build_transmit_vector,
    demap_set_to_bits,
    joint_set_symbol_detect,
    ml_antenna_set_detect,
    sic_detect,
    superpose,
)
from nomagssk.channel import draw_channel_matrix
from nomagssk.errors import DimensionMismatch, RankOutOfRange
from nomagssk.receivers import joint_ml_symbols


def _edge_channel(seed, m_r, m_t, gain=0.4):
    rng = np.random.default_rng(seed)
    return UserChannel(matrix=draw_channel_matrix(rng, m_r, m_t, gain),
                       gain_class=GainClass.CELL_EDGE, avg_gain=gain)


class TestSetDetection:
    @pytest.mark.parametrize("m_t,m_a", [(4, 1), (5, 2), (6, 3)])
    def test_noiseless_exhaustive(self, m_t, m_a):
        # every transmitted set is recovered exactly when no noise is added
        cb = build_codebook(m_t, m_a)
        ch = _edge_channel(42, 4, m_t)
        snr = 100.0
        alloc = PowerAllocation(alphas=(1.0,))
        for j in range(cb.n_h):
            x = superpose([1.0], alloc, snr)   # amplitude sqrt(snr)
            tx = build_transmit_vector(x, j, cb, m_t)
            y = ch.matrix @ tx.entries
            decision = ml_antenna_set_detect(y, cb, ch, snr)
            assert decision.set_index == j

    def test_scale_invariance_of_decision(self):
        cb = build_codebook(4, 1)
        ch = _edge_channel(7, 4, 4)
        rng = np.random.default_rng(1)
        y = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        d1 = ml_antenna_set_detect(y, cb, ch, 10.0)
        ch2 = UserChannel(matrix=3.0 * ch.matrix,
                          gain_class=GainClass.CELL_EDGE, avg_gain=1.2)
        d2 = ml_antenna_set_detect(3.0 * y, cb, ch2, 10.0)
        assert d1.set_index == d2.set_index

    def test_tie_breaks_to_lowest_index(self):
        # identical columns make every hypothesis equidistant
        m = np.ones((2, 4), dtype=complex)
        ch = UserChannel(matrix=m, gain_class=GainClass.CELL_EDGE, avg_gain=1.0)
        cb = build_codebook(4, 1)
        d = ml_antenna_set_detect(np.zeros(2), cb, ch, 1.0)
        assert d.set_index == 0
        assert len(set(d.metric_values)) == 1

    def test_metric_values_cover_codebook(self):
        cb = build_codebook(5, 2)
        ch = _edge_channel(3, 2, 5)
        d = ml_antenna_set_detect(np.zeros(2), cb, ch, 4.0)
        assert len(d.metric_values) == cb.n_h

    def test_dimension_check(self):
        cb = build_codebook(4, 1)
        ch = _edge_channel(0, 4, 4)
        with pytest.raises(DimensionMismatch):
            ml_antenna_set_detect(np.zeros(3), cb, ch, 1.0)

    def test_demap_round_trip(self):
        cb = build_codebook(5, 2)
        ch = _edge_channel(12, 4, 5)
        alloc = PowerAllocation(alphas=(1.0,))
        x = superpose([1.0], alloc, 25.0)
        tx = build_transmit_vector(x, 5, cb, 5)
        d = ml_antenna_set_detect(ch.matrix @ tx.entries, cb, ch, 25.0)
        assert demap_set_to_bits(d, cb) == cb.labels[5]


class TestJointDetection:
    def test_noiseless_with_modulated_superposition(self):
        # constant-envelope assumption fails here; the joint detector must not
        cb = build_codebook(5, 2)
        ch = _edge_channel(21, 4, 5)
        alloc = PowerAllocation(alphas=(0.25, 0.75))
        total = 1.0
        rng = np.random.default_rng(8)
        qpsk = (np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / math.sqrt(2))
        for _ in range(200):
            j = rng.integers(0, cb.n_h)
            syms = qpsk[rng.integers(0, 4, size=2)]
            x = superpose(list(syms), alloc, total)
            tx = build_transmit_vector(x, int(j), cb, 5)
            y = ch.matrix @ tx.entries
            d = joint_set_symbol_detect(y, cb, ch, alloc, total, 4)
            assert d.set_index == j

    def test_reduces_to_constant_envelope_case(self):
        cb = build_codebook(4, 1)
        ch = _edge_channel(5, 4, 4)
        alloc = PowerAllocation(alphas=(1.0,))
        rng = np.random.default_rng(2)
        y = 0.1 * (rng.standard_normal(4) + 1j * rng.standard_normal(4))
        # BPSK single user: hypotheses are +-sqrt(P) h_j; compare against the
        # better of the two sign flips of the constant-envelope metric
        d_joint = joint_set_symbol_detect(y, cb, ch, alloc, 9.0, 2)
        d_pos = ml_antenna_set_detect(y, cb, ch, 9.0)
        d_neg = ml_antenna_set_detect(-np.asarray(y), cb, ch, 9.0)
        best = min(range(cb.n_h), key=lambda j: min(d_pos.metric_values[j],
                                                    d_neg.metric_values[j]))
        assert d_joint.set_index == best


class TestSic:
    def test_two_layer_bpsk_trace(self):
        # z = sqrt(0.2)*(+1) + sqrt(0.8)*(-1) = -0.44721
        alloc = PowerAllocation(alphas=(0.2, 0.8))
        y = np.array([math.sqrt(0.2) - math.sqrt(0.8)])
        h = np.array([1.0 + 0j])
        trace = sic_detect(y, 1, h, alloc, 1.0, 2)
        assert trace.detected_symbols == (-1 + 0j,)
        assert trace.residuals[0][0] == pytest.approx(math.sqrt(0.2), abs=1e-12)
        assert trace.own_symbol == 1 + 0j

    def test_rank_two_decodes_directly(self):
        alloc = PowerAllocation(alphas=(0.2, 0.8))
        y = np.array([math.sqrt(0.2) - math.sqrt(0.8)])
        trace = sic_detect(y, 2, np.array([1.0 + 0j]), alloc, 1.0, 2)
        assert trace.detected_symbols == ()
        assert trace.own_symbol == -1 + 0j

    def test_noiseless_qpsk_three_layers(self):
        # separable split: sqrt(a1) + sqrt(a2) < sqrt(a3) and a1 < a2
        alloc = PowerAllocation(alphas=(0.04, 0.12, 0.84))
        qpsk = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / math.sqrt(2)
        amps = np.sqrt(np.array(alloc.alphas))
        h = np.array([0.5 - 0.25j, 1.0 + 0j])
        for a in qpsk:
            for b in qpsk:
                for c in qpsk:
                    x = amps[0] * a + amps[1] * b + amps[2] * c
                    trace = sic_detect(x * h, 1, h, alloc, 1.0, 4)
                    assert trace.detected_symbols == (c, b)
                    assert trace.own_symbol == a

    def test_mrc_gain_over_single_branch(self):
        # MRC combining of two branches recovers what one branch alone cannot
        alloc = PowerAllocation(alphas=(0.2, 0.8))
        h = np.array([1.0 + 0j, 1.0 + 0j])
        x = math.sqrt(0.2) * 1.0 + math.sqrt(0.8) * 1.0
        noise = np.array([-1.2 + 0j, 1.2 + 0j])     # cancels under MRC
        trace = sic_detect(x * h + noise, 1, h, alloc, 1.0, 2)
        assert trace.detected_symbols == (1 + 0j,)
        assert trace.own_symbol == 1 + 0j

    def test_bad_rank(self):
        alloc = PowerAllocation(alphas=(0.2, 0.8))
        with pytest.raises(RankOutOfRange):
            sic_detect(np.array([0j]), 3, np.array([1 + 0j]), alloc, 1.0, 2)

    def test_shape_mismatch(self):
        alloc = PowerAllocation(alphas=(0.2, 0.8))
        with pytest.raises(DimensionMismatch):
            sic_detect(np.zeros(2), 1, np.array([1 + 0j]), alloc, 1.0, 2)


class TestJointMlOracle:
    def test_noiseless_exact(self):
        alloc = PowerAllocation(alphas=(0.2, 0.8))
        h = np.array([0.8 + 0.3j])
        amps = np.sqrt(np.array(alloc.alphas))
        for a in (1.0, -1.0):
            for b in (1.0, -1.0):
                y = (amps[0] * a + amps[1] * b) * h
                assert joint_ml_symbols(y, h, alloc, 1.0, 2) == (a + 0j, b + 0j)

    def test_agrees_with_sic_at_high_snr(self):
        alloc = PowerAllocation(alphas=(0.2, 0.8))
        rng = np.random.default_rng(17)
        h = np.array([1.0 + 0j])
        sigma = math.sqrt(1.0 / (2 * 10 ** 2.5) / 2)   # 25 dB
        agree = 0
        n = 2000
        amps = np.sqrt(np.array(alloc.alphas))
        for _ in range(n):
            a, b = rng.choice([1.0, -1.0], size=2)
            noise = sigma * (rng.standard_normal() + 1j * rng.standard_normal())
            y = np.array([(amps[0] * a + amps[1] * b) + noise])
            trace = sic_detect(y, 1, h, alloc, 1.0, 2)
            ml = joint_ml_symbols(y, h, alloc, 1.0, 2)
            agree += (trace.own_symbol, trace.detected_symbols[0]) == ml
        assert agree / n >= 0.99
