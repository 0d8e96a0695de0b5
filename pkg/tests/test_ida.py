import numpy as np
import pytest

from polarsim.channel import ChannelConfig
from polarsim.fixedpoint import FixedPointFormat, QuantizationProfile, \
    profile_for, quantize
from polarsim.ida import (IdaConfig, IdaDecoder, expected_average_list,
                          quantized_gamma_adjust, select_list_size,
                          small_list_probability,
                          small_list_probability_direct, table_params)


class TestSelect:
    def test_spec_example(self):
        cfg = IdaConfig(gamma=0.25, phi=3)
        assert select_list_size([0.1, -0.2, 3.0], cfg) == 4

    def test_threshold_not_below(self):
        cfg = IdaConfig(gamma=0.25, phi=2)
        assert select_list_size([0.1, -0.2, 3.0], cfg) == 8

    def test_phi_zero_always_large(self):
        cfg = IdaConfig(gamma=0.25, phi=0)
        assert select_list_size(np.full(100, 99.0), cfg) == 8

    def test_batched(self):
        cfg = IdaConfig(gamma=0.5, phi=2)
        out = select_list_size(np.array([[0.1, 0.1, 9], [9, 9, 9]]), cfg)
        assert list(out) == [8, 4]


class TestSmallListProbability:
    def test_phi_zero(self):
        assert small_list_probability(4096, 0.25, 0.8, 0) == 0.0

    def test_tiny_gamma(self):
        assert small_list_probability(4096, 1e-12, 0.8, 1) \
            == pytest.approx(1.0)

    def test_log_matches_direct_small_n(self):
        for n in (64, 256, 512):
            for gamma, phi in ((0.25, n // 16), (0.5, n // 8), (1.0, n // 2)):
                for sigma in (0.6, 0.9, 1.2):
                    a = small_list_probability(n, gamma, sigma, phi)
                    b = small_list_probability_direct(n, gamma, sigma, phi)
                    assert a == pytest.approx(b, rel=1e-9)

    def test_monotonic_in_phi(self):
        vals = [small_list_probability(1024, 0.25, 0.8, phi)
                for phi in range(0, 200, 20)]
        assert np.all(np.diff(vals) >= 0)

    def test_monotonic_in_gamma(self):
        vals = [small_list_probability(1024, g, 0.8, 40)
                for g in (0.1, 0.2, 0.4, 0.8)]
        assert np.all(np.diff(vals) <= 1e-15)

    def test_monte_carlo_agreement(self):
        # spec example row: n=4096 rate 0.5 parameters
        n, gamma, phi = 4096, 0.25, 152
        sigma = ChannelConfig(1.75, 0.5).sigma
        delta = small_list_probability(n, gamma, sigma, phi)
        rng = np.random.default_rng(42)
        frames = 10 ** 4
        hits = 0
        for _ in range(10):
            y = 1.0 + sigma * rng.standard_normal((frames // 10, n))
            llr = 2.0 * y / sigma ** 2
            hits += ((np.abs(llr) <= gamma).sum(axis=1) < phi).sum()
        mc = hits / frames
        se = np.sqrt(max(delta * (1 - delta), 1e-12) / frames)
        assert abs(delta - mc) <= 3 * se + 1e-9

    def test_no_overflow_at_scale(self):
        # the motivating case: direct evaluation overflows, log form works
        v = small_list_probability(8192, 0.375, 0.9, 1123)
        assert 0.0 <= v <= 1.0


class TestQuantizedThreshold:
    def test_adjust_examples(self):
        prof = profile_for(4096, 0.5)
        assert quantized_gamma_adjust(0.25, prof) == pytest.approx(0.375)
        assert quantized_gamma_adjust(0.50, prof) == pytest.approx(0.625)

    def test_fine_grid_limit(self):
        prof = QuantizationProfile(FixedPointFormat(4, 30),
                                   FixedPointFormat(6, 30),
                                   FixedPointFormat(7, 30))
        assert quantized_gamma_adjust(0.25, prof) == pytest.approx(0.25,
                                                                   abs=1e-8)

    def test_quantized_rule_equals_float_rule(self):
        # counting |quantize(l)| < gamma' + eps equals counting
        # |l| < gamma' + eps away from grid boundaries
        rng = np.random.default_rng(7)
        fmt = FixedPointFormat(4, 2)
        for gamma_q in (0.25, 0.5):
            gamma = gamma_q + 0.125
            cfg = IdaConfig(gamma=gamma, phi=40)
            for _ in range(50):
                llr = rng.normal(0, 1.0, 256)
                llr = llr[np.abs(np.abs(llr) % 0.125) > 1e-6][:200]
                assert select_list_size(quantize(llr, fmt), cfg) \
                    == select_list_size(llr, cfg)


class TestTables:
    def test_float_rows(self):
        assert table_params(8192, 0.75).gamma == 0.25
        assert table_params(8192, 0.75).phi == 112
        assert table_params(4096, 0.25).gamma == 0.50
        assert table_params(4096, 0.25).phi == 713

    def test_quantized_rows(self):
        p = table_params(4096, 0.25, quantized=True)
        assert p.gamma == pytest.approx(0.625) and p.phi == 888
        p = table_params(8192, 0.5, quantized=True)
        assert p.gamma == pytest.approx(0.375) and p.phi == 492

    def test_unknown_row(self):
        with pytest.raises(KeyError):
            table_params(2048, 0.5)


class TestAverageList:
    def test_all_small(self):
        assert expected_average_list(1.0, 4, 8, 0.0, 8) == 4.0

    def test_endpoint_six(self):
        assert expected_average_list(0.5, 4, 8, 0.0, 8) == 6.0

    def test_second_attempt_term(self):
        assert expected_average_list(0.0, 4, 8, 0.01, 8) \
            == pytest.approx(8.08)


class TestIdaDecoder:
    def test_overhead_ops_and_split(self):
        from polarsim.code_spec import build_code_spec, CrcPolynomial, encode
        from polarsim.channel import modulate, demodulate_llr
        from polarsim.scl_core import ListEngine
        spec = build_code_spec(64, 24, [(0, 64, CrcPolynomial(6, 0x21))])
        small, large = ListEngine(spec, 4), ListEngine(spec, 8)
        cfg = IdaConfig(gamma=0.6, phi=8)
        dec = IdaDecoder(small, large, cfg)
        rng = np.random.default_rng(9)
        msgs = rng.integers(0, 2, (32, spec.message_bits), dtype=np.uint8)
        y = modulate(encode(spec, msgs)) + 0.9 * rng.standard_normal((32, 64))
        llr = demodulate_llr(y, 0.9)
        tr = dec.decode_batch(llr)
        sizes = select_list_size(llr, cfg)
        assert np.array_equal(tr.list_size, sizes)
        for eng, L in ((small, 4), (large, 8)):
            rowsel = sizes == L
            if rowsel.any():
                base = np.array([eng.attempt_ops.additions,
                                 eng.attempt_ops.comparisons,
                                 eng.attempt_ops.selections])
                extra = tr.ops[rowsel] - base
                assert np.all(extra[:, 0] == 63)   # n-1 additions
                assert np.all(extra[:, 1] == 65)   # n+1 comparisons
                assert np.all(extra[:, 2] == 0)


class TestListAccounting:
    def test_average_list_identity_with_retries(self):
        # list-size counters from the harness match the analytic identity:
        # first-attempt size per frame plus L_second for each re-attempt
        from polarsim.code_spec import CrcPolynomial, build_code_spec, encode
        from polarsim.channel import modulate
        from polarsim.enhance import EnhanceConfig, EnhancedDecoder
        from polarsim.gpscl import GpsclEngine, PartitionPlan
        layout = [(0, 32, CrcPolynomial(6, 0x21)),
                  (32, 64, CrcPolynomial(10, 0x233))]
        spec = build_code_spec(64, 16, layout)
        plan = PartitionPlan(2, 2)
        small = GpsclEngine(spec, plan, 4)
        large = GpsclEngine(spec, plan, 8)
        cfg = IdaConfig(gamma=0.7, phi=12)
        first = IdaDecoder(small, large, cfg)
        wrap = EnhancedDecoder(spec, EnhanceConfig("be", 2, 0.10), first,
                               second=large, sigma=1.0)
        rng = np.random.default_rng(3)
        msgs = rng.integers(0, 2, (96, spec.message_bits), dtype=np.uint8)
        y = modulate(encode(spec, msgs)) + 1.0 * rng.standard_normal((96, 64))
        out = wrap.decode_frames(y, seed=1, ebn0_db=2.0)
        from polarsim.channel import demodulate_llr
        sizes = select_list_size(demodulate_llr(y, 1.0), cfg)
        expect = sizes + 8 * (out.attempts - 1)
        assert np.array_equal(out.list_sum, expect)
        assert (out.attempts == 2).any() and (sizes == 4).any()
