import math

import numpy as np
import pytest

from polarsim.code_spec import (CrcPolynomial, build_code_spec, encode,
                                polar_transform)
from polarsim.channel import demodulate_llr, modulate
from polarsim.sc_kernel import (RATE0, RATE1, REP, SPC, classify_tree,
                                f_update, g_update, iter_schedule,
                                propagate_all, propagate_hard, sc_decode)
from polarsim.scl_core import scl_decode


def small_spec(n, message_bits):
    return build_code_spec(n, message_bits, [(0, n, CrcPolynomial(4, 0x3))])


class TestSoftUpdates:
    def test_minsum(self):
        assert f_update(2.0, -3.0) == -2.0
        assert f_update(-1.5, -4.0) == 1.5

    def test_exact_value(self):
        oracle = 2 * math.atanh(math.tanh(1.0) ** 2)
        assert f_update(2.0, 2.0, mode="exact") == pytest.approx(oracle)
        assert oracle == pytest.approx(1.32500, abs=1e-4)

    def test_erasure_absorbs(self):
        for mode in ("minsum", "exact"):
            assert f_update(5.0, 0.0, mode) == 0.0
            assert f_update(0.0, -2.0, mode) == 0.0

    def test_modes_agree_in_sign(self):
        rng = np.random.default_rng(0)
        a, b = rng.normal(0, 3, (2, 2000))
        assert np.array_equal(np.sign(f_update(a, b)),
                              np.sign(f_update(a, b, mode="exact")))

    def test_g(self):
        assert g_update(1.5, 2.0, 0) == 3.5
        assert g_update(1.5, 2.0, 1) == 0.5
        assert g_update(-4.0, 0.0, 0) == -4.0
        assert g_update(-4.0, 0.0, 1) == 4.0


class TestHardPropagation:
    def test_single_stage(self):
        assert list(propagate_hard([1, 0], 1)) == [1, 0]
        assert list(propagate_hard([1, 1], 1)) == [0, 1]

    def test_zeros(self):
        assert not propagate_all(np.zeros(32, dtype=np.uint8)).any()

    def test_full_propagation_is_encoding(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            u = rng.integers(0, 2, 64, dtype=np.uint8)
            x = u
            for stage in range(1, 7):
                x = propagate_hard(x, stage)
            assert np.array_equal(x, polar_transform(u))


class TestClassification:
    def test_all_frozen_subtree_is_rate0(self):
        spec = build_code_spec(8, 2, [])  # info set {6, 7}
        nodes = list(iter_schedule(classify_tree(spec)))
        assert nodes[0].kind == RATE0 and nodes[0].length >= 4

    def test_patterns(self):
        frozen = np.ones(8, dtype=bool)

        def kinds_for(info_idx, n=8):
            spec = build_code_spec(n, len(info_idx), [])
            object.__setattr__(spec, "info_set", np.array(info_idx))
            return classify_tree(spec)

        # frozen pattern [1,0,0,0] over a 4-leaf span: SPC
        spec = build_code_spec(4, 3, [])
        assert np.array_equal(spec.info_set, [1, 2, 3])
        assert classify_tree(spec).kind == SPC
        # single info at last position: repetition
        object.__setattr__(spec, "info_set", np.array([3]))
        object.__setattr__(spec, "frozen_set", np.array([0, 1, 2]))
        assert classify_tree(spec).kind == REP
        # all info: rate-1
        object.__setattr__(spec, "info_set", np.arange(4))
        object.__setattr__(spec, "frozen_set", np.array([], dtype=int))
        assert classify_tree(spec).kind == RATE1

    def test_schedule_covers_leaves(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            n = int(rng.choice([16, 32, 64, 128]))
            k = int(rng.integers(1, n))
            spec = build_code_spec(n, k, [])
            total = sum(node.length for node in
                        iter_schedule(classify_tree(spec)))
            assert total == n

    def test_bitwise_schedule_is_leaf_only(self):
        spec = small_spec(32, 10)
        nodes = list(iter_schedule(classify_tree(spec, fast=False)))
        assert all(node.length == 1 for node in nodes)
        assert len(nodes) == 32


class TestScDecode:
    def test_noiseless_roundtrip(self):
        rng = np.random.default_rng(3)
        for n in (16, 32, 64, 128):
            spec = small_spec(n, n // 2)
            msg = rng.integers(0, 2, spec.message_bits, dtype=np.uint8)
            llr = demodulate_llr(modulate(encode(spec, msg)), 0.6)
            u = sc_decode(llr, spec)
            assert np.array_equal(spec.extract_message(u), msg)

    def test_fast_sc_equals_bitwise_sc(self):
        rng = np.random.default_rng(4)
        for _ in range(500):
            n = int(rng.choice([16, 32, 64]))
            spec = small_spec(n, int(rng.integers(4, n - 6)))
            llr = rng.normal(0, 2, n)
            u_ref = sc_decode(llr, spec)
            fast = scl_decode(llr, spec, 1)
            assert np.array_equal(polar_transform(fast.codeword), u_ref)
