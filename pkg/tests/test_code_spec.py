import numpy as np
import pytest

from polarsim.code_spec import (CRC6, CRC10, CRC16, CodeSpec, CrcPolynomial,
                                beta_expansion_weights, build_code_spec,
                                crc_compute, crc_matrix, crc_verify, encode,
                                polar_transform, reliability_order,
                                spec_for_rate)

BETA = 2.0 ** 0.25


def crc_long_division(bits, degree, coefficients):
    """Independent oracle: polynomial long division over GF(2)."""
    poly = (1 << degree) | coefficients
    work = list(int(b) for b in bits) + [0] * degree
    for i in range(len(bits)):
        if work[i]:
            for j in range(degree + 1):
                work[i + j] ^= (poly >> (degree - j)) & 1
    return work[len(bits):]


def kron_generator(m):
    """Explicit Kronecker-power generator matrix oracle."""
    f = np.array([[1, 0], [1, 1]], dtype=np.uint8)
    g = np.array([[1]], dtype=np.uint8)
    for _ in range(m):
        g = np.kron(g, f)
    return g


class TestBetaExpansion:
    def test_n2(self):
        assert np.allclose(beta_expansion_weights(2), [0.0, 1.0])

    def test_n4(self):
        w = beta_expansion_weights(4)
        assert np.allclose(w, [0.0, 1.0, BETA, 1.0 + BETA])
        assert np.allclose(w, [0.0, 1.0, 1.18921, 2.18921], atol=1e-4)

    def test_n8_order(self):
        order = reliability_order(8)
        assert list(order) == [0, 1, 2, 4, 3, 5, 6, 7]

    def test_rejects_non_power_of_two(self):
        for bad in (0, 1, 3, 6, 100):
            with pytest.raises(ValueError):
                beta_expansion_weights(bad)


class TestBuildSpec:
    def test_n8_top4(self):
        spec = build_code_spec(8, 3, [(0, 8, CrcPolynomial(1, 0x1))])
        assert spec.k == 4
        assert list(spec.info_set) == [3, 5, 6, 7]

    def test_rate_quarter_k272(self):
        spec = build_code_spec(1024, 256)
        assert spec.k == 272
        assert spec.effective_rate == pytest.approx(0.25)

    def test_partitioned_crc_layout(self):
        spec = spec_for_rate(4096, 0.5, split_crc=True)
        (seg1, seg2) = spec.crc_layout
        assert (seg1.poly.degree, seg1.poly.coefficients) == CRC6
        assert (seg2.poly.degree, seg2.poly.coefficients) == CRC10
        assert (seg1.lo, seg1.hi, seg2.lo, seg2.hi) == (0, 2048, 2048, 4096)
        assert spec.effective_rate == pytest.approx(0.5)

    def test_sets_partition_n(self):
        spec = build_code_spec(64, 16)
        assert len(spec.info_set) + len(spec.frozen_set) == 64
        assert not set(spec.info_set) & set(spec.frozen_set)

    def test_info_set_is_top_weights(self):
        # dropping the weakest info index for the strongest frozen index
        # must strictly decrease the total weight
        spec = build_code_spec(256, 100)
        w = beta_expansion_weights(256)
        assert w[spec.info_set].min() >= w[spec.frozen_set].max()

    def test_partition_capacity_guard(self):
        # top-16 channels of n=64 all sit in the upper half: partition 1
        # cannot host a CRC-6
        with pytest.raises(ValueError):
            build_code_spec(64, 0, [(0, 32, CrcPolynomial(*CRC6)),
                                    (32, 64, CrcPolynomial(*CRC10))])

    def test_oversized_message_rejected(self):
        with pytest.raises(ValueError):
            build_code_spec(16, 8)  # 8 + 16 CRC bits > 16


class TestCrc:
    def test_zero_message(self):
        assert crc_compute([0] * 16, CrcPolynomial(*CRC16)) == [0] * 16

    def test_check_vector(self):
        bits = np.unpackbits(np.frombuffer(b"123456789", dtype=np.uint8))
        got = crc_compute(bits, CrcPolynomial(*CRC16))
        oracle = crc_long_division(bits, 16, 0x1021)
        assert got == oracle
        value = int("".join(map(str, got)), 2)
        assert value == 0x31C3  # published CRC-16/XMODEM check value

    def test_long_division_oracle_random(self):
        rng = np.random.default_rng(11)
        for deg, coeff in (CRC6, CRC10, CRC16):
            poly = CrcPolynomial(deg, coeff)
            for _ in range(20):
                bits = rng.integers(0, 2, int(rng.integers(1, 120)))
                assert crc_compute(bits, poly) == crc_long_division(
                    bits, deg, coeff)

    def test_verify_roundtrip(self):
        rng = np.random.default_rng(12)
        poly = CrcPolynomial(*CRC16)
        for _ in range(30):
            msg = rng.integers(0, 2, 40)
            framed = np.concatenate([msg, crc_compute(msg, poly)])
            assert crc_verify(framed, poly)

    def test_detects_single_bit_errors(self):
        rng = np.random.default_rng(13)
        for deg, coeff in (CRC6, CRC10, CRC16):
            poly = CrcPolynomial(deg, coeff)
            span = 64 - deg
            msg = rng.integers(0, 2, span)
            framed = np.concatenate([msg, crc_compute(msg, poly)])
            for i in range(len(framed)):
                bad = framed.copy()
                bad[i] ^= 1
                assert not crc_verify(bad, poly)

    def test_crc_matrix_matches_scalar(self):
        rng = np.random.default_rng(14)
        poly = CrcPolynomial(*CRC10)
        mat = crc_matrix(33, poly)
        for _ in range(10):
            msg = rng.integers(0, 2, 33)
            assert list((msg @ mat) & 1) == crc_compute(msg, poly)


class TestEncode:
    def test_first_row(self):
        assert list(polar_transform([1, 0, 0, 0])) == [1, 0, 0, 0]

    def test_last_row_all_ones(self):
        assert list(polar_transform([0, 0, 0, 1])) == [1, 1, 1, 1]

    def test_rows_match_kronecker_oracle(self):
        g = kron_generator(3)
        for i in range(8):
            u = np.zeros(8, dtype=np.uint8)
            u[i] = 1
            assert np.array_equal(polar_transform(u), g[i])

    def test_linearity(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            u1 = rng.integers(0, 2, 64, dtype=np.uint8)
            u2 = rng.integers(0, 2, 64, dtype=np.uint8)
            assert np.array_equal(polar_transform(u1 ^ u2),
                                  polar_transform(u1) ^ polar_transform(u2))

    def test_involution(self):
        rng = np.random.default_rng(6)
        u = rng.integers(0, 2, (5, 128), dtype=np.uint8)
        assert np.array_equal(polar_transform(polar_transform(u)), u)

    def test_encode_checks_length(self):
        spec = build_code_spec(64, 16)
        with pytest.raises(ValueError):
            encode(spec, np.zeros(15, dtype=np.uint8))

    def test_encoded_word_carries_crc(self):
        rng = np.random.default_rng(7)
        spec = spec_for_rate(256, 0.5, split_crc=True)
        msg = rng.integers(0, 2, spec.message_bits, dtype=np.uint8)
        u = polar_transform(encode(spec, msg))
        assert spec.check_all(u)
        assert np.array_equal(spec.extract_message(u), msg)


class TestSerialization:
    def test_roundtrip(self):
        spec = spec_for_rate(256, 0.5, split_crc=True)
        again = CodeSpec.from_text(spec.to_text())
        assert again.n == spec.n and again.k == spec.k
        assert np.array_equal(again.info_set, spec.info_set)
        assert [s.poly for s in again.crc_layout] == \
            [s.poly for s in spec.crc_layout]
