"""Fixed-point number model for the quantized decoder.

LLRs use sign-magnitude formats (the sign bit counts toward the integer
width), path metrics are unsigned.  Values are rounded to the nearest
representable point (ties away from zero) and saturate at the range
limits instead of wrapping.
"""

from dataclasses import dataclass

import numpy as np

SIGN_MAGNITUDE = "sign-magnitude"
UNSIGNED = "unsigned"


@dataclass(frozen=True)
class FixedPointFormat:
    integer_bits: int   # includes the sign bit for signed formats
    fraction_bits: int
    signedness: str = SIGN_MAGNITUDE

    def __post_init__(self):
        if self.integer_bits < 1 or self.fraction_bits < 0:
            raise ValueError("invalid fixed-point geometry")
        if self.signedness not in (SIGN_MAGNITUDE, UNSIGNED):
            raise ValueError("unknown signedness %r" % (self.signedness,))

    @property
    def step(self):
        return 2.0 ** (-self.fraction_bits)

    @property
    def max_value(self):
        sign_bit = 1 if self.signedness == SIGN_MAGNITUDE else 0
        return 2.0 ** (self.integer_bits - sign_bit) - self.step

    @property
    def min_value(self):
        return -self.max_value if self.signedness == SIGN_MAGNITUDE else 0.0

    @property
    def total_bits(self):
        return self.integer_bits + self.fraction_bits


def quantize(x, fmt):
    """Round to the nearest grid point (ties away from zero), then saturate."""
    x = np.asarray(x, dtype=np.float64)
    mag = np.floor(np.abs(x) / fmt.step + 0.5) * fmt.step
    q = np.where(x < 0, -mag, mag)
    out = np.clip(q, fmt.min_value, fmt.max_value)
    return float(out) if np.ndim(x) == 0 else out


def saturating_add(a, b, fmt):
    """Exact sum clamped to the format range; inputs must be representable."""
    out = np.clip(np.asarray(a, dtype=np.float64) + b, fmt.min_value, fmt.max_value)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class QuantizationProfile:
    received_llr: FixedPointFormat
    internal_llr: FixedPointFormat
    path_metric: FixedPointFormat

    @property
    def epsilon(self):
        """Worst-case rounding error: half the received-LLR grid step."""
        return self.received_llr.step / 2.0


def profile_for(n, rate):
    """Bit-widths used by the quantized decoders, keyed by (n, rate).

    Received LLR (4,2) and internal LLR (6,2) sign-magnitude throughout;
    path metric (7,2) unsigned except (8,2) for n=8192 at rate 0.25.
    """
    pm_int = 8 if (n == 8192 and abs(rate - 0.25) < 1e-9) else 7
    return QuantizationProfile(
        received_llr=FixedPointFormat(4, 2, SIGN_MAGNITUDE),
        internal_llr=FixedPointFormat(6, 2, SIGN_MAGNITUDE),
        path_metric=FixedPointFormat(pm_int, 2, UNSIGNED))
