"""BPSK over AWGN: modulation, noise, LLR demodulation, Eb/N0 bookkeeping.

Noise is drawn from counter-based per-frame Philox streams so a sweep is
bit-identical for any worker count, and all decoder arms at one Eb/N0
point see the same noise realizations.
"""

from dataclasses import dataclass

import numpy as np

# stream ids within a frame key
STREAM_DATA = 0
STREAM_PERTURB = 1


@dataclass(frozen=True)
class ChannelConfig:
    ebn0_db: float
    effective_rate: float
    seed: int = 0

    @property
    def sigma(self):
        ebn0 = 10.0 ** (self.ebn0_db / 10.0)
        return float(np.sqrt(1.0 / (2.0 * self.effective_rate * ebn0)))


def modulate(bits):
    """BPSK map: bit 0 -> +1, bit 1 -> -1."""
    return 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)


def point_key(ebn0_db):
    """Stable integer identifying an Eb/N0 grid point (milli-dB, offset)."""
    return int(round(ebn0_db * 1000.0)) + (1 << 21)


def frame_rng(seed, ebn0_db, frame, stream=STREAM_DATA):
    """Per-frame counter-based generator; independent of arm and worker."""
    key = np.array(
        [np.uint64(seed),
         (np.uint64(stream) << np.uint64(56))
         | (np.uint64(point_key(ebn0_db)) << np.uint64(32))
         | np.uint64(frame)],
        dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def transmit(symbols, config, rng=None, frame=0):
    """y = x + n with n ~ Gaussian(0, sigma^2) per real dimension."""
    symbols = np.asarray(symbols, dtype=np.float64)
    if rng is None:
        rng = frame_rng(config.seed, config.ebn0_db, frame)
    return symbols + config.sigma * rng.standard_normal(symbols.shape)


def demodulate_llr(y, sigma):
    """Channel LLRs 2y/sigma^2; positive favors bit 0."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return 2.0 * np.asarray(y) / (sigma * sigma)
