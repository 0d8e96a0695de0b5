"""Multi-attempt decoding wrappers: RPE, PE, and BE enhancement.

After a failed attempt the received symbols are re-perturbed and decoded
again, up to T attempts.  RPE adds Gaussian noise everywhere.  PE biases
the all-disagreed positions toward the list consensus (all-agreed too on
the final attempt) and adds Gaussian noise elsewhere except partially
agreed positions on the last attempt.  BE is PE with every Gaussian
component removed, so it consumes no randomness at all.

Perturbations are always applied to the original received vector, not to
the previously perturbed one.
"""

import math
from dataclasses import dataclass

import numpy as np

from .channel import STREAM_PERTURB, demodulate_llr, frame_rng

ALL_AGREED = 0
ALL_DISAGREED = 1
PARTIALLY_AGREED = 2

SCHEMES = ("rpe", "pe", "be")


@dataclass(frozen=True)
class EnhanceConfig:
    scheme: str
    attempts: int          # T
    sigma_p: float

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError("unknown scheme %r" % (self.scheme,))
        if self.attempts < 1:
            raise ValueError("need at least one attempt")

    @property
    def lam(self):
        """Bias strength |sigma_p / sqrt(2)|."""
        return abs(self.sigma_p) / math.sqrt(2.0)


def classify_agreement(y, codewords):
    """Label each position against the hard decision of y (y >= 0 -> 0).

    all_agreed: every candidate matches the hard decision; all_disagreed:
    candidates are unanimous but contradict it; otherwise partially agreed.
    """
    y = np.asarray(y)
    cw = np.asarray(codewords, dtype=np.uint8)
    hd = (y < 0).astype(np.uint8)
    unanimous = (cw == cw[..., :1, :]).all(axis=-2)
    matches_hd = (cw == hd[..., None, :]).all(axis=-2)
    return np.where(matches_hd, ALL_AGREED,
                    np.where(unanimous, ALL_DISAGREED, PARTIALLY_AGREED))


def make_perturbation(scheme, attempt, T, labels, codeword, lam, sigma_p,
                      rng=None):
    """Perturbation vector for one re-attempt (2 <= attempt <= T)."""
    if not 2 <= attempt <= T:
        raise ValueError("re-attempt index %d outside [2, %d]" % (attempt, T))
    labels = np.asarray(labels)
    n = labels.shape[-1]
    if scheme == "rpe":
        return rng.normal(0.0, sigma_p, size=n)
    if scheme not in ("pe", "be"):
        raise ValueError("unknown scheme %r" % (scheme,))
    bias = lam * (1.0 - 2.0 * np.asarray(codeword, dtype=np.float64))
    if attempt < T:
        bias_mask = labels == ALL_DISAGREED
    else:
        bias_mask = labels != PARTIALLY_AGREED
    p = np.where(bias_mask, bias, 0.0)
    if scheme == "pe":
        noise_mask = (~bias_mask if attempt < T
                      else labels == PARTIALLY_AGREED)
        p = np.where(noise_mask, rng.normal(0.0, sigma_p, size=n), p)
    return p


@dataclass
class FrameOutcome:
    """Per-frame result of a (possibly multi-attempt) decode batch."""
    message: np.ndarray    # (B, message_bits)
    crc_pass: np.ndarray   # (B,) last-partition CRC of the returned word
    attempts: np.ndarray   # (B,)
    ops: np.ndarray        # (B, 3) additions / comparisons / selections
    list_sum: np.ndarray   # (B,) total list size over attempts


class EnhancedDecoder:
    """Wraps constituent decoders with the retry loop over a frame batch."""

    def __init__(self, spec, config, first, second=None, sigma=None):
        self.spec = spec
        self.config = config
        self.first = first
        self.second = second if second is not None else first
        self.sigma = sigma

    def _perturb_rng(self, seed, ebn0_db, frame):
        return frame_rng(seed, ebn0_db, frame, STREAM_PERTURB)

    def decode_frames(self, y, seed=0, ebn0_db=0.0, frames=None):
        """Decode received symbols (B, n); frames index the RNG streams."""
        y = np.atleast_2d(np.asarray(y, dtype=np.float64))
        B, n = y.shape
        if frames is None:
            frames = np.arange(B)
        cfg = self.config
        sigma = self.sigma

        trace = self.first.decode_batch(demodulate_llr(y, sigma))
        rows = np.arange(B)
        message = trace.messages[rows, trace.selected].copy()
        crc_pass = trace.crc_last[rows, trace.selected].copy()
        attempts = np.ones(B, dtype=np.int64)
        ops = trace.ops.copy()
        list_sum = trace.list_size.copy()

        latest = list(trace.codewords)  # per-frame views of the latest list
        pert_rngs = {}
        pending = np.flatnonzero(~crc_pass)
        for attempt in range(2, cfg.attempts + 1):
            if pending.size == 0:
                break
            p = np.empty((pending.size, n))
            for j, fi in enumerate(pending):
                rng = None
                if cfg.scheme != "be":
                    if fi not in pert_rngs:
                        pert_rngs[fi] = self._perturb_rng(seed, ebn0_db,
                                                          int(frames[fi]))
                    rng = pert_rngs[fi]
                labels = classify_agreement(y[fi], latest[fi])
                p[j] = make_perturbation(cfg.scheme, attempt, cfg.attempts,
                                         labels, latest[fi][0],
                                         cfg.lam, cfg.sigma_p, rng)
            sub = self.second.decode_batch(demodulate_llr(y[pending] + p, sigma))
            srows = np.arange(pending.size)
            message[pending] = sub.messages[srows, sub.selected]
            ok = sub.crc_last[srows, sub.selected]
            crc_pass[pending] = ok
            attempts[pending] += 1
            ops[pending] += sub.ops
            ops[pending, 0] += n  # bias application: n additions
            list_sum[pending] += sub.list_size
            for j, fi in enumerate(pending):
                latest[fi] = sub.codewords[j]
            pending = pending[~ok]
        return FrameOutcome(message=message, crc_pass=crc_pass,
                            attempts=attempts, ops=ops, list_sum=list_sum)


def enhanced_decode(y, sigma, spec, config, decoder, second=None, rng=None):
    """Single-frame retry loop; decoder maps channel LLRs to a trace.

    Returns (final AttemptTrace, attempts used, all traces).
    """
    y = np.asarray(y, dtype=np.float64)
    second = second or decoder
    trace = decoder(demodulate_llr(y, sigma))
    traces = [trace]
    attempts = 1
    while not trace.crc_last[trace.selected] and attempts < config.attempts:
        attempts += 1
        labels = classify_agreement(y, traces[-1].codewords)
        p = make_perturbation(config.scheme, attempts, config.attempts,
                              labels, traces[-1].codewords[0],
                              config.lam, config.sigma_p, rng)
        trace = second(demodulate_llr(y + p, sigma))
        traces.append(trace)
    return trace, attempts, traces
