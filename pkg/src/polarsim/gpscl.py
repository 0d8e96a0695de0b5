"""Generalized partitioned SCL decoding and the memory-bit model.

List decoding runs inside each of P partitions with list size L; at every
partition boundary only S paths survive and seed the next partition.
Survivors are ranked with CRC-passing candidates first (by metric inside
each class), so when fewer than S paths pass the partition CRC the rest
are filled with the lowest-metric failures.  The decoder returns S
complete codewords ranked by the last partition's CRC.
"""

from dataclasses import dataclass

import numpy as np

from .code_spec import polar_transform
from .cost_models import OpCounter, charge_ops, schedule_ops
from .scl_core import ListEngine, _RunState, _single_trace
from .sc_kernel import classify_span


@dataclass(frozen=True)
class PartitionPlan:
    P: int
    S: int

    def __post_init__(self):
        if self.P < 1 or self.P & (self.P - 1):
            raise ValueError("partition count must be a power of two")
        if self.S < 1:
            raise ValueError("need at least one crossover path")

    def boundaries(self, n):
        span = n // self.P
        return [(i * span, (i + 1) * span) for i in range(self.P)]


def memory_bits(kind, n, L, P=None, S=None, profile=None):
    """Decoder memory in bits under a quantization profile.

    scl:    n*Q_LLR + (n-1)*L*Q_a + L*Q_PM + (2n-1)*L
    gpscl:  the top log2(P) tree levels hold only S paths; each partition
            holds L paths of a length-(n/P) subtree.
    """
    q_llr = profile.received_llr.total_bits
    q_a = profile.internal_llr.total_bits
    q_pm = profile.path_metric.total_bits
    if kind == "scl":
        return n * q_llr + (n - 1) * L * q_a + L * q_pm + (2 * n - 1) * L
    if kind == "gpscl":
        top = S * sum(n // 2 ** i for i in range(1, P.bit_length()))
        return (n * q_llr + (top + L * (n // P - 1)) * q_a + L * q_pm
                + top + L * (2 * n // P - 1))
    raise ValueError("unknown decoder kind %r" % (kind,))


class GpsclEngine:
    """Batched partitioned list decoder (P of 1 or 2)."""

    def __init__(self, spec, plan, L, opts=None):
        if plan.S > L:
            raise ValueError("crossover paths S=%d exceed list size %d"
                             % (plan.S, L))
        if plan.P > 2:
            raise NotImplementedError("decoding is implemented for P <= 2")
        if plan.P > 1 and len(spec.crc_layout) != plan.P:
            raise ValueError("plan needs one CRC segment per partition")
        self.spec = spec
        self.plan = plan
        self.L = L
        self.core = ListEngine(spec, L, opts)
        self.opts = self.core.opts
        if plan.P == 2:
            h = spec.n // 2
            self.left_root = classify_span(spec, 0, h,
                                           fast=self.opts.schedule == "fast")
            self.right_root = classify_span(spec, h, spec.n,
                                            fast=self.opts.schedule == "fast")
            self._locals = []
            for seg in spec.crc_layout:
                self._locals.append((seg.msg_positions - seg.lo,
                                     seg.crc_positions - seg.lo,
                                     seg.check_matrix.astype(np.float32)))
            self.attempt_ops = self._static_ops()
        else:
            self.attempt_ops = self.core.attempt_ops

    def _static_ops(self):
        n, L, S = self.spec.n, self.L, self.plan.S
        counter = OpCounter()
        charge_ops(("left_traversal", n // 2), counter)
        part, active = schedule_ops(self.left_root, L, 1)
        counter += part
        charge_ops(("sorter", active), counter)
        charge_ops(("right_traversal", (n // 2) * S), counter)
        part, active = schedule_ops(self.right_root, L, S)
        counter += part
        charge_ops(("sorter", active), counter)
        return counter

    def _rank_take(self, pm, crc_ok, count):
        B, A = pm.shape
        idx = np.broadcast_to(np.arange(A), (B, A))
        order = np.lexsort((idx, pm, ~crc_ok), axis=-1)
        return order[:, :min(count, A)]

    def _check_local(self, u, part):
        msg_pos, crc_pos, mat = self._locals[part]
        crc = (u[..., msg_pos].astype(np.float32) @ mat).astype(np.int64) & 1
        return np.all(crc == u[..., crc_pos], axis=-1)

    def decode_batch(self, llrs):
        core = self.core
        llrs = np.asarray(llrs, dtype=core.dtype)
        if llrs.ndim == 1:
            llrs = llrs[None, :]
        if llrs.shape[-1] != self.spec.n:
            raise ValueError("LLR vector length %d != code length %d"
                             % (llrs.shape[-1], self.spec.n))
        if self.opts.profile is not None:
            llrs = core.quantize_received(llrs)
        B = llrs.shape[0]
        if self.plan.P == 1:
            st = _RunState(B, self.L, dtype=core.dtype, pm_max=core.pm_max)
            cw = core._walk(core.root, llrs[:, None, :], st)
            u = polar_transform(cw)
            sel = self._rank_take(st.pm, self.spec.check_all(u), self.plan.S)
            bidx = np.arange(B)[:, None]
            return self._finish(cw[bidx, sel],
                                np.take_along_axis(st.pm, sel, axis=1), B)
        h = self.spec.n // 2
        a, b = llrs[:, None, :h], llrs[:, None, h:]
        st = _RunState(B, self.L, dtype=core.dtype, pm_max=core.pm_max)
        c1 = core._walk(self.left_root, core.f(a, b), st)
        sel = self._rank_take(st.pm, self._check_local(polar_transform(c1), 0),
                              self.plan.S)
        bidx = np.arange(B)[:, None]
        c1 = c1[bidx, sel]
        pm = np.take_along_axis(st.pm, sel, axis=1)
        if core.pm_max is not None:
            pm = pm - pm.min(axis=1, keepdims=True)
        st2 = _RunState(B, self.L, pm=pm, active=pm.shape[1],
                        dtype=core.dtype, pm_max=core.pm_max)
        st2.checkpoint()
        c2 = core._walk(self.right_root, core.g(a, b, c1), st2)
        mp = st2.restore()
        if mp is not None:
            c1 = st2.take(c1, mp)
        sel = self._rank_take(st2.pm,
                              self._check_local(polar_transform(c2), 1),
                              self.plan.S)
        c1, c2 = c1[bidx, sel], c2[bidx, sel]
        cw = np.concatenate([c1 ^ c2, c2], axis=2)
        return self._finish(cw, np.take_along_axis(st2.pm, sel, axis=1), B)

    def _finish(self, codewords, pms, B):
        trace = self.core.finish(codewords, pms, B)
        # survivors are pre-ranked by the boundary rule; keep that order
        trace.selected = np.zeros(B, dtype=np.int64)
        ops = self.attempt_ops
        trace.ops = np.tile(np.array([ops.additions, ops.comparisons,
                                      ops.selections], dtype=np.int64), (B, 1))
        return trace


def gpscl_decode(llrs, spec, plan, L, options=None):
    """Decode one frame; the trace carries the S returned codewords."""
    engine = GpsclEngine(spec, plan, L, options)
    trace = engine.decode_batch(np.asarray(llrs)[None, :])
    return _single_trace(trace, engine.attempt_ops)
