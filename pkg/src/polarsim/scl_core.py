"""Fast SCL decoding with list management.

The engine decodes a batch of frames at once: every per-path array carries
a leading (batch, path) shape and the traversal schedule is shared by all
frames, so the hot loops are plain numpy.  Path branching uses lazy
copy-on-branch bookkeeping: each recursion level checkpoints the path
permutation and re-gathers its local buffers when a child returns.

Path metrics use the hardware add-compare-select rule by default (penalty
|LLR| on a sign mismatch); the exact log-likelihood rule is kept for
ML-oracle tests and is only available with the bit-by-bit schedule.
SPC nodes support both the list-sphere metric and its exact calibration.
"""

import json
from dataclasses import dataclass

import numpy as np

from .code_spec import polar_transform
from .cost_models import OpCounter, schedule_ops
from .sc_kernel import (GENERIC, LEAF_INFO, RATE0, RATE1, REP, SPC,
                        classify_tree)


@dataclass(frozen=True)
class DecodeOptions:
    pm_mode: str = "approx"      # approx | exact
    spc_variant: str = "exact"   # exact | approx
    schedule: str = "fast"       # fast | bitwise
    profile: object = None       # QuantizationProfile or None

    def __post_init__(self):
        if self.pm_mode not in ("approx", "exact"):
            raise ValueError("unknown pm_mode %r" % (self.pm_mode,))
        if self.spc_variant not in ("exact", "approx"):
            raise ValueError("unknown spc_variant %r" % (self.spc_variant,))
        if self.schedule not in ("fast", "bitwise"):
            raise ValueError("unknown schedule %r" % (self.schedule,))
        if self.schedule == "fast" and self.pm_mode == "exact":
            raise ValueError("exact path metrics require the bitwise schedule")


def pm_update_bit(pm, llr, decision, mode="approx"):
    """Single-bit path metric update.

    approx: add |llr| when the sign contradicts the decision, else nothing;
    exact: add ln(1 + exp(-(1 - 2*decision) * llr)).
    """
    if mode == "approx":
        agree = (1.0 - 2.0 * decision) * llr >= 0
        return pm if agree else pm + abs(llr)
    if mode == "exact":
        return pm + float(np.logaddexp(0.0, -(1.0 - 2.0 * decision) * llr))
    raise ValueError("unknown pm mode %r" % (mode,))


def sort_and_prune(pms, L):
    """Indices of the L smallest metrics; ties keep the lower index."""
    if len(pms) == 0:
        raise ValueError("no candidates to prune")
    order = np.argsort(np.asarray(pms), kind="stable")
    return order[:min(L, len(order))]


def decode_rate0_node(alpha, pm0=0.0, pm_mode="approx"):
    """Single continuation: all-zero bits, PM penalized by contradictions."""
    alpha = np.asarray(alpha, dtype=np.float64)
    if pm_mode == "approx":
        pen = float(np.where(alpha < 0, -alpha, 0.0).sum())
    else:
        pen = float(np.logaddexp(0.0, -alpha).sum())
    return [(pm0 + pen, np.zeros(len(alpha), dtype=np.uint8))]


def decode_rep_node(alpha, pm0=0.0):
    """Two continuations: the all-zero and all-one hypotheses."""
    alpha = np.asarray(alpha, dtype=np.float64)
    pen0 = float(np.where(alpha < 0, -alpha, 0.0).sum())
    pen1 = float(np.where(alpha > 0, alpha, 0.0).sum())
    n = len(alpha)
    return [(pm0 + pen0, np.zeros(n, dtype=np.uint8)),
            (pm0 + pen1, np.ones(n, dtype=np.uint8))]


def decode_rate1_node(alpha, L, pm0=0.0):
    """Hard decision plus flips over the min(L-1, N_v) least-reliable bits."""
    alpha = np.asarray(alpha, dtype=np.float64)
    order = np.argsort(np.abs(alpha), kind="stable")
    base = (alpha < 0).astype(np.uint8)
    q = min(L - 1, len(alpha))
    cands = [(pm0, base)]
    for t in range(q):
        pos = order[t]
        pen = abs(alpha[pos])
        new = []
        for pm, beta in cands:
            flipped = beta.copy()
            flipped[pos] ^= 1
            new.append((pm + pen, flipped))
        cands.extend(new)
    return cands


def decode_spc_node(alpha, L, pm_variant="exact", pm0=0.0):
    """Even-parity candidates over the min(L, N_v) least-reliable bits.

    The least-reliable bit closes the parity; the remaining min(L, N_v) - 1
    positions branch freely.  The approximate metric charges
    |a_i| + (-1)^Gamma * |a_min| per flip; the exact one charges
    |a_i| - (-1)^Gamma * (-1)^wt * |a_min| with wt the running flip count,
    which reproduces the Chase metric of the resulting pattern.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    nv = len(alpha)
    if nv < 2:
        raise ValueError("SPC span must cover at least two bits")
    order = np.argsort(np.abs(alpha), kind="stable")
    i_min = order[0]
    a_min = abs(alpha[i_min])
    base = (alpha < 0).astype(np.uint8)
    gamma = int(base.sum()) & 1
    base = base.copy()
    base[i_min] ^= gamma
    sign_g = 1.0 - 2.0 * gamma  # (-1)^Gamma
    cands = [(pm0 + (a_min if gamma else 0.0), base, 0)]
    for t in range(1, min(L, nv)):
        pos = order[t]
        a_t = abs(alpha[pos])
        new = []
        for pm, beta, wt in cands:
            if pm_variant == "approx":
                pen = a_t + sign_g * a_min
            else:
                pen = a_t - sign_g * (-1.0) ** (wt + 1) * a_min
            flipped = beta.copy()
            flipped[pos] ^= 1
            flipped[i_min] ^= 1
            new.append((pm + pen, flipped, wt + 1))
        cands.extend(new)
    return [(pm, beta) for pm, beta, _ in cands]


@dataclass
class BatchTrace:
    """Result of decoding one batch: C candidates per frame."""
    codewords: np.ndarray    # (B, C, n) uint8
    messages: np.ndarray     # (B, C, message_bits) uint8
    pms: np.ndarray          # (B, C)
    crc_ok: np.ndarray       # (B, C) all-partition verdict
    crc_last: np.ndarray     # (B, C) last-partition verdict
    selected: np.ndarray     # (B,) candidate index returned
    ops: np.ndarray          # (B, 3) additions/comparisons/selections
    list_size: np.ndarray    # (B,) list size used


@dataclass
class AttemptTrace:
    """Single-frame view of one decoding attempt."""
    codewords: np.ndarray
    messages: np.ndarray
    pms: np.ndarray
    crc_ok: np.ndarray
    crc_last: np.ndarray
    selected: int
    ops: OpCounter
    list_size: int

    @property
    def codeword(self):
        return self.codewords[self.selected]

    @property
    def message(self):
        return self.messages[self.selected]

    @property
    def crc_passed(self):
        return bool(self.crc_ok[self.selected])

    def to_json(self):
        return json.dumps({
            "codewords": self.codewords.tolist(),
            "messages": self.messages.tolist(),
            "pms": [float(p) for p in self.pms],
            "crc_ok": self.crc_ok.tolist(),
            "crc_last": self.crc_last.tolist(),
            "selected": int(self.selected),
            "list_size": int(self.list_size),
            "ops": {"additions": self.ops.additions,
                    "comparisons": self.ops.comparisons,
                    "selections": self.ops.selections},
        })


class _RunState:
    """Per-decode list state: metrics, path count, permutation checkpoints."""

    def __init__(self, batch, cap, pm=None, active=1, dtype=np.float32,
                 pm_max=None):
        self.B = batch
        self.cap = cap
        self.active = active
        self.dtype = dtype
        self.pm_max = pm_max
        self.pm = (np.zeros((batch, active), dtype=dtype) if pm is None
                   else np.asarray(pm, dtype=dtype).copy())
        self.stack = []
        self._bidx = np.arange(batch)[:, None]

    def padd(self, pm, pen):
        out = pm + pen
        if self.pm_max is not None:
            np.clip(out, 0.0, self.pm_max, out=out)
        return out

    def take(self, x, par):
        return x[self._bidx, par]

    def checkpoint(self):
        self.stack.append(None)

    def restore(self):
        return self.stack.pop()

    def branch(self, pm_cand):
        """Keep the best min(2A, cap) of the [option-0 | option-1] blocks."""
        two_a = pm_cand.shape[1]
        a = two_a // 2
        keep = min(two_a, self.cap)
        if keep == two_a:
            parent = np.broadcast_to(np.arange(two_a), (self.B, two_a))
            self.pm = pm_cand
        else:
            parent = np.argsort(pm_cand, axis=1, kind="stable")[:, :keep]
            self.pm = np.take_along_axis(pm_cand, parent, axis=1)
        if self.pm_max is not None:
            # saturating metrics are kept relative: only differences drive
            # the sort and the final pick, and rebasing is what makes the
            # narrow metric registers usable on long codes
            self.pm = self.pm - self.pm.min(axis=1, keepdims=True)
        self.active = keep
        par = parent % a
        for i, mp in enumerate(self.stack):
            self.stack[i] = (np.ascontiguousarray(par) if mp is None
                             else np.take_along_axis(mp, par, axis=1))
        return par, parent // a


class ListEngine:
    """Batched fast/bitwise SCL decoder over one code spec."""

    def __init__(self, spec, L, opts=None):
        self.spec = spec
        self.L = L
        self.opts = opts or DecodeOptions()
        self.root = classify_tree(spec, fast=self.opts.schedule == "fast")
        self.dtype = np.float64 if self.opts.pm_mode == "exact" else np.float32
        prof = self.opts.profile
        self.int_max = prof.internal_llr.max_value if prof else None
        self.pm_max = prof.path_metric.max_value if prof else None
        counter, _ = schedule_ops(self.root, L)
        self.attempt_ops = counter

    # soft updates ---------------------------------------------------------

    def f(self, a, b):
        if self.opts.pm_mode == "exact":
            t = np.tanh(a / 2.0) * np.tanh(b / 2.0)
            return 2.0 * np.arctanh(np.clip(t, -1.0 + 1e-16, 1.0 - 1e-16))
        return np.copysign(np.minimum(np.abs(a), np.abs(b)), a * b)

    def g(self, a, b, c):
        out = np.where(c.astype(bool), b - a, b + a)
        if self.int_max is not None:
            np.clip(out, -self.int_max, self.int_max, out=out)
        return out

    def quantize_received(self, llrs):
        fmt = self.opts.profile.received_llr
        x = np.asarray(llrs, dtype=self.dtype)
        mag = np.floor(np.abs(x) / fmt.step + 0.5) * fmt.step
        q = np.where(x < 0, -mag, mag)
        return np.clip(q, fmt.min_value, fmt.max_value)

    # node handlers --------------------------------------------------------

    def _pen_neg(self, alpha):
        """Penalty of deciding bit 0 against each LLR, summed over the node."""
        if self.opts.pm_mode == "exact":
            return np.logaddexp(0.0, -alpha).sum(axis=2)
        return np.where(alpha < 0, -alpha, 0.0).sum(axis=2)

    def _walk(self, node, alpha, st):
        kind = node.kind
        if kind == GENERIC:
            h = node.length // 2
            a, b = alpha[..., :h], alpha[..., h:]
            st.checkpoint()
            c_left = self._walk(node.left, self.f(a, b), st)
            mp = st.restore()
            if mp is not None:
                a, b = st.take(a, mp), st.take(b, mp)
            st.checkpoint()
            c_right = self._walk(node.right, self.g(a, b, c_left), st)
            mp = st.restore()
            if mp is not None:
                c_left = st.take(c_left, mp)
            return np.concatenate([c_left ^ c_right, c_right], axis=2)
        if kind == RATE0:
            st.pm = st.padd(st.pm, self._pen_neg(alpha))
            return np.zeros(alpha.shape[:2] + (node.length,), dtype=np.uint8)
        if kind == LEAF_INFO:
            return self._info_leaf(alpha, st)
        if kind == REP:
            return self._rep(alpha, st)
        if kind == RATE1:
            return self._rate1(alpha, st)
        if kind == SPC:
            return self._spc(alpha, st)
        raise ValueError("unknown node kind %r" % (kind,))

    def _info_leaf(self, alpha, st):
        l = alpha[..., 0]
        if self.opts.pm_mode == "exact":
            pen0 = np.logaddexp(0.0, -l)
            pen1 = np.logaddexp(0.0, l)
        else:
            pen0 = np.where(l < 0, -l, 0.0)
            pen1 = np.where(l > 0, l, 0.0)
        pmc = np.concatenate([st.padd(st.pm, pen0), st.padd(st.pm, pen1)],
                             axis=1)
        _, opt = st.branch(pmc)
        return opt[..., None].astype(np.uint8)

    def _rep(self, alpha, st):
        pen0 = np.where(alpha < 0, -alpha, 0.0).sum(axis=2)
        pen1 = np.where(alpha > 0, alpha, 0.0).sum(axis=2)
        pmc = np.concatenate([st.padd(st.pm, pen0), st.padd(st.pm, pen1)],
                             axis=1)
        _, opt = st.branch(pmc)
        bits = opt[..., None].astype(np.uint8)
        return np.broadcast_to(bits, opt.shape + (alpha.shape[2],)).copy()

    def _rate1(self, alpha, st):
        beta = (alpha < 0).astype(np.uint8)
        q = min(self.L - 1, alpha.shape[2])
        if q == 0:
            return beta
        mag = np.abs(alpha)
        order = np.argsort(mag, axis=2, kind="stable")
        # only the q enumerated positions and penalties ride the prunes
        pos_all = order[..., :q].astype(np.int32)
        pen_all = np.take_along_axis(mag, pos_all, axis=2)
        for t in range(q):
            pmc = np.concatenate(
                [st.pm, st.padd(st.pm, pen_all[..., t])], axis=1)
            par, opt = st.branch(pmc)
            beta = st.take(beta, par)
            pos = st.take(pos_all[..., t], par)
            if t + 1 < q:
                pos_all = st.take(pos_all, par)
                pen_all = st.take(pen_all, par)
            pidx = np.arange(beta.shape[1])[None, :]
            beta[st._bidx, pidx, pos] ^= opt.astype(np.uint8)
        return beta

    def _spc(self, alpha, st):
        mag = np.abs(alpha)
        order = np.argsort(mag, axis=2, kind="stable")
        i_min = order[..., 0].astype(np.int32)
        a_min = np.take_along_axis(mag, i_min[..., None], axis=2)[..., 0]
        beta = (alpha < 0).astype(np.uint8)
        gamma = (beta.sum(axis=2) & 1).astype(np.uint8)
        pidx = np.arange(beta.shape[1])[None, :]
        beta[st._bidx, pidx, i_min] ^= gamma
        st.pm = st.padd(st.pm, np.where(gamma.astype(bool), a_min, 0))
        q = min(self.L, alpha.shape[2])
        if q == 1:
            return beta
        pos_all = order[..., 1:q].astype(np.int32)
        pen_all = np.take_along_axis(mag, pos_all, axis=2)
        sign_g = 1.0 - 2.0 * gamma.astype(self.dtype)  # (-1)^Gamma
        wt = np.zeros_like(gamma, dtype=np.int32)
        exact = self.opts.spc_variant == "exact"
        for t in range(q - 1):
            a_t = pen_all[..., t]
            if exact:
                sgn = sign_g * (1.0 - 2.0 * ((wt + 1) & 1))
                pen2 = -sgn * a_min
            else:
                pen2 = sign_g * a_min
            pm_flip = st.padd(st.padd(st.pm, a_t), pen2)
            pmc = np.concatenate([st.pm, pm_flip], axis=1)
            par, opt = st.branch(pmc)
            beta = st.take(beta, par)
            i_min = st.take(i_min, par)
            pos = st.take(pos_all[..., t], par)
            if t + 2 < q:
                pos_all = st.take(pos_all, par)
                pen_all = st.take(pen_all, par)
            a_min = st.take(a_min, par)
            sign_g = st.take(sign_g, par)
            wt = st.take(wt, par) + opt
            opt8 = opt.astype(np.uint8)
            pidx = np.arange(beta.shape[1])[None, :]
            beta[st._bidx, pidx, pos] ^= opt8
            beta[st._bidx, pidx, i_min] ^= opt8
        return beta

    # decode ---------------------------------------------------------------

    def decode_batch(self, llrs):
        """Decode a (B, n) batch; candidates are the final list paths."""
        llrs = np.asarray(llrs, dtype=self.dtype)
        if llrs.ndim == 1:
            llrs = llrs[None, :]
        if llrs.shape[-1] != self.spec.n:
            raise ValueError("LLR vector length %d != code length %d"
                             % (llrs.shape[-1], self.spec.n))
        if self.opts.profile is not None:
            llrs = self.quantize_received(llrs)
        B = llrs.shape[0]
        st = _RunState(B, self.L, dtype=self.dtype, pm_max=self.pm_max)
        codewords = self._walk(self.root, llrs[:, None, :], st)
        return self.finish(codewords, st.pm, B)

    def finish(self, codewords, pms, B):
        u = polar_transform(codewords)
        crc_ok = self.spec.check_all(u)
        crc_last = (crc_ok if len(self.spec.crc_layout) <= 1
                    else self.spec.check_partition(u, len(self.spec.crc_layout) - 1))
        messages = self.spec.extract_message(u)
        C = codewords.shape[1]
        idx = np.broadcast_to(np.arange(C), (B, C))
        order = np.lexsort((idx, pms, ~crc_ok), axis=1)
        ops = np.tile(np.array([self.attempt_ops.additions,
                                self.attempt_ops.comparisons,
                                self.attempt_ops.selections], dtype=np.int64),
                      (B, 1))
        return BatchTrace(codewords=codewords, messages=messages,
                          pms=pms.astype(np.float64), crc_ok=crc_ok,
                          crc_last=crc_last, selected=order[:, 0],
                          ops=ops, list_size=np.full(B, self.L, dtype=np.int64))


def _single_trace(trace, engine_ops):
    return AttemptTrace(
        codewords=trace.codewords[0], messages=trace.messages[0],
        pms=trace.pms[0], crc_ok=trace.crc_ok[0], crc_last=trace.crc_last[0],
        selected=int(trace.selected[0]), ops=engine_ops,
        list_size=int(trace.list_size[0]))


def scl_decode(llrs, spec, L, options=None):
    """Decode one frame of channel LLRs; returns an AttemptTrace."""
    engine = ListEngine(spec, L, options)
    trace = engine.decode_batch(np.asarray(llrs)[None, :])
    return _single_trace(trace, engine.attempt_ops)
