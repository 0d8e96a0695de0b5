"""Core SC tree machinery: soft updates, partial sums, node classification.

The decoding tree is pruned greedily top-down into special nodes (rate-0,
rate-1, repetition, SPC); anything else recurses into generic children.
A plain bit-by-bit schedule (no pruning) is kept for oracle tests, along
with a scalar non-list SC decoder.
"""

from dataclasses import dataclass, field

import numpy as np

from .code_spec import polar_transform

RATE0 = "rate0"
RATE1 = "rate1"
REP = "repetition"
SPC = "spc"
GENERIC = "generic"
LEAF_INFO = "leaf_info"  # bitwise schedule only


def f_update(l_a, l_b, mode="minsum"):
    """Left-branch soft update (check-node combine)."""
    l_a = np.asarray(l_a, dtype=np.float64)
    l_b = np.asarray(l_b, dtype=np.float64)
    if mode == "minsum":
        out = np.copysign(np.minimum(np.abs(l_a), np.abs(l_b)), l_a * l_b)
    elif mode == "exact":
        t = np.tanh(l_a / 2.0) * np.tanh(l_b / 2.0)
        out = 2.0 * np.arctanh(np.clip(t, -1.0 + 1e-16, 1.0 - 1e-16))
    else:
        raise ValueError("unknown f mode %r" % (mode,))
    return float(out) if np.ndim(out) == 0 else out


def g_update(l_a, l_b, partial_sum):
    """Right-branch soft update: (1 - 2c) * l_a + l_b."""
    c = np.asarray(partial_sum)
    out = (1.0 - 2.0 * c) * np.asarray(l_a, dtype=np.float64) + l_b
    return float(out) if np.ndim(out) == 0 else out


def propagate_hard(hard, stage):
    """One hard-decision butterfly: left halves XOR their right partners.

    hard has length n on the last axis; stage counts from 1 with
    half-width 2^(stage-1), matching the recursion step size.
    """
    x = np.array(hard, dtype=np.uint8)
    h = 1 << (stage - 1)
    n = x.shape[-1]
    lead = x.shape[:-1]
    x = x.reshape(lead + (n // (2 * h), 2, h))
    x[..., 0, :] ^= x[..., 1, :]
    return x.reshape(lead + (n,))


def propagate_all(hard):
    """Full propagation from stage-1 decisions to the codeword stage."""
    return polar_transform(hard)


@dataclass
class NodeClass:
    kind: str
    stage: int       # subtree height; length = 2^stage
    offset: int      # first leaf index covered
    length: int
    left: "NodeClass" = field(default=None, repr=False)
    right: "NodeClass" = field(default=None, repr=False)


def _classify(frozen, stage, offset, fast):
    length = len(frozen)
    if fast:
        total = int(frozen.sum())
        if total == length:
            return NodeClass(RATE0, stage, offset, length)
        if total == 0:
            return NodeClass(RATE1, stage, offset, length)
        if total == length - 1 and not frozen[-1]:
            return NodeClass(REP, stage, offset, length)
        if total == 1 and frozen[0]:
            return NodeClass(SPC, stage, offset, length)
    if length == 1:
        kind = RATE0 if frozen[0] else LEAF_INFO
        return NodeClass(kind, stage, offset, length)
    h = length // 2
    node = NodeClass(GENERIC, stage, offset, length)
    node.left = _classify(frozen[:h], stage - 1, offset, fast)
    node.right = _classify(frozen[h:], stage - 1, offset + h, fast)
    return node


def classify_tree(spec, fast=True):
    """Pruned decoding schedule for the whole tree (root NodeClass)."""
    frozen = np.ones(spec.n, dtype=bool)
    frozen[spec.info_set] = False
    return _classify(frozen, spec.m, 0, fast)


def classify_span(spec, lo, hi, fast=True):
    """Schedule for the subtree covering leaf indices [lo, hi)."""
    frozen = np.ones(spec.n, dtype=bool)
    frozen[spec.info_set] = False
    length = hi - lo
    return _classify(frozen[lo:hi], length.bit_length() - 1, lo, fast)


def iter_schedule(node):
    """Leaves of the schedule in decoding order."""
    if node.kind == GENERIC:
        yield from iter_schedule(node.left)
        yield from iter_schedule(node.right)
    else:
        yield node


def sc_decode(llrs, spec, mode="minsum"):
    """Plain successive cancellation; returns the estimated u vector."""
    frozen = np.ones(spec.n, dtype=bool)
    frozen[spec.info_set] = False

    def walk(alpha, lo):
        if len(alpha) == 1:
            u = 0 if frozen[lo] else int(alpha[0] < 0)
            return np.array([u], dtype=np.uint8)
        h = len(alpha) // 2
        c_left = walk(f_update(alpha[:h], alpha[h:], mode), lo)
        c_right = walk(g_update(alpha[:h], alpha[h:], c_left), lo + h)
        return np.concatenate([c_left ^ c_right, c_right])

    codeword = walk(np.asarray(llrs, dtype=np.float64), 0)
    return polar_transform(codeword)
