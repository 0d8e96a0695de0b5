"""Analytical cost accounting: operation counts and clock-cycle latency.

Charging rules for fixed-point add/compare/select operations:
  - left traversal (min-sum f): one comparison per produced LLR per path;
  - right traversal (g): one addition per produced LLR per path;
  - special-node PM update: one addition (zero or penalty) per candidate;
  - SPC: one addition per path to initialize the PM, two additions per
    flip candidate to update it;
  - sorter over s metrics: s-1 comparisons plus one selection per metric,
    s^2 combined;
  - bias generation: n additions;
  - list-size check: n comparisons, n-1 additions in the adder tree, one
    comparison against the count threshold.
"""

import math
from dataclasses import dataclass

from .sc_kernel import GENERIC, LEAF_INFO, RATE0, RATE1, REP, SPC


@dataclass
class OpCounter:
    additions: int = 0
    comparisons: int = 0
    selections: int = 0

    @property
    def total(self):
        return self.additions + self.comparisons + self.selections

    def __iadd__(self, other):
        self.additions += other.additions
        self.comparisons += other.comparisons
        self.selections += other.selections
        return self

    def scaled(self, factor):
        return OpCounter(self.additions * factor,
                         self.comparisons * factor,
                         self.selections * factor)


def charge_ops(event, counter):
    """Apply one decode-step charge; event is a (kind, size) pair."""
    kind, size = event
    if kind == "left_traversal":
        counter.comparisons += size
    elif kind == "right_traversal":
        counter.additions += size
    elif kind == "pm_update":
        counter.additions += size
    elif kind == "spc_init":
        counter.additions += size
    elif kind == "spc_update":
        counter.additions += 2 * size
    elif kind == "sorter":
        counter.comparisons += size * (size - 1)
        counter.selections += size
    elif kind == "bias":
        counter.additions += size
    elif kind == "ida":
        counter.comparisons += size + 1
        counter.additions += size - 1
    else:
        raise ValueError("unknown op event %r" % (kind,))
    return counter


def _visit_ops(node, L, active, counter):
    """Mirror of the list decoder's control flow; returns the path count."""
    if node.kind == GENERIC:
        h = node.length // 2
        charge_ops(("left_traversal", h * active), counter)
        active = _visit_ops(node.left, L, active, counter)
        charge_ops(("right_traversal", h * active), counter)
        active = _visit_ops(node.right, L, active, counter)
        return active
    if node.kind == RATE0:
        charge_ops(("pm_update", node.length * active), counter)
        return active
    if node.kind == REP:
        charge_ops(("pm_update", 2 * node.length * active), counter)
        charge_ops(("sorter", 2 * active), counter)
        return min(2 * active, L)
    if node.kind in (RATE1, LEAF_INFO):
        steps = 1 if node.kind == LEAF_INFO else min(L - 1, node.length)
        for _ in range(steps):
            charge_ops(("pm_update", 2 * active), counter)
            charge_ops(("sorter", 2 * active), counter)
            active = min(2 * active, L)
        return active
    if node.kind == SPC:
        charge_ops(("spc_init", active), counter)
        for _ in range(min(L, node.length) - 1):
            charge_ops(("spc_update", active), counter)
            charge_ops(("sorter", 2 * active), counter)
            active = min(2 * active, L)
        return active
    raise ValueError("unknown node kind %r" % (node.kind,))


def schedule_ops(root, L, init_active=1):
    """Static per-attempt operation count of one subtree walk.

    Counts are data-independent: the traversal order, branching points and
    path-count evolution are fixed by the schedule and the list size.
    """
    counter = OpCounter()
    active = _visit_ops(root, L, init_active, counter)
    return counter, active


@dataclass
class LatencyModel:
    """Per-node cycle costs; traversal and re-encode steps take one cycle."""
    rate0: int = 1
    repetition: int = 1
    traversal: int = 1
    reencode: int = 1

    def node_cycles(self, node, L):
        if node.kind == RATE0:
            return self.rate0
        if node.kind == REP:
            return self.repetition
        if node.kind in (RATE1, LEAF_INFO):
            return 1 if node.kind == LEAF_INFO else min(L - 1, node.length)
        if node.kind == SPC:
            return min(L, node.length)
        raise ValueError("not a leaf node")


def ida_cycles(n):
    """One cycle of LLR compares, log2(n) adder-tree cycles, one threshold."""
    return 2 + int(math.log2(n))


def latency_cycles(root, model, L, with_ida=False):
    """Total decode cycles plus the cycles before the first information bit.

    Returns (total, delta, overhead) where overhead is the extra latency of
    running the list-size check in parallel with decoding: it only appears
    when the check (ida_cycles) outlasts delta.
    """
    state = {"cycles": 0, "delta": None}

    def contains_info(node):
        return node.kind != RATE0

    def walk(node):
        if node.kind != GENERIC:
            if state["delta"] is None and contains_info(node):
                state["delta"] = state["cycles"]
            state["cycles"] += model.node_cycles(node, L)
            return
        state["cycles"] += model.traversal
        walk(node.left)
        state["cycles"] += model.traversal
        walk(node.right)
        state["cycles"] += model.reencode

    walk(root)
    delta = state["delta"] if state["delta"] is not None else state["cycles"]
    n = root.length
    overhead = max(0, ida_cycles(n) - delta) if with_ida else 0
    return state["cycles"], delta, overhead


def complexity_ratio(baseline, candidate):
    """total ops of the baseline / total ops of the candidate."""
    if candidate.total == 0:
        raise ValueError("candidate counter is empty")
    return baseline.total / candidate.total
