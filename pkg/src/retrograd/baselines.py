"""Comparison policies: cost-based A*-style selection, naive expected-improvement
selection, and full topological-order s-value recomputation on acyclic graphs."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import CycleError
from .graph import ReactionNode, SearchGraph
from .svalue import SearchParams, _local

TIE_TOL = 1e-12


def reaction_cost(feasibility: float) -> float:
    return -math.log(feasibility)


@dataclass
class CostAnnotations:
    g_cost: dict[int, float] = field(default_factory=dict)
    h_value: dict[int, float] = field(default_factory=dict)

    def value(self, m: int) -> float:
        return self.g_cost.get(m, math.inf) + self.h_value.get(m, 0.0)


def compute_costs(g: SearchGraph) -> CostAnnotations:
    """Minimum cumulative ``-ln f`` from the root to every molecule (Dijkstra)."""
    dist = {g.root: 0.0}
    heap = [(0.0, g.root)]
    done = set()
    while heap:
        d, m = heapq.heappop(heap)
        if m in done:
            continue
        done.add(m)
        for r in g.nodes[m].reaction_children:
            rxn = g.nodes[r]
            nd = d + reaction_cost(rxn.feasibility)
            for x in rxn.reactants:
                if nd < dist.get(x, math.inf):
                    dist[x] = nd
                    heapq.heappush(heap, (nd, x))
    return CostAnnotations(dist, {})


def _argmin_first(items, tol=TIE_TOL) -> Optional[int]:
    items = list(items)
    if not items:
        return None
    best = min(v for _, v in items)
    slack = tol * max(1.0, abs(best)) if math.isfinite(best) else 0.0
    return min(i for i, v in items if v <= best + slack)


def argmax_first(items, tol=TIE_TOL) -> Optional[int]:
    """Id with the largest value; values within ``tol`` of the max tie, smallest id wins."""
    items = list(items)
    if not items:
        return None
    best = max(v for _, v in items)
    return min(i for i, v in items if v >= best - tol * max(1.0, abs(best)))


def retro_star_select(g: SearchGraph, costs: Optional[CostAnnotations] = None) -> Optional[int]:
    costs = compute_costs(g) if costs is None else costs
    return _argmin_first((m, costs.value(m)) for m in g.open_nodes())


def _ancestors(g: SearchGraph, m: int) -> list[int]:
    seen = {m}
    order = []
    frontier = [m]
    while frontier:
        nxt = []
        for x in frontier:
            for y in g.nodes[x].predecessors():
                if y not in seen:
                    seen.add(y)
                    order.append(y)
                    nxt.append(y)
        frontier = nxt
    return order


def hypothetical_root_value(g: SearchGraph, m: int, value: float, p: SearchParams,
                            counter: Optional[list] = None) -> float:
    """s(root) after pinning s(m) to ``value`` and recomputing only m's ancestors.

    Ancestors are visited in topological order (children first); any that sit
    on a cycle are then swept until they stop changing.
    """
    nodes = g.nodes
    if m == g.root:
        return value
    anc = _ancestors(g, m)
    members = set(anc)
    if g.root not in members:
        return nodes[g.root].s
    members.add(m)

    pending = {}
    for x in anc:
        pending[x] = sum(1 for c in nodes[x].successors() if c in members)
    order = []
    stack = []
    for y in nodes[m].predecessors():
        pending[y] -= 1
        if pending[y] == 0:
            stack.append(y)
    while stack:
        x = stack.pop()
        order.append(x)
        for y in nodes[x].predecessors():
            pending[y] -= 1
            if pending[y] == 0:
                stack.append(y)
    cyclic = len(order) < len(anc)
    if cyclic:
        placed = set(order)
        order += [x for x in anc if x not in placed]

    vals = {x: nodes[x].s for x in anc}
    vals[m] = value
    theta_m, theta_r = p.theta_m, p.theta_r
    touched = 0
    for _ in range(p.max_fixed_point_sweeps):
        delta = 0.0
        for x in order:
            node = nodes[x]
            if isinstance(node, ReactionNode):
                v = theta_r * node.feasibility
                for c in node.reactants:
                    v *= vals[c] if c in vals else nodes[c].s
                if v > 1.0:
                    v = 1.0
            else:
                # ancestors are always expanded molecules
                fail = 1.0
                for c in node.reaction_children:
                    fail *= 1.0 - (vals[c] if c in vals else nodes[c].s)
                v = theta_m * (1.0 - fail)
            if cyclic:
                d = abs(v - vals[x])
                if d > delta:
                    delta = d
            vals[x] = v
        touched += len(order)
        if not cyclic or delta < p.fixed_point_tol:
            break
    if counter is not None:
        counter[0] += touched
    return vals[g.root]


def naive_improvement_select(g: SearchGraph, p: SearchParams,
                             counter: Optional[list] = None) -> Optional[int]:
    """Open node whose optimistic expansion (s := 1) raises s(root) the most."""
    return argmax_first(
        (m, hypothetical_root_value(g, m, 1.0, p, counter)) for m in g.open_nodes()
    )


def topo_order(g: SearchGraph) -> list[int]:
    """Nodes with every node after all of its successors; raises CycleError on cycles."""
    nodes = g.nodes
    pending = [len(n.successors()) for n in nodes]
    stack = [i for i, k in enumerate(pending) if k == 0]
    order = []
    while stack:
        x = stack.pop()
        order.append(x)
        for y in nodes[x].predecessors():
            pending[y] -= 1
            if pending[y] == 0:
                stack.append(y)
    if len(order) < len(nodes):
        stuck = [i for i, k in enumerate(pending) if k > 0]
        raise CycleError(f"graph is not acyclic; nodes on or above a cycle: {stuck[:10]}")
    return order


def topo_svalue_update(g: SearchGraph, p: SearchParams) -> int:
    """Recompute every s-value in one reversed-topological pass; returns nodes touched."""
    nodes = g.nodes
    get = lambda i: nodes[i].s  # noqa: E731
    order = topo_order(g)
    for x in order:
        nodes[x].s = _local(g, x, get, p, p.s0)
    return len(order)

