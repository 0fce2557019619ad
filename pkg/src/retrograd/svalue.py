"""Differentiable success-probability approximation (s-values).

A molecule's s-value is 1 if purchasable, ``s0`` while open, 0 once dead, and
otherwise ``theta_m * (1 - prod(1 - s(R)))`` over its child reactions. A
reaction's s-value is ``min(1, theta_r * f(R) * prod(s(M)))`` over its reactants.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Optional

from .errors import InvalidInputError, StateError
from .graph import DEAD, OPEN, MoleculeNode, ReactionNode, SearchGraph


@dataclass(frozen=True)
class SearchParams:
    s0: float = 0.05
    theta_m: float = 1.0
    theta_r: float = 1.0
    eval_s0: float = 0.0
    max_fixed_point_sweeps: int = 10_000
    fixed_point_tol: float = 1e-13

    def __post_init__(self):
        if not 0.0 <= self.s0 < 1.0:
            raise InvalidInputError(f"s0 must lie in [0, 1), got {self.s0}")
        if not 0.0 < self.theta_m <= 1.0:
            raise InvalidInputError(f"theta_m must lie in (0, 1], got {self.theta_m}")
        if not self.theta_r >= 1.0:
            raise InvalidInputError(f"theta_r must be >= 1, got {self.theta_r}")
        if not 0.0 <= self.eval_s0 <= 1.0:
            raise InvalidInputError(f"eval_s0 must lie in [0, 1], got {self.eval_s0}")
        if self.max_fixed_point_sweeps < 1 or self.fixed_point_tol <= 0:
            raise InvalidInputError("fixed-point sweep budget and tolerance must be positive")


def reaction_raw(rxn: ReactionNode, value: Callable[[int], float], p: SearchParams) -> float:
    """Unclamped ``theta_r * f * prod(s(reactants))``."""
    acc = p.theta_r * rxn.feasibility
    for m in rxn.reactants:
        acc *= value(m)
    return acc


def _molecule_value(mol: MoleculeNode, value: Callable[[int], float], p: SearchParams,
                    s0: float) -> float:
    if mol.purchasable:
        return 1.0
    if mol.status == OPEN:
        return s0
    if mol.status == DEAD:
        return 0.0
    if not mol.reaction_children:
        raise StateError(f"expanded molecule node {mol.id} has no reactions and is not dead")
    fail = 1.0
    for r in mol.reaction_children:
        fail *= 1.0 - value(r)
    return p.theta_m * (1.0 - fail)


def _local(g: SearchGraph, x: int, value: Callable[[int], float], p: SearchParams,
           s0: float) -> float:
    node = g.nodes[x]
    if isinstance(node, ReactionNode):
        return min(1.0, reaction_raw(node, value, p))
    return _molecule_value(node, value, p, s0)


def local_s(x: int, g: SearchGraph, p: SearchParams) -> float:
    """Value of node ``x`` from the stored s-values of its successors. Pure."""
    g.node(x)
    nodes = g.nodes
    return _local(g, x, lambda i: nodes[i].s, p, p.s0)


def bottom_up_update(g: SearchGraph, seeds: Iterable[int], p: SearchParams,
                     trace: Optional[list] = None) -> int:
    """Queue-based upward refresh; every node is recomputed at most once.

    Nodes are marked visited when enqueued, so a node reached along several
    paths (or around a cycle) is queued only the first time. Returns the
    number of recomputed nodes.
    """
    seeds = list(seeds)
    for x in seeds:
        g.node(x)
    nodes = g.nodes
    value = lambda i: nodes[i].s  # noqa: E731
    queue = deque()
    visited = set()
    for x in seeds:
        if x not in visited:
            visited.add(x)
            queue.append(x)
    count = 0
    while queue:
        x = queue.popleft()
        node = nodes[x]
        node.s = _local(g, x, value, p, p.s0)
        count += 1
        if trace is not None:
            trace.append(x)
        for y in node.predecessors():
            if y not in visited:
                visited.add(y)
                queue.append(y)
    return count


@dataclass
class FixedPoint:
    values: dict[int, float]
    converged: bool
    sweeps: int
    history: list[dict[int, float]] = field(default_factory=list)

    def __getitem__(self, node_id: int) -> float:
        return self.values[node_id]


def fixed_point_evaluate(g: SearchGraph, p: SearchParams,
                         overrides: Optional[Mapping[int, float]] = None,
                         record_history: bool = False) -> FixedPoint:
    """Synchronous (Jacobi) sweeps of the local rule until values settle.

    Start state: purchasable 1, open ``p.eval_s0``, everything else 0. Each
    sweep recomputes every node from the previous sweep's values. Nodes in
    ``overrides`` are pinned to the given value. Stored s-values are not touched.

    On an acyclic graph sweep ``h`` finalizes every node of height ``h``, so the
    result equals one pass in reversed topological order.
    """
    overrides = dict(overrides or {})
    for x in overrides:
        g.node(x)
    nodes = g.nodes
    cur = []
    for n in nodes:
        if isinstance(n, MoleculeNode) and n.purchasable:
            cur.append(1.0)
        elif isinstance(n, MoleculeNode) and n.status == OPEN:
            cur.append(p.eval_s0)
        else:
            cur.append(0.0)
    for x, v in overrides.items():
        cur[x] = float(v)
    history = []
    value = lambda i: cur[i]  # noqa: E731
    sweeps = 0
    converged = False
    while sweeps < p.max_fixed_point_sweeps:
        nxt = [overrides[x] if x in overrides else _local(g, x, value, p, p.eval_s0)
               for x in range(len(nodes))]
        sweeps += 1
        delta = max((abs(a - b) for a, b in zip(nxt, cur)), default=0.0)
        cur = nxt
        if record_history:
            history.append(dict(enumerate(cur)))
        if delta < p.fixed_point_tol:
            converged = True
            break
    return FixedPoint(dict(enumerate(cur)), converged, sweeps, history)


def refresh_all(g: SearchGraph, p: SearchParams) -> FixedPoint:
    """Write search-mode fixed-point values (open nodes at ``s0``) into the graph."""
    res = fixed_point_evaluate(g, replace(p, eval_s0=p.s0))
    for x, v in res.values.items():
        g.nodes[x].s = v
    return res

