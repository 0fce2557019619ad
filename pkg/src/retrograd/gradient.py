"""Top-down propagation of D(X) = d s(root) / d s(X)."""

from __future__ import annotations

import heapq
from typing import Optional

from .errors import InvalidInputError
from .graph import MoleculeNode, ReactionNode, SearchGraph
from .svalue import SearchParams, reaction_raw


def partial_reaction_wrt_reactant(r: int, m: int, g: SearchGraph, p: SearchParams) -> float:
    rxn = g.reaction_node(r)
    if m not in rxn.reactants:
        raise InvalidInputError(f"molecule node {m} is not a reactant of reaction {r}")
    nodes = g.nodes
    if reaction_raw(rxn, lambda i: nodes[i].s, p) > 1.0:
        return 0.0
    acc = p.theta_r * rxn.feasibility
    for other in rxn.reactants:
        if other != m:
            acc *= nodes[other].s
    return acc


def partial_molecule_wrt_reaction(mp: int, r: int, g: SearchGraph, p: SearchParams) -> float:
    mol = g.molecule_node(mp)
    if r not in mol.reaction_children:
        raise InvalidInputError(f"reaction node {r} is not a child of molecule node {mp}")
    acc = p.theta_m
    for other in mol.reaction_children:
        if other != r:
            acc *= 1.0 - g.nodes[other].s
    return acc


def reachable_from_root(g: SearchGraph) -> set[int]:
    seen = {g.root}
    stack = [g.root]
    while stack:
        x = stack.pop()
        for y in g.nodes[x].successors():
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return seen


def _reactant_partials(rxn: ReactionNode, nodes, p: SearchParams) -> list[float]:
    """d s(R) / d s(M) for every reactant, in reactant order (0 when clamped)."""
    scale = p.theta_r * rxn.feasibility
    vals = [nodes[m].s for m in rxn.reactants]
    raw = scale
    for v in vals:
        raw *= v
    if raw > 1.0:
        return [0.0] * len(vals)
    k = len(vals)
    if k == 1:
        return [scale]
    prefix = [1.0] * (k + 1)
    for i, v in enumerate(vals):
        prefix[i + 1] = prefix[i] * v
    out = [0.0] * k
    suffix = 1.0
    for i in range(k - 1, -1, -1):
        out[i] = scale * prefix[i] * suffix
        suffix *= vals[i]
    return out


def propagate(g: SearchGraph, p: SearchParams, trace: Optional[list] = None) -> int:
    """Recompute ``grad`` on every node, finalizing each reachable node once.

    Nodes are finalized in topological order (smallest id first among ready
    nodes), so on acyclic graphs D is the exact chain-rule derivative. When a
    cycle blocks progress, the smallest-id node already fed by a finalized
    predecessor is finalized anyway, reading the stored D of its unfinished
    predecessors from the previous call. Unreachable nodes get D = 0.
    Returns the number of finalized nodes.
    """
    nodes = g.nodes
    n = len(nodes)
    reach = [False] * n
    reach[g.root] = True
    stack = [g.root]
    while stack:
        for y in nodes[stack.pop()].successors():
            if not reach[y]:
                reach[y] = True
                stack.append(y)
    pending = [0] * n
    total = 0
    for node in nodes:
        if reach[node.id]:
            total += 1
            pending[node.id] = sum(1 for y in node.predecessors() if reach[y])
        else:
            node.grad = 0.0

    done = [False] * n
    fed = [False] * n
    inflow = [0.0] * n  # contributions from finalized predecessors
    ready = [g.root]
    frontier: list[int] = []
    theta_m = p.theta_m
    count = 0
    while count < total:
        x = -1
        while ready:
            cand = heapq.heappop(ready)
            if not done[cand]:
                x = cand
                break
        if x < 0:
            while frontier:
                cand = heapq.heappop(frontier)
                if not done[cand]:
                    x = cand
                    break
        if x < 0:  # pragma: no cover - every reachable node is fed by the root
            break

        node = nodes[x]
        is_rxn = isinstance(node, ReactionNode)
        if x == g.root:
            d = 1.0
        else:
            d = inflow[x]
            if pending[x] > 0 and not is_rxn:
                # cycle: unfinished predecessors contribute their previous D
                for r in node.reaction_parents:
                    if reach[r] and not done[r]:
                        rxn = nodes[r]
                        d += rxn.grad * _reactant_partials(rxn, nodes, p)[rxn.reactants.index(x)]
        node.grad = d
        done[x] = True
        count += 1
        if trace is not None:
            trace.append(x)

        if is_rxn:
            children = node.reactants
            parts = _reactant_partials(node, nodes, p)
        else:
            children = node.reaction_children
            k = len(children)
            if k == 1:
                parts = [theta_m]
            elif k:
                fails = [1.0 - nodes[r].s for r in children]
                prefix = [1.0] * (k + 1)
                for i, f in enumerate(fails):
                    prefix[i + 1] = prefix[i] * f
                parts = [0.0] * k
                suffix = 1.0
                for i in range(k - 1, -1, -1):
                    parts[i] = theta_m * prefix[i] * suffix
                    suffix *= fails[i]
            else:
                parts = ()
        for y, part in zip(children, parts):
            if done[y]:
                continue
            inflow[y] += d * part
            pending[y] -= 1
            if pending[y] == 0:
                heapq.heappush(ready, y)
            elif not fed[y]:
                fed[y] = True
                heapq.heappush(frontier, y)
    return count


def molecule_gradients(g: SearchGraph) -> dict[int, float]:
    return {n.id: n.grad for n in g.nodes if isinstance(n, MoleculeNode)}
