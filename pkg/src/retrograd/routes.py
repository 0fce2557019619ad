"""Synthesis routes: tree-shaped success certificates inside a search graph."""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass

from .errors import InvalidInputError
from .graph import MoleculeNode, SearchGraph


@dataclass(frozen=True)
class Route:
    """One reaction chosen per non-purchasable molecule, purchasable leaves."""

    root: int
    choice: tuple[tuple[int, int], ...]  # (molecule id, reaction id), sorted
    leaves: tuple[int, ...]
    feasibility: dict

    @property
    def reactions(self) -> tuple[int, ...]:
        return tuple(r for _, r in self.choice)

    @property
    def molecules(self) -> tuple[int, ...]:
        return tuple(sorted({m for m, _ in self.choice} | set(self.leaves)))

    @property
    def nodes(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.molecules) | set(self.reactions)))

    @property
    def probability(self) -> float:
        prob = 1.0
        for r in self.reactions:
            prob *= self.feasibility[r]
        return prob

    def to_dict(self, g: SearchGraph | None = None) -> dict:
        """Nested node-id tree, with molecule names when the graph is given."""
        chosen = dict(self.choice)

        def tree(m):
            out = {"id": m}
            if g is not None:
                out["molecule"] = g.nodes[m].molecule
            if m in chosen:
                r = chosen[m]
                out["reaction"] = {"id": r, "feasibility": self.feasibility[r],
                                   "reactants": [tree(x) for x in _reactants(g, self, r)]}
            return out

        return {"probability": self.probability, "nodes": list(self.nodes), "tree": tree(self.root)}


def _reactants(g, route: Route, r: int):
    if g is not None:
        return g.nodes[r].reactants
    raise InvalidInputError("graph required to render a route tree")


def validate_route(g: SearchGraph, route: Route) -> None:
    """Raise InvalidInputError unless ``route`` is a valid route of ``g``."""
    chosen = dict(route.choice)
    if len(chosen) != len(route.choice):
        raise InvalidInputError("a molecule has two chosen reactions")
    needed = set()
    # iterative DFS; colour 1 = on the current path, 2 = finished
    colour = {}
    order = [(route.root, False)]
    while order:
        m, leaving = order.pop()
        if leaving:
            colour[m] = 2
            continue
        if colour.get(m) == 2:
            continue
        if colour.get(m) == 1:
            raise InvalidInputError(f"route contains a cycle through node {m}")
        node = g.node(m)
        if not isinstance(node, MoleculeNode):
            raise InvalidInputError(f"node {m} is not a molecule")
        needed.add(m)
        colour[m] = 1
        order.append((m, True))
        if m in chosen:
            r = chosen[m]
            if r not in node.reaction_children:
                raise InvalidInputError(f"reaction {r} is not a child of molecule {m}")
            for x in g.nodes[r].reactants:
                if colour.get(x) == 1:
                    raise InvalidInputError(f"route contains a cycle through node {x}")
                order.append((x, False))
        elif not node.purchasable:
            raise InvalidInputError(f"leaf molecule {m} ({node.molecule}) is not purchasable")
    if set(chosen) - needed:
        raise InvalidInputError("route chooses reactions for molecules it never uses")
    leaves = {m for m in needed if m not in chosen}
    if leaves != set(route.leaves):
        raise InvalidInputError("route leaves do not match its structure")


def _reaches(chosen: dict[int, int], g: SearchGraph, start: int, goal: int) -> bool:
    stack = [start]
    seen = {start}
    while stack:
        m = stack.pop()
        if m == goal:
            return True
        r = chosen.get(m)
        if r is None:
            continue
        for x in g.nodes[r].reactants:
            if x not in seen:
                seen.add(x)
                stack.append(x)
    return False


def extract_routes(g: SearchGraph, max_routes: int = 10, max_pops: int = 200_000) -> list[Route]:
    """Complete routes in descending order of their feasibility product.

    Best-first over partial routes: a partial route's product bounds every
    completion from above, so routes come off the heap in exact order. The
    smallest-id unresolved molecule is resolved next, which gives each route a
    single derivation. Choices that would make the route cyclic are skipped.
    """
    if max_routes <= 0:
        return []
    counter = itertools.count()
    heap = [(-1.0, next(counter), (), (g.root,))]
    out: list[Route] = []
    pops = 0
    while heap and len(out) < max_routes and pops < max_pops:
        neg_p, _, choice, pending = heapq.heappop(heap)
        pops += 1
        chosen = dict(choice)
        if not pending:
            mols = {g.root}
            for _, r in choice:
                mols.update(g.nodes[r].reactants)
            leaves = tuple(sorted(m for m in mols if m not in chosen))
            feas = {r: g.nodes[r].feasibility for _, r in choice}
            out.append(Route(g.root, tuple(sorted(choice)), leaves, feas))
            continue
        m = pending[0]
        rest = pending[1:]
        node = g.nodes[m]
        if node.purchasable:
            heapq.heappush(heap, (neg_p, next(counter), choice, rest))
            continue
        for r in node.reaction_children:
            rxn = g.nodes[r]
            if any(_reaches(chosen, g, x, m) for x in rxn.reactants):
                continue
            new_chosen = dict(chosen)
            new_chosen[m] = r
            extra = [x for x in rxn.reactants if x not in new_chosen and x not in rest]
            new_pending = tuple(sorted(set(rest) | set(extra)))
            heapq.heappush(heap, (neg_p * rxn.feasibility, next(counter),
                                  tuple(sorted(new_chosen.items())), new_pending))
    return out


def trivial_route(g: SearchGraph) -> Route:
    return Route(g.root, (), (g.root,), {})
