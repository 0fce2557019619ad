"""AND-OR search graph: molecule (OR) nodes, reaction (AND) nodes, deduplication.

Molecules are opaque canonical strings. Every node gets a dense integer id in
insertion order; that order is the tie-break key used throughout the package.
Cycles are allowed unless the graph was created with ``acyclic=True``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union

from .errors import CycleError, InvalidInputError, NotFoundError, StateError

Molecule = str

OPEN = "open"
EXPANDED = "expanded"
DEAD = "dead"


@dataclass(slots=True)
class MoleculeNode:
    id: int
    molecule: Molecule
    purchasable: bool
    status: str
    s: float = 0.0
    grad: float = 0.0
    reaction_children: list[int] = field(default_factory=list)
    reaction_parents: list[int] = field(default_factory=list)

    kind = "molecule"

    @property
    def is_open(self) -> bool:
        return self.status == OPEN

    def predecessors(self) -> list[int]:
        return self.reaction_parents

    def successors(self) -> list[int]:
        return self.reaction_children


@dataclass(slots=True)
class ReactionNode:
    id: int
    product: int
    reactants: list[int]
    feasibility: float
    rank: int
    score: Optional[float] = None
    s: float = 0.0
    grad: float = 0.0

    kind = "reaction"

    def predecessors(self) -> list[int]:
        return [self.product]

    def successors(self) -> list[int]:
        return self.reactants


Node = Union[MoleculeNode, ReactionNode]


def canonical(molecule: Molecule) -> Molecule:
    if not isinstance(molecule, str) or not molecule.strip():
        raise InvalidInputError(f"invalid molecule identifier: {molecule!r}")
    return molecule


def _is_purchasable(inventory, molecule: Molecule) -> bool:
    if inventory is None:
        return False
    if hasattr(inventory, "purchasable"):
        return bool(inventory.purchasable(molecule))
    return molecule in inventory


class SearchGraph:
    """Deduplicated, possibly cyclic AND-OR graph rooted at a target molecule."""

    def __init__(self, target: Molecule, inventory=None, acyclic: bool = False):
        self.inventory = inventory
        self.acyclic = acyclic
        self.nodes: list[Node] = []
        self.molecule_index: dict[Molecule, int] = {}
        self.reaction_index: dict[tuple[int, tuple[Molecule, ...]], int] = {}
        self.root = self._new_molecule(canonical(target))

    @property
    def insertion_counter(self) -> int:
        return len(self.nodes)

    def __len__(self) -> int:
        return len(self.nodes)

    def __getitem__(self, node_id: int) -> Node:
        return self.node(node_id)

    def node(self, node_id: int) -> Node:
        if not isinstance(node_id, int) or not 0 <= node_id < len(self.nodes):
            raise NotFoundError(f"no node with id {node_id!r}")
        return self.nodes[node_id]

    def molecule_node(self, node_id: int) -> MoleculeNode:
        n = self.node(node_id)
        if not isinstance(n, MoleculeNode):
            raise InvalidInputError(f"node {node_id} is not a molecule node")
        return n

    def reaction_node(self, node_id: int) -> ReactionNode:
        n = self.node(node_id)
        if not isinstance(n, ReactionNode):
            raise InvalidInputError(f"node {node_id} is not a reaction node")
        return n

    def molecules(self) -> Iterator[MoleculeNode]:
        return (n for n in self.nodes if isinstance(n, MoleculeNode))

    def reactions(self) -> Iterator[ReactionNode]:
        return (n for n in self.nodes if isinstance(n, ReactionNode))

    def find(self, molecule: Molecule) -> Optional[int]:
        return self.molecule_index.get(molecule)

    def counts(self) -> dict[str, int]:
        n_mol = sum(1 for _ in self.molecules())
        return {"molecules": n_mol, "reactions": len(self.nodes) - n_mol}

    def _new_molecule(self, molecule: Molecule) -> int:
        purchasable = _is_purchasable(self.inventory, molecule)
        node = MoleculeNode(
            id=len(self.nodes),
            molecule=molecule,
            purchasable=purchasable,
            status=EXPANDED if purchasable else OPEN,
            s=1.0 if purchasable else 0.0,
        )
        self.nodes.append(node)
        self.molecule_index[molecule] = node.id
        return node.id

    def reaches(self, start: int, goal: int) -> bool:
        """True if ``goal`` is reachable from ``start`` following child edges."""
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            if x == goal:
                return True
            for y in self.nodes[x].successors():
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return False

    def closes_cycle(self, product: int, reactants: Iterable[Molecule]) -> bool:
        for mol in reactants:
            mid = self.molecule_index.get(mol)
            if mid is not None and self.reaches(mid, product):
                return True
        return False

    def add_reaction(
        self,
        product: int,
        reactants: Iterable[Molecule],
        feasibility: float,
        rank: int = 1,
        score: Optional[float] = None,
    ) -> tuple[int, list[int]]:
        """Install ``product <- reactants``; returns (reaction id, new molecule ids).

        An existing (product, reactant set) signature is returned unchanged.
        """
        prod = self.molecule_node(product)
        names = [canonical(m) for m in reactants]
        if not names:
            raise InvalidInputError("a reaction needs at least one reactant")
        if len(set(names)) != len(names):
            raise InvalidInputError(f"duplicate reactants in reaction: {names}")
        if not 0.0 < feasibility <= 1.0:
            raise InvalidInputError(f"feasibility must lie in (0, 1], got {feasibility}")
        if not isinstance(rank, int) or rank < 1:
            raise InvalidInputError(f"rank must be a positive integer, got {rank!r}")

        key = (product, tuple(sorted(names)))
        if key in self.reaction_index:
            return self.reaction_index[key], []
        if self.acyclic and self.closes_cycle(product, names):
            raise CycleError(f"reaction {prod.molecule} <- {names} would close a cycle")

        rid = len(self.nodes)
        rxn = ReactionNode(id=rid, product=product, reactants=[], feasibility=float(feasibility),
                           rank=rank, score=score)
        self.nodes.append(rxn)
        self.reaction_index[key] = rid
        prod.reaction_children.append(rid)

        created = []
        for name in names:
            mid = self.molecule_index.get(name)
            if mid is None:
                mid = self._new_molecule(name)
                created.append(mid)
            rxn.reactants.append(mid)
            self.nodes[mid].reaction_parents.append(rid)
        return rid, created

    def open_nodes(self) -> list[int]:
        return [n.id for n in self.nodes if isinstance(n, MoleculeNode) and n.status == OPEN]

    def mark_expanded(self, m: int) -> None:
        node = self.molecule_node(m)
        if node.status != OPEN:
            raise StateError(f"molecule node {m} is not open (status={node.status})")
        node.status = EXPANDED

    def mark_dead(self, m: int) -> None:
        node = self.molecule_node(m)
        if node.status != OPEN:
            raise StateError(f"molecule node {m} is not open (status={node.status})")
        node.status = DEAD
        node.s = 0.0

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for n in self.nodes:
            for c in n.successors():
                out.append((n.id, c))
        return out


def new_graph(target: Molecule, inventory=None, acyclic: bool = False) -> SearchGraph:
    return SearchGraph(target, inventory, acyclic=acyclic)


def add_reaction(g: SearchGraph, product: int, reactants, feasibility: float, rank: int = 1,
                 score: Optional[float] = None) -> tuple[int, list[int]]:
    return g.add_reaction(product, reactants, feasibility, rank, score)


def open_nodes(g: SearchGraph) -> list[int]:
    return g.open_nodes()


def mark_dead(g: SearchGraph, m: int) -> None:
    g.mark_dead(m)


def check_invariants(g: SearchGraph) -> None:
    """Full scan of structural invariants; raises AssertionError on breach."""
    seen_mols = set()
    seen_sigs = set()
    for n in g.nodes:
        if isinstance(n, MoleculeNode):
            assert n.molecule not in seen_mols, f"duplicate molecule {n.molecule}"
            seen_mols.add(n.molecule)
            assert 0.0 <= n.s <= 1.0 and n.grad >= 0.0
            if n.purchasable:
                assert n.s == 1.0 and n.status != OPEN
            if n.status == DEAD:
                assert n.s == 0.0 and not n.reaction_children
            if n.status == OPEN:
                assert not n.purchasable and not n.reaction_children
            for r in n.reaction_children:
                assert isinstance(g.nodes[r], ReactionNode) and g.nodes[r].product == n.id
            for r in n.reaction_parents:
                assert isinstance(g.nodes[r], ReactionNode) and n.id in g.nodes[r].reactants
        else:
            assert isinstance(g.nodes[n.product], MoleculeNode)
            assert n.reactants and len(set(n.reactants)) == len(n.reactants)
            for m in n.reactants:
                assert isinstance(g.nodes[m], MoleculeNode)
            sig = (n.product, tuple(sorted(g.nodes[m].molecule for m in n.reactants)))
            assert sig not in seen_sigs
            seen_sigs.add(sig)
            assert 0.0 <= n.s <= 1.0 and n.grad >= 0.0
