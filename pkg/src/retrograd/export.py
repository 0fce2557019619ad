"""JSON and Graphviz DOT serialization of search graphs."""

from __future__ import annotations

import json
from dataclasses import asdict
from typing import Iterable, Optional

from .errors import InvalidInputError
from .graph import MoleculeNode, ReactionNode, SearchGraph

FORMAT_VERSION = 1


def graph_to_dict(g: SearchGraph, params=None) -> dict:
    nodes = []
    for n in g.nodes:
        if isinstance(n, MoleculeNode):
            nodes.append({
                "id": n.id, "kind": "molecule", "canonical": n.molecule,
                "purchasable": n.purchasable, "status": n.status, "s": n.s, "grad": n.grad,
            })
        else:
            nodes.append({
                "id": n.id, "kind": "reaction",
                "signature": [g.nodes[n.product].molecule,
                              sorted(g.nodes[m].molecule for m in n.reactants)],
                "feasibility": n.feasibility, "rank": n.rank, "score": n.score,
                "s": n.s, "grad": n.grad,
            })
    doc = {"version": FORMAT_VERSION, "root": g.root, "nodes": nodes,
           "edges": [list(e) for e in g.edges()]}
    if params is not None:
        doc["params"] = asdict(params) if not isinstance(params, dict) else dict(params)
    return doc


def dumps(doc) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def graph_to_json(g: SearchGraph, params=None) -> str:
    return dumps(graph_to_dict(g, params))


def graph_from_dict(doc: dict) -> SearchGraph:
    """Rebuild a graph (structure, status and stored s/D values) from its JSON form."""
    try:
        nodes = sorted(doc["nodes"], key=lambda n: n["id"])
        root = doc["root"]
        edges = doc["edges"]
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"malformed graph document: missing {exc}") from None
    if not nodes or nodes[0]["id"] != 0 or [n["id"] for n in nodes] != list(range(len(nodes))):
        raise InvalidInputError("graph document node ids must be dense from 0")
    g = SearchGraph.__new__(SearchGraph)
    g.inventory = None
    g.acyclic = False
    g.nodes = []
    g.molecule_index = {}
    g.reaction_index = {}
    succ: dict[int, list[int]] = {}
    for a, b in edges:
        succ.setdefault(a, []).append(b)
    for n in nodes:
        if n.get("kind") == "molecule":
            node = MoleculeNode(n["id"], n["canonical"], bool(n["purchasable"]), n["status"],
                                float(n["s"]), float(n["grad"]))
            g.molecule_index[node.molecule] = node.id
        elif n.get("kind") == "reaction":
            node = ReactionNode(n["id"], -1, [], float(n["feasibility"]), int(n["rank"]),
                                n.get("score"), float(n["s"]), float(n["grad"]))
        else:
            raise InvalidInputError(f"node {n.get('id')}: unknown kind {n.get('kind')!r}")
        g.nodes.append(node)
    for a, targets in succ.items():
        for b in targets:
            na, nb = g.nodes[a], g.nodes[b]
            if isinstance(na, MoleculeNode) and isinstance(nb, ReactionNode):
                na.reaction_children.append(b)
                nb.product = a
            elif isinstance(na, ReactionNode) and isinstance(nb, MoleculeNode):
                na.reactants.append(b)
                nb.reaction_parents.append(a)
            else:
                raise InvalidInputError(f"edge {a}->{b} does not join a molecule and a reaction")
    for n in g.nodes:
        if isinstance(n, ReactionNode):
            if n.product < 0:
                raise InvalidInputError(f"reaction {n.id} has no product")
            key = (n.product, tuple(sorted(g.nodes[m].molecule for m in n.reactants)))
            g.reaction_index[key] = n.id
    g.root = int(root)
    return g


def graph_from_json(text: str) -> SearchGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return graph_from_dict(doc)


def _fmt(x: float) -> str:
    return f"{x:.4g}"


def _quote(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return '"' + escaped + '"'


def to_dot(g: SearchGraph, highlight: Optional[Iterable[int]] = None) -> str:
    """DOT text: molecules as ellipses, reactions as boxes, each labelled with s and D.

    Purchasable molecules are green, dead ones grey, and ``highlight`` (for
    example the nodes of the best route) blue.
    """
    marked = set(highlight or ())
    lines = ["digraph search {", "  rankdir=TB;", '  node [fontname="Helvetica"];']
    for n in g.nodes:
        if isinstance(n, MoleculeNode):
            label = f"{n.molecule}\ns={_fmt(n.s)} D={_fmt(n.grad)}"
            attrs = ["shape=ellipse"]
            if n.purchasable:
                attrs += ["style=filled", "fillcolor=palegreen"]
            elif n.status == "dead":
                attrs += ["style=filled", "fillcolor=gray70"]
            elif n.status == "open":
                attrs += ["style=dashed"]
            if n.id == g.root:
                attrs.append("penwidth=2")
        else:
            label = f"R{n.id} f={_fmt(n.feasibility)}\ns={_fmt(n.s)} D={_fmt(n.grad)}"
            attrs = ["shape=box"]
        if n.id in marked:
            attrs = [a for a in attrs if not a.startswith(("style=", "fillcolor="))]
            attrs += ["style=filled", "fillcolor=lightblue"]
        lines.append(f"  n{n.id} [label={_quote(label)}, {', '.join(attrs)}];")
    for a, b in g.edges():
        lines.append(f"  n{a} -> n{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"
