"""Ground-truth successful-synthesis probability (SSP) of a search graph.

Reactions succeed independently with their marginal feasibility; buyability is
deterministic. Under one feasibility sample a molecule succeeds if it is
purchasable, or some feasible child reaction has all reactants succeeding,
taken as a *least* fixed point so that a cycle cannot justify itself.
"""

from __future__ import annotations

import graphlib
import math
from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

from .errors import EnumerationGuardError, InvalidInputError
from .graph import MoleculeNode, ReactionNode, SearchGraph

DEFAULT_GUARD = 20
DEFAULT_MC_SAMPLES = 10_000


def _marginals(g: SearchGraph, feas: Optional[Mapping[int, float]]) -> dict[int, float]:
    out = {r.id: r.feasibility for r in g.reactions()}
    if feas:
        for rid, p in feas.items():
            if rid not in out:
                raise InvalidInputError(f"node {rid} is not a reaction")
            if not 0.0 <= p <= 1.0:
                raise InvalidInputError(f"marginal for reaction {rid} outside [0, 1]: {p}")
            out[rid] = float(p)
    return out


def success_under_sample(g: SearchGraph, fs: Mapping[int, int], target: Optional[int] = None) -> bool:
    """Does ``target`` (default: root) succeed under feasibility assignment ``fs``?"""
    target = g.root if target is None else target
    g.node(target)
    for r in g.reactions():
        if r.id not in fs:
            raise InvalidInputError(f"no feasibility assignment for reaction {r.id}")
    ok = {m.id for m in g.molecules() if m.purchasable}
    for _ in range(len(g.nodes) + 1):
        grew = False
        for r in g.reactions():
            if fs[r.id] and r.product not in ok and all(m in ok for m in r.reactants):
                ok.add(r.product)
                grew = True
        if not grew:
            break
    node = g.nodes[target]
    if isinstance(node, ReactionNode):
        return bool(fs[node.id]) and all(m in ok for m in node.reactants)
    return target in ok


@dataclass
class _Compiled:
    """The part of the graph below a target that can ever succeed, in evaluation order.

    ``blocks`` lists strongly connected components with every block after the
    blocks it depends on; a block of more than one node is iterated to its
    least fixed point.
    """

    mol_ids: list[int]
    rxn_ids: list[int]
    blocks: list[list[int]]
    uncertain: list[int]  # reaction ids with 0 < p < 1
    probs: np.ndarray  # their marginals
    certain: set[int]  # reaction ids with p == 1


def _compile(g: SearchGraph, target: int, marg: dict[int, float]) -> _Compiled:
    seen = {target}
    stack = [target]
    while stack:
        x = stack.pop()
        for y in g.nodes[x].successors():
            if y not in seen:
                seen.add(y)
                stack.append(y)
    # reactions that could ever succeed: least fixed point with every p > 0 switched on
    possible = {x for x in seen if isinstance(g.nodes[x], MoleculeNode) and g.nodes[x].purchasable}
    live_rxn: set[int] = set()
    rxns = sorted(x for x in seen if isinstance(g.nodes[x], ReactionNode) and marg[x] > 0.0)
    grew = True
    while grew:
        grew = False
        for x in rxns:
            r = g.nodes[x]
            if x not in live_rxn and all(m in possible for m in r.reactants):
                live_rxn.add(x)
                possible.add(r.product)
                grew = True
    mol_ids = sorted(x for x in seen if isinstance(g.nodes[x], MoleculeNode))
    rxn_ids = sorted(live_rxn)
    keep = set(mol_ids) | live_rxn
    if target not in keep:
        keep.add(target)

    ids = sorted(keep)
    pos = {x: i for i, x in enumerate(ids)}
    rows, cols = [], []
    for x in ids:
        for y in g.nodes[x].successors():
            if y in pos:
                rows.append(pos[x])
                cols.append(pos[y])
    adj = sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(ids), len(ids)))
    n_comp, labels = csgraph.connected_components(adj, directed=True, connection="strong")
    members: list[list[int]] = [[] for _ in range(n_comp)]
    for i, lab in enumerate(labels):
        members[lab].append(ids[i])
    deps: dict[int, set[int]] = {c: set() for c in range(n_comp)}
    for a, b in zip(rows, cols):
        if labels[a] != labels[b]:
            deps[labels[a]].add(labels[b])
    order = graphlib.TopologicalSorter(deps).static_order()
    blocks = [members[c] for c in order]

    uncertain = [r for r in rxn_ids if marg[r] < 1.0]
    probs = np.array([marg[r] for r in uncertain], dtype=np.float64)
    certain = {r for r in rxn_ids if marg[r] >= 1.0}
    return _Compiled(mol_ids, rxn_ids, blocks, uncertain, probs, certain)


def _solve_bits(g: SearchGraph, comp: _Compiled, on: dict[int, int], full: int) -> dict[int, int]:
    """Least fixed point over bitsets; bit ``i`` of every value is sample ``i``."""
    val: dict[int, int] = {}
    live = set(comp.rxn_ids)
    nodes = g.nodes

    def evaluate(x: int) -> int:
        node = nodes[x]
        if isinstance(node, MoleculeNode):
            if node.purchasable:
                return full
            acc = 0
            for r in node.reaction_children:
                acc |= val.get(r, 0)
            return acc
        if x not in live:
            return 0
        acc = on[x]
        for m in node.reactants:
            acc &= val.get(m, 0)
        return acc

    for block in comp.blocks:
        if len(block) == 1:
            val[block[0]] = evaluate(block[0])
            continue
        for x in block:
            val[x] = 0
        changed = True
        while changed:
            changed = False
            for x in block:
                v = evaluate(x)
                if v != val[x]:
                    val[x] = v
                    changed = True
    return val


def _bits_from_bool(row: np.ndarray) -> int:
    return int.from_bytes(np.packbits(row, bitorder="little").tobytes(), "little")


def _bool_from_bits(bits: int, n: int) -> np.ndarray:
    raw = np.frombuffer(bits.to_bytes((n + 7) // 8, "little"), dtype=np.uint8)
    return np.unpackbits(raw, bitorder="little")[:n].astype(bool)


def _run_samples(g: SearchGraph, comp: _Compiled, target: int, assign: np.ndarray) -> int:
    """Bitset of samples (columns of ``assign``) in which ``target`` succeeds."""
    n = assign.shape[1]
    full = (1 << n) - 1
    on = {r: full for r in comp.certain}
    for j, r in enumerate(comp.uncertain):
        on[r] = _bits_from_bool(assign[j])
    return _solve_bits(g, comp, on, full).get(target, 0)


def uncertain_reaction_count(g: SearchGraph, feas: Optional[Mapping[int, float]] = None,
                             target: Optional[int] = None) -> int:
    target = g.root if target is None else target
    return len(_compile(g, target, _marginals(g, feas)).uncertain)


def exact_ssp(g: SearchGraph, feas: Optional[Mapping[int, float]] = None,
              guard: int = DEFAULT_GUARD, target: Optional[int] = None,
              chunk: int = 1 << 16) -> float:
    """Exact success probability of ``target`` (default root) by enumeration.

    Only reactions that lie below the target, can succeed at all and have a
    marginal strictly between 0 and 1 are enumerated; the rest are fixed, which
    leaves the result unchanged. Raises :class:`EnumerationGuardError` when more
    than ``guard`` reactions remain.
    """
    target = g.root if target is None else target
    g.node(target)
    marg = _marginals(g, feas)
    comp = _compile(g, target, marg)
    k = len(comp.uncertain)
    if k > guard:
        raise EnumerationGuardError(
            f"{k} uncertain reactions exceed the enumeration guard of {guard}; use mc_ssp")
    total = 0.0
    n_assign = 1 << k
    shifts = np.arange(k, dtype=np.int64)
    for start in range(0, n_assign, chunk):
        idx = np.arange(start, min(n_assign, start + chunk), dtype=np.int64)
        bits = ((idx[None, :] >> shifts[:, None]) & 1).astype(bool)  # k x chunk
        weights = np.prod(np.where(bits, comp.probs[:, None], 1.0 - comp.probs[:, None]), axis=0)
        hit = _bool_from_bits(_run_samples(g, comp, target, bits), len(idx))
        total += float(np.sum(weights[hit]))
    return min(1.0, max(0.0, total))


def mc_ssp(g: SearchGraph, feas: Optional[Mapping[int, float]] = None,
           n: int = DEFAULT_MC_SAMPLES, seed: int = 0, target: Optional[int] = None,
           chunk: int = 1 << 16) -> tuple[float, float]:
    """Monte-Carlo SSP estimate and its binomial standard error."""
    if n < 1:
        raise InvalidInputError(f"sample count must be >= 1, got {n}")
    target = g.root if target is None else target
    g.node(target)
    comp = _compile(g, target, _marginals(g, feas))
    rng = np.random.default_rng(seed)
    hits = 0
    for start in range(0, n, chunk):
        m = min(chunk, n - start)
        assign = rng.random((len(comp.uncertain), m)) < comp.probs[:, None]
        hits += _run_samples(g, comp, target, assign).bit_count()
    est = hits / n
    return est, math.sqrt(est * (1.0 - est) / n)


def evaluate_graph(g: SearchGraph, guard: int = DEFAULT_GUARD,
                   mc_samples: int = DEFAULT_MC_SAMPLES, seed: int = 0,
                   method: str = "auto") -> dict:
    """Evaluation report: exact when the guard allows (or forced), else Monte Carlo."""
    if method not in ("auto", "exact", "mc"):
        raise InvalidInputError(f"unknown evaluation method {method!r}")
    k = uncertain_reaction_count(g)
    if method == "exact" or (method == "auto" and k <= guard):
        value = exact_ssp(g, guard=guard)
        return {"method": "exact", "value": value, "reactions_enumerated": k}
    est, se = mc_ssp(g, n=mc_samples, seed=seed)
    return {"method": "mc", "value": est, "std_error": se, "n": mc_samples,
            "reactions_enumerated": 0}


def route_sigma_probability(route, feas: Optional[Mapping[int, float]] = None,
                            g: Optional[SearchGraph] = None) -> float:
    """Probability that every reaction of ``route`` is feasible."""
    if g is not None:
        from .routes import validate_route

        validate_route(g, route)
    prob = 1.0
    for rid in route.reactions:
        if feas is not None and rid in feas:
            prob *= feas[rid]
        elif g is not None:
            prob *= g.nodes[rid].feasibility
        else:
            prob *= route.feasibility[rid]
    return prob
