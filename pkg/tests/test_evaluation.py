import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from retrograd import (EnumerationGuardError, InvalidInputError, SearchParams, evaluate_graph,
                       exact_ssp, fixed_point_evaluate, mc_ssp, route_sigma_probability,
                       success_under_sample)
from retrograd.routes import extract_routes

from builders import build, ids, left_cycle, random_graph, right_cycle, shared_descendant


def brute_force(g, target=None):
    """Sum over every assignment of every reaction; success by naive closure."""
    target = g.root if target is None else target
    rxns = [r for r in g.reactions()]
    total = 0.0
    for bits in itertools.product((0, 1), repeat=len(rxns)):
        w = 1.0
        for r, b in zip(rxns, bits):
            w *= r.feasibility if b else 1.0 - r.feasibility
        ok = {m.id for m in g.molecules() if m.purchasable}
        changed = True
        while changed:
            changed = False
            for r, b in zip(rxns, bits):
                if b and r.product not in ok and all(m in ok for m in r.reactants):
                    ok.add(r.product)
                    changed = True
        node = g.nodes[target]
        if hasattr(node, "feasibility"):
            hit = bits[rxns.index(node)] and all(m in ok for m in node.reactants)
        else:
            hit = target in ok
        total += w * hit
    return total


def test_shared_descendant_exact_values():
    g = shared_descendant()
    m1, m3 = ids(g, "M1", "M3")
    r3 = 1
    assert exact_ssp(g, target=m1) == pytest.approx(0.5, abs=1e-12)
    assert exact_ssp(g, target=r3) == pytest.approx(0.5, abs=1e-12)
    assert exact_ssp(g, target=m3) == pytest.approx(0.5, abs=1e-12)
    assert exact_ssp(g) == pytest.approx(0.5, abs=1e-12)


def test_cycles_do_not_justify_themselves():
    g = left_cycle()
    assert exact_ssp(g) == pytest.approx(0.8, abs=1e-12)
    g = right_cycle()
    m2 = g.find("M2")
    assert exact_ssp(g) == pytest.approx(0.86, abs=1e-12)
    assert exact_ssp(g, target=m2) == pytest.approx(0.76, abs=1e-12)
    # a pure cycle with no way in never succeeds
    g = build("A", [("A", ["B"], 0.9), ("B", ["A"], 0.9)])
    assert exact_ssp(g) == 0.0


@pytest.mark.parametrize("seed", range(25))
def test_exact_matches_brute_force(seed):
    rng = random.Random(seed)
    g = random_graph(rng, max_reactions=10, tree=False, acyclic=rng.random() < 0.5)
    for target in [g.root] + [n.id for n in g.nodes[1:4]]:
        assert exact_ssp(g, target=target) == pytest.approx(brute_force(g, target), abs=1e-12)


def test_success_under_sample_matches_brute_force_closure():
    g = right_cycle()
    rids = [r.id for r in g.reactions()]
    for bits in itertools.product((0, 1), repeat=len(rids)):
        fs = dict(zip(rids, bits))
        # M1 succeeds iff its own reaction, or (M2 route and the link)
        ra, r1, rb, r2 = bits
        assert success_under_sample(g, fs) == bool(ra or (r1 and rb))
    with pytest.raises(InvalidInputError):
        success_under_sample(g, {})


def test_guard():
    g = build("A", [("A", [f"B{i}"], 0.5) for i in range(6)], purchasable={f"B{i}" for i in range(6)})
    assert exact_ssp(g) == pytest.approx(1 - 0.5 ** 6)
    with pytest.raises(EnumerationGuardError):
        exact_ssp(g, guard=5)


def test_override_marginals():
    g = build("A", [("A", ["B"], 0.5)], purchasable={"B"})
    assert exact_ssp(g, {1: 0.25}) == pytest.approx(0.25)
    assert exact_ssp(g, {1: 1.0}) == 1.0
    with pytest.raises(InvalidInputError):
        exact_ssp(g, {0: 0.5})
    with pytest.raises(InvalidInputError):
        exact_ssp(g, {1: 1.5})


def test_mc_is_seeded_and_close():
    g = shared_descendant()
    a = mc_ssp(g, n=20000, seed=4)
    assert a == mc_ssp(g, n=20000, seed=4)
    est, se = a
    assert abs(est - 0.5) <= 4 * se
    with pytest.raises(InvalidInputError):
        mc_ssp(g, n=0)


def test_evaluate_graph_modes():
    g = shared_descendant()
    assert evaluate_graph(g)["method"] == "exact"
    rep = evaluate_graph(g, method="mc", mc_samples=1000, seed=1)
    assert rep["method"] == "mc" and rep["n"] == 1000 and "std_error" in rep
    assert evaluate_graph(g, guard=0)["method"] == "mc"
    with pytest.raises(InvalidInputError):
        evaluate_graph(g, method="bogus")


def test_route_sigma_probability():
    g = shared_descendant()
    routes = extract_routes(g, 5)
    for r in routes:
        assert route_sigma_probability(r, g=g) == pytest.approx(r.probability)
    assert route_sigma_probability(routes[0], {routes[0].reactions[0]: 0.0}) == 0.0


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_fixed_point_is_exact_on_trees(seed):
    g = random_graph(random.Random(seed), max_reactions=12, tree=True)
    fp = fixed_point_evaluate(g, SearchParams(eval_s0=0.0))
    assert fp[g.root] == pytest.approx(exact_ssp(g), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_ssp_monotone_in_graph(seed):
    """Adding a reaction can only raise the root's success probability."""
    rng = random.Random(seed)
    g = random_graph(rng, max_reactions=8, tree=False, acyclic=False)
    before = exact_ssp(g)
    m = rng.choice([n.id for n in g.molecules() if n.status != "dead"])
    g.add_reaction(m, ["fresh-buyable"], 0.5)
    g.nodes[g.find("fresh-buyable")].purchasable = True
    g.nodes[g.find("fresh-buyable")].status = "expanded"
    if g.nodes[m].status == "open":
        g.mark_expanded(m)
    assert exact_ssp(g) >= before - 1e-12
