import random
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from retrograd import (InvalidInputError, SearchParams, fixed_point_evaluate,
                       partial_molecule_wrt_reaction, partial_reaction_wrt_reactant, propagate)
from retrograd.svalue import refresh_all

from builders import build, ids, random_graph, right_cycle, s0_example

P = SearchParams()


def finite_difference(g, leaf, p, eps=1e-5):
    q = replace(p, eval_s0=p.s0)
    base = g.nodes[leaf].s
    hi = fixed_point_evaluate(g, q, overrides={leaf: base + eps})[g.root]
    lo = fixed_point_evaluate(g, q, overrides={leaf: base - eps})[g.root]
    return (hi - lo) / (2 * eps)


def test_adjacent_partials():
    g = build("A", [("A", ["B", "C"], 0.5), ("A", ["D"], 0.4)], purchasable={"B"})
    refresh_all(g, P)
    assert partial_reaction_wrt_reactant(1, 3, g, P) == pytest.approx(0.5)
    assert partial_reaction_wrt_reactant(1, 2, g, P) == pytest.approx(0.5 * 0.05)
    assert partial_molecule_wrt_reaction(0, 1, g, P) == pytest.approx(1 - 0.4 * 0.05)
    with pytest.raises(InvalidInputError):
        partial_reaction_wrt_reactant(1, 5, g, P)
    with pytest.raises(InvalidInputError):
        partial_molecule_wrt_reaction(2, 1, g, P)


def test_clamped_reaction_has_zero_partial():
    g = build("A", [("A", ["B"], 0.8)], purchasable={"B"})
    p = SearchParams(theta_r=2.0)
    refresh_all(g, p)
    assert partial_reaction_wrt_reactant(1, 2, g, p) == 0.0


def test_root_gradient_is_one_and_unreachable_zero():
    g = build("A", [("A", ["B"], 0.5)])
    refresh_all(g, P)
    propagate(g, P)
    assert g.nodes[0].grad == 1.0
    assert g.nodes[2].grad == pytest.approx(0.5)


def test_s0_zero_kills_gradient_of_multi_open_reactions():
    g = s0_example()
    m2, m3, m4 = ids(g, "M2", "M3", "M4")
    p = SearchParams(s0=0.0)
    refresh_all(g, p)
    propagate(g, p)
    assert g.nodes[m2].grad == 0.0 and g.nodes[m3].grad == 0.0
    assert g.nodes[m4].grad > 0.0


def test_propagate_finalizes_each_node_once_on_cycles():
    g = right_cycle()
    refresh_all(g, P)
    trace = []
    n = propagate(g, P, trace)
    assert n == len(trace) == len(set(trace)) == len(g)
    assert all(x.grad >= 0 for x in g.nodes)


@pytest.mark.parametrize("seed", range(30))
def test_finite_differences_on_dags(seed):
    rng = random.Random(seed)
    g = random_graph(rng, max_reactions=14, tree=False, acyclic=True)
    refresh_all(g, P)
    propagate(g, P)
    leaves = [n.id for n in g.molecules() if not n.reaction_children]
    for m in leaves:
        fd = finite_difference(g, m, P)
        assert abs(g.nodes[m].grad - fd) <= 1e-6 * abs(fd) + 1e-10, (m, g.nodes[m].grad, fd)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10**6), s0=st.floats(0.0, 0.5))
def test_gradients_nonnegative_and_bounded(seed, s0):
    g = random_graph(random.Random(seed), tree=False, acyclic=False)
    p = SearchParams(s0=s0)
    refresh_all(g, p)
    propagate(g, p)
    for n in g.nodes:
        assert n.grad >= 0.0
