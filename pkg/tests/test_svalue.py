import math
import random
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from retrograd import InvalidInputError, SearchParams, StateError, bottom_up_update, fixed_point_evaluate, local_s
from retrograd.svalue import refresh_all

from builders import build, ids, left_cycle, random_graph, right_cycle, shared_descendant

P = SearchParams()
EXACT = SearchParams(eval_s0=0.0)


def test_params_validation():
    for bad in (dict(s0=-0.1), dict(s0=1.0), dict(theta_m=0.0), dict(theta_m=1.5),
                dict(theta_r=0.5), dict(eval_s0=2.0), dict(fixed_point_tol=0.0)):
        with pytest.raises(InvalidInputError):
            SearchParams(**bad)
    SearchParams(s0=0.0)


def test_local_rule_on_small_tree():
    g = build("A", [("A", ["B", "C"], 0.5), ("A", ["D"], 0.4)], purchasable={"B"})
    a, r1, b, c, r2, d = range(6)
    p = SearchParams(s0=0.1)
    bottom_up_update(g, range(len(g)), p)
    bottom_up_update(g, [r1, r2, a], p)
    assert g.nodes[c].s == 0.1 and g.nodes[b].s == 1.0
    assert g.nodes[r1].s == pytest.approx(0.5 * 1.0 * 0.1)
    assert g.nodes[r2].s == pytest.approx(0.4 * 0.1)
    assert g.nodes[a].s == pytest.approx(1 - (1 - 0.05) * (1 - 0.04))
    assert local_s(a, g, p) == pytest.approx(g.nodes[a].s)


def test_theta_scaling_and_clamp():
    g = build("A", [("A", ["B"], 0.8)], purchasable={"B"})
    p = SearchParams(theta_m=0.9, theta_r=2.0)
    fp = fixed_point_evaluate(g, p)
    assert fp[1] == 1.0  # 2 * 0.8 clamps at 1
    assert fp[0] == pytest.approx(0.9)


def test_dead_molecule_contributes_zero():
    g = build("A", [("A", ["B"], 0.8), ("A", ["C"], 0.5)], purchasable={"C"}, dead={"B"})
    assert fixed_point_evaluate(g, P)[0] == pytest.approx(0.5)


def test_expanded_molecule_without_children_is_a_state_error():
    g = build("A", [("A", ["B"], 0.8)])
    g.nodes[2].status = "expanded"
    with pytest.raises(StateError):
        fixed_point_evaluate(g, P)


def test_right_cycle_trajectory():
    g = right_cycle()
    m1, m2 = ids(g, "M1", "M2")
    fp = fixed_point_evaluate(g, EXACT, record_history=True)
    # the first sweep where each molecule sees the other's contribution
    first = fp.history[3]
    assert first[m1] == pytest.approx(0.86, abs=1e-12)
    assert first[m2] == pytest.approx(0.76, abs=1e-12)
    assert fp.converged
    # closed form of the converged Jacobi iteration
    assert fp[m1] == pytest.approx(0.86 / 0.98, abs=1e-12)
    assert fp[m2] == pytest.approx(1 - 0.4 * (1 - 0.5 * 0.86 / 0.98), abs=1e-12)


def test_left_cycle_trajectory():
    g = left_cycle()
    m1 = g.find("M1")
    fp = fixed_point_evaluate(g, EXACT, record_history=True)
    assert fp.history[1][m1] == pytest.approx(0.8)
    assert fp[m1] == pytest.approx(0.8 / (1 - 0.2 * 0.25), abs=1e-12)


def test_overrides_pin_values():
    g = build("A", [("A", ["B"], 0.5)])
    fp = fixed_point_evaluate(g, EXACT, overrides={2: 1.0})
    assert fp[0] == pytest.approx(0.5)
    assert fixed_point_evaluate(g, EXACT)[0] == 0.0


def test_fixed_point_on_acyclic_equals_one_reverse_pass():
    rng = random.Random(3)
    for _ in range(30):
        g = random_graph(rng, tree=False)
        p = SearchParams(eval_s0=0.05)
        fp = fixed_point_evaluate(g, p)
        assert fp.converged
        # longest path bounds the sweep count
        assert fp.sweeps <= len(g) + 1


def test_bottom_up_visits_each_node_at_most_once_on_cycles():
    g = right_cycle()
    trace = []
    n = bottom_up_update(g, range(len(g)), P, trace)
    assert n == len(trace) == len(set(trace)) == len(g)


def test_bottom_up_seeded_from_leaves_matches_fixed_point_on_trees():
    rng = random.Random(11)
    for _ in range(40):
        g = random_graph(rng, tree=True)
        refresh_all(g, P)
        want = fixed_point_evaluate(g, replace(P, eval_s0=P.s0))
        for x, v in want.values.items():
            assert math.isclose(g.nodes[x].s, v, abs_tol=1e-15)


def test_non_independence_overestimates_for_shared_descendant():
    g = shared_descendant()
    m1, r3 = ids(g, "M1", "M0")[0], 1
    fp = fixed_point_evaluate(g, EXACT)
    assert fp[m1] == pytest.approx(0.7)
    assert fp[r3] == pytest.approx(0.35)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), s0=st.floats(0.0, 0.5), tree=st.booleans())
def test_s_values_are_probabilities(seed, s0, tree):
    rng = random.Random(seed)
    g = random_graph(rng, tree=tree, acyclic=tree)
    p = SearchParams(s0=s0)
    bottom_up_update(g, range(len(g)), p)
    for n in g.nodes:
        assert 0.0 <= n.s <= 1.0
        if hasattr(n, "feasibility"):
            assert n.s <= n.feasibility + 1e-15


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_fixed_point_monotone_in_s0(seed):
    g = random_graph(random.Random(seed), tree=False, acyclic=False)
    lo = fixed_point_evaluate(g, SearchParams(eval_s0=0.01))
    hi = fixed_point_evaluate(g, SearchParams(eval_s0=0.2))
    assert lo[g.root] <= hi[g.root] + 1e-12
