"""
Success probabilities on a cyclic graph
=======================================

Two molecules that can each be made from the other form a cycle. The local
s-value rule has no single evaluation order there, so we iterate it.
"""

from retrograd import SearchParams, SetInventory, exact_ssp, fixed_point_evaluate, new_graph

# M1 can be bought via B1 (f=0.8) or made from M2; M2 via B2 (f=0.6) or from M1.
g = new_graph("M1", SetInventory(frozenset({"B1", "B2"})))
m1 = g.root
g.add_reaction(m1, ["B1"], 0.8)
g.add_reaction(m1, ["M2"], 0.5)
m2 = g.find("M2")
g.add_reaction(m2, ["B2"], 0.6)
g.add_reaction(m2, ["M1"], 0.5)
g.mark_expanded(m1)
g.mark_expanded(m2)

# Synchronous sweeps from zero. Watch the values pass through 0.86 / 0.76,
# the first recomputation that sees the other molecule's contribution.
fp = fixed_point_evaluate(g, SearchParams(eval_s0=0.0), record_history=True)
for i, h in enumerate(fp.history[:8]):
    print(f"sweep {i + 1}: s(M1)={h[m1]:.4f}  s(M2)={h[m2]:.4f}")
print(f"converged after {fp.sweeps} sweeps: s(M1)={fp[m1]:.6f}  s(M2)={fp[m2]:.6f}")

# The sweeps keep feeding M1's value back into itself, so they overshoot the
# true probability, which never lets a cycle justify itself.
print(f"exact: P(M1)={exact_ssp(g):.6f}  P(M2)={exact_ssp(g, target=m2):.6f}")
