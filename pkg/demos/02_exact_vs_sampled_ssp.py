"""
Exact and sampled success probability
=====================================

Shared descendants make success events dependent, which the product formulas
ignore. Enumeration gives the truth on small graphs; sampling scales.
"""

from retrograd import SetInventory, exact_ssp, fixed_point_evaluate, mc_ssp, new_graph, SearchParams

# M0 needs M1 and M3; M1 has two reactions that both need M3.
g = new_graph("M0", SetInventory(frozenset({"B1", "B2"})))
r3, _ = g.add_reaction(g.root, ["M1", "M3"], 1.0)
m1, m3 = g.find("M1"), g.find("M3")
r1, _ = g.add_reaction(m1, ["M3", "M4"], 1.0)
r2, _ = g.add_reaction(m1, ["M3"], 1.0)
g.add_reaction(m3, ["B1"], 0.5)
g.add_reaction(g.find("M4"), ["B2"], 0.8)
for m in (g.root, m1, m3, g.find("M4")):
    g.mark_expanded(m)

approx = fixed_point_evaluate(g, SearchParams(eval_s0=0.0))
print(f"P(M1): exact {exact_ssp(g, target=m1):.3f}, independence {approx[m1]:.3f}")
print(f"P(R3): exact {exact_ssp(g, target=r3):.3f}, independence {approx[r3]:.3f}")

for n in (100, 1_000, 10_000, 100_000):
    est, se = mc_ssp(g, n=n, seed=1)
    print(f"Monte Carlo n={n:>6}: {est:.4f} +- {se:.4f}")
