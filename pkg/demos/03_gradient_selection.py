"""
Choosing what to expand
=======================

The planner expands the open molecule whose s-value the root is most
sensitive to. s0, the value given to unexplored molecules, decides whether
reactions with several unexplored reactants are visible at all.
"""

from retrograd import SearchParams, new_graph, propagate, select_next
from retrograd.baselines import hypothetical_root_value
from retrograd.svalue import refresh_all

g = new_graph("M0")
g.add_reaction(g.root, ["M1"], 0.2)
g.add_reaction(g.root, ["M2", "M3"], 0.9)
g.add_reaction(g.find("M1"), ["M4"], 0.1)
g.mark_expanded(g.root)
g.mark_expanded(g.find("M1"))

for s0 in (0.0, 0.05, 0.2):
    p = SearchParams(s0=s0)
    refresh_all(g, p)
    propagate(g, p)
    row = "  ".join(f"{g.nodes[m].molecule}: D={g.nodes[m].grad:.4f}" for m in g.open_nodes())
    print(f"s0={s0:<4}  {row}  -> expand {g.nodes[select_next(g)].molecule}")

# The naive alternative asks every open node "what if you succeeded?" and
# recomputes the ancestors each time. On trees it ranks the same way.
p = SearchParams()
refresh_all(g, p)
for m in g.open_nodes():
    print(f"{g.nodes[m].molecule}: root would become {hypothetical_root_value(g, m, 1.0, p):.4f}")
