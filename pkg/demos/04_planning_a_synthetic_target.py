"""
Planning in a synthetic world
=============================

A seeded procedural world stands in for a one-step model and a building-block
catalogue. We plan for one target and look at the routes found.
"""

from pathlib import Path

from retrograd import SyntheticWorld, constant_feasibility, extract_routes, run
from retrograd.export import to_dot
from retrograd.models import sample_targets

world = SyntheticWorld(seed=7, width=60, depth=7)
target = sample_targets(world, 1, seed=0)[0]
print("target", target)

g, stats = run(target, world, constant_feasibility, world, budget=80)
print(f"{stats.iterations} expansions, {stats.molecules} molecules, {stats.reactions} reactions")
print("SSP", stats.evaluation)

routes = extract_routes(g, 5)
for r in routes:
    names = [g.nodes[m].molecule for m in r.leaves]
    print(f"route p={r.probability:.4f}, {len(r.reactions)} reactions, leaves {names}")

# Graphviz rendering with the best route highlighted
if routes:
    Path("demo_graph.dot").write_text(to_dot(g, routes[0].nodes))
    print("wrote demo_graph.dot")
