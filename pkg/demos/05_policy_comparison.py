"""
Comparing selection policies
============================

A small version of the benchmark grid: a handful of instances, every policy,
three values of s0. The CSV is the same one ``retrograd bench`` writes.
"""

from retrograd.bench import BenchmarkManifest, rows_to_csv, run_benchmark

manifest = BenchmarkManifest(
    seed=3, instances=6, budget=60, s0_grid=[0.01, 0.05, 0.2],
    world={"width": 60, "depth": 8, "branching": 4, "back_fraction": 0.05,
           "buy_first": 0.05, "buy_last": 0.5},
    output_dir="demo_bench",
)
rows = run_benchmark(manifest)
print(rows_to_csv(rows))
