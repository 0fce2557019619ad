"""Seeded benchmark grid: instances x policies x s0 values, with a CSV summary.

Everything written except the timing fields is a pure function of the
manifest, so two runs of the same manifest give byte-identical
``aggregate.csv`` once the ``mean_time_per_iter`` column is dropped.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import InvalidInputError, PlanningError
from .evaluation import DEFAULT_GUARD, DEFAULT_MC_SAMPLES
from .models import FEASIBILITY_MODELS, SyntheticWorld, feasibility_model, sample_targets
from .planner import POLICIES, RunAborted, run
from .svalue import SearchParams

log = logging.getLogger(__name__)

# World used by the default manifest: deep enough that purchasable leaves are
# rare near the target, wide enough that breadth-first expansion spreads thin.
DESK_WORLD = {
    "width": 100, "depth": 10, "branching": 4, "max_reactants": 3,
    "back_fraction": 0.05, "dead_fraction": 0.1, "buy_first": 0.02, "buy_last": 0.5,
}

CSV_COLUMNS = ["algorithm", "s0", "feasibility", "mean_ssp", "std_error",
               "mean_time_per_iter", "n", "failures"]
TIMING_COLUMNS = ("mean_time_per_iter",)


@dataclass
class BenchmarkManifest:
    seed: int = 0
    instances: int = 50
    world: dict = field(default_factory=lambda: dict(DESK_WORLD))
    policies: list = field(default_factory=lambda: list(POLICIES))
    s0_grid: list = field(default_factory=lambda: [0.05])
    feasibility: str = "constant"
    budget: int = 200
    theta_m: float = 1.0
    theta_r: float = 1.0
    eval_method: str = "auto"
    guard: int = DEFAULT_GUARD
    mc_samples: int = DEFAULT_MC_SAMPLES
    max_routes: int = 0
    output_dir: str = "bench-out"
    workers: int = 1

    def __post_init__(self):
        if self.instances < 1:
            raise InvalidInputError("instances must be >= 1")
        if self.budget < 0:
            raise InvalidInputError("budget must be >= 0")
        if self.workers < 1:
            raise InvalidInputError("workers must be >= 1")
        bad = [p for p in self.policies if p not in POLICIES]
        if bad or not self.policies:
            raise InvalidInputError(f"policies must be a non-empty subset of {POLICIES}, got {bad}")
        if self.feasibility not in FEASIBILITY_MODELS:
            raise InvalidInputError(f"unknown feasibility model {self.feasibility!r}")
        if self.eval_method not in ("auto", "exact", "mc"):
            raise InvalidInputError("eval_method must be auto, exact or mc")
        if not self.s0_grid:
            raise InvalidInputError("s0_grid must not be empty")
        for s0 in self.s0_grid:
            self.params(s0)  # validates the range
        known = {f.name for f in fields(SyntheticWorld)} - {"seed"}
        extra = set(self.world) - known
        if extra:
            raise InvalidInputError(f"unknown world parameters: {sorted(extra)}")

    def params(self, s0: float) -> SearchParams:
        return SearchParams(s0=float(s0), theta_m=self.theta_m, theta_r=self.theta_r)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "BenchmarkManifest":
        if not isinstance(doc, dict):
            raise InvalidInputError("manifest must be a JSON object")
        known = {f.name for f in fields(cls)}
        extra = set(doc) - known
        if extra:
            raise InvalidInputError(f"unknown manifest keys: {sorted(extra)}")
        world = dict(DESK_WORLD)
        world.update(doc.get("world", {}))
        return cls(**{**doc, "world": world})

    @classmethod
    def load(cls, path) -> "BenchmarkManifest":
        try:
            doc = json.loads(Path(path).read_text())
        except OSError as exc:
            raise InvalidInputError(f"cannot read manifest {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise InvalidInputError(
                f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(doc)


def derive_seed(*parts: int) -> int:
    """Stable 32-bit seed from integer parts."""
    return int(np.random.SeedSequence([int(p) & 0xFFFFFFFF for p in parts]).generate_state(1)[0])


def instance(manifest: BenchmarkManifest, i: int) -> tuple[SyntheticWorld, str]:
    """World and solvable target for instance ``i`` of the suite."""
    world = SyntheticWorld(seed=derive_seed(manifest.seed, i), **manifest.world)
    target = sample_targets(world, 1, derive_seed(manifest.seed, i, 1))[0]
    return world, target


def _job(args) -> dict:
    manifest, i, policy, s0 = args
    world, target = instance(manifest, i)
    record = {"instance": i, "target": target, "world_seed": world.seed,
              "algorithm": policy, "s0": s0, "feasibility": manifest.feasibility}
    try:
        _, stats = run(target, world, feasibility_model(manifest.feasibility), world,
                       manifest.params(s0), budget=manifest.budget, policy=policy,
                       seed=derive_seed(manifest.seed, i, 2), guard=manifest.guard,
                       mc_samples=manifest.mc_samples, eval_method=manifest.eval_method,
                       max_routes=manifest.max_routes)
        record["stats"] = stats.to_dict()
    except RunAborted as exc:
        record["stats"] = exc.stats.to_dict()
        record["error"] = str(exc)
    except PlanningError as exc:
        record["stats"] = None
        record["error"] = f"{type(exc).__name__}: {exc}"
    return record


def run_file_name(record: dict) -> str:
    return f"{record['algorithm']}_s0-{record['s0']!r}_{record['instance']:04d}.json"


def _fmt(x: float) -> str:
    return repr(float(x))


def aggregate(records: list[dict], manifest: BenchmarkManifest) -> list[dict]:
    """One row per (algorithm, s0), in manifest order."""
    rows = []
    for policy in manifest.policies:
        for s0 in manifest.s0_grid:
            group = [r for r in records if r["algorithm"] == policy and r["s0"] == s0]
            ok = [r["stats"] for r in group if r.get("stats") and "error" not in r]
            ssp = np.array([s["final_ssp_estimate"] for s in ok], dtype=float)
            tpi = np.array([s["wall_time_per_iteration"] for s in ok], dtype=float)
            n = len(ok)
            mean = float(ssp.mean()) if n else math.nan
            se = float(ssp.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan
            rows.append({
                "algorithm": policy, "s0": _fmt(s0), "feasibility": manifest.feasibility,
                "mean_ssp": _fmt(mean), "std_error": _fmt(se),
                "mean_time_per_iter": _fmt(tpi.mean()) if n else "nan",
                "n": str(n), "failures": str(len(group) - n),
            })
    return rows


def rows_to_csv(rows: list[dict], drop: tuple = ()) -> str:
    cols = [c for c in CSV_COLUMNS if c not in drop]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def load_runs(output_dir) -> list[dict]:
    return [json.loads(p.read_text()) for p in sorted(Path(output_dir, "runs").glob("*.json"))]


def run_benchmark(manifest: BenchmarkManifest, output_dir: Optional[str] = None,
                  write: bool = True) -> list[dict]:
    """Run the whole grid; writes ``runs/*.json`` and ``aggregate.csv`` and returns the rows."""
    out = Path(output_dir or manifest.output_dir)
    jobs = [(manifest, i, policy, s0) for i in range(manifest.instances)
            for policy in manifest.policies for s0 in manifest.s0_grid]
    if manifest.workers > 1:
        with ProcessPoolExecutor(manifest.workers) as pool:
            records = list(pool.map(_job, jobs, chunksize=4))
    else:
        records = [_job(j) for j in jobs]
    for r in records:
        if "error" in r:
            log.warning("run %s failed: %s", run_file_name(r), r["error"])
    rows = aggregate(records, manifest)
    if write:
        (out / "runs").mkdir(parents=True, exist_ok=True)
        for r in records:
            (out / "runs" / run_file_name(r)).write_text(json.dumps(r, indent=1, sort_keys=True) + "\n")
        (out / "manifest.json").write_text(json.dumps(manifest.to_dict(), indent=1, sort_keys=True) + "\n")
        (out / "aggregate.csv").write_text(rows_to_csv(rows))
    return rows
