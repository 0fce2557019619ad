"""Selection / expansion / update search loop.

The default policy expands the open molecule with the largest gradient
D(M) = d s(root) / d s(M). The other policies from :mod:`retrograd.baselines`
plug into the same loop so that runs are directly comparable.
"""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

from . import baselines
from .errors import CycleError, ExpansionError, InvalidInputError
from .evaluation import DEFAULT_GUARD, DEFAULT_MC_SAMPLES, evaluate_graph
from .gradient import propagate
from .graph import SearchGraph, new_graph
from .models import ExpansionModel, FeasibilityModel
from .routes import Route, extract_routes
from .svalue import SearchParams, bottom_up_update

log = logging.getLogger(__name__)

POLICIES = ("gradient", "retrostar", "naive", "topo")


@dataclass
class StepReport:
    expanded: Optional[int] = None
    reactions_added: int = 0
    molecules_added: int = 0
    rejected: int = 0
    dead: bool = False
    exhausted: bool = False
    recomputed: int = 0


@dataclass
class RunStats:
    policy: str
    iterations: int = 0
    wall_time: float = 0.0
    wall_time_per_iteration: float = 0.0
    iteration_times: list[float] = field(default_factory=list)
    molecules: int = 0
    reactions: int = 0
    final_ssp_estimate: float = 0.0
    evaluation: dict = field(default_factory=dict)
    routes_found: int = 0
    rejected_reactions: int = 0
    exhausted: bool = False
    error: Optional[str] = None

    def to_dict(self, timing: bool = True) -> dict:
        d = asdict(self)
        if not timing:
            for k in ("wall_time", "wall_time_per_iteration", "iteration_times"):
                d.pop(k)
        return d


class RunAborted(ExpansionError):
    def __init__(self, msg, graph: SearchGraph, stats: RunStats):
        super().__init__(msg)
        self.graph = graph
        self.stats = stats


def select_next(g: SearchGraph) -> Optional[int]:
    """Open molecule with the largest gradient; smallest id among ties."""
    return baselines.argmax_first((m, g.nodes[m].grad) for m in g.open_nodes())


def _select(g: SearchGraph, p: SearchParams, policy: str) -> Optional[int]:
    if policy in ("gradient", "topo"):
        return select_next(g)
    if policy == "retrostar":
        return baselines.retro_star_select(g)
    if policy == "naive":
        return baselines.naive_improvement_select(g, p)
    raise InvalidInputError(f"unknown policy {policy!r}; choose from {POLICIES}")


def initialize(g: SearchGraph, p: SearchParams, policy: str = "gradient") -> None:
    """Assign initial s-values and gradients to a fresh graph."""
    if policy == "topo":
        baselines.topo_svalue_update(g, p)
    else:
        bottom_up_update(g, [g.root], p)
    propagate(g, p)


def step(g: SearchGraph, model: ExpansionModel, feas: FeasibilityModel, p: SearchParams,
         policy: str = "gradient") -> StepReport:
    """One selection / expansion / update iteration."""
    m = _select(g, p, policy)
    if m is None:
        return StepReport(exhausted=True)
    mol = g.nodes[m]
    try:
        candidates = model.expand(mol.molecule)
    except Exception as exc:
        raise ExpansionError(f"expansion of {mol.molecule!r} failed: {exc}") from exc

    report = StepReport(expanded=m)
    new_mols: list[int] = []
    new_rxns: list[int] = []
    for cand in candidates:
        if not cand.reactants:
            log.warning("discarding reaction with no reactants for %s", mol.molecule)
            continue
        size = len(g.nodes)
        try:
            rid, created = g.add_reaction(m, cand.reactants, feas(cand.rank, cand.score),
                                          cand.rank, cand.score)
        except CycleError:
            report.rejected += 1
            continue
        if rid >= size:
            new_rxns.append(rid)
        new_mols.extend(created)

    if new_rxns:
        g.mark_expanded(m)
    else:
        g.mark_dead(m)
        report.dead = True
    report.reactions_added = len(new_rxns)
    report.molecules_added = len(new_mols)

    if policy == "topo":
        report.recomputed = baselines.topo_svalue_update(g, p)
    else:
        report.recomputed = bottom_up_update(g, new_mols + new_rxns + [m], p)
    if policy in ("gradient", "topo"):
        propagate(g, p)
    return report


def run(target: str, model: ExpansionModel, feas: FeasibilityModel, inventory,
        p: Optional[SearchParams] = None, budget: int = 100, policy: str = "gradient",
        seed: int = 0, guard: int = DEFAULT_GUARD, mc_samples: int = DEFAULT_MC_SAMPLES,
        eval_method: str = "auto", max_routes: int = 10) -> tuple[SearchGraph, RunStats]:
    """Search from ``target`` for up to ``budget`` iterations, then evaluate.

    Stops early only when no open molecule is left; finding a route does not
    end the search.
    """
    p = SearchParams() if p is None else p
    if budget < 0:
        raise InvalidInputError(f"budget must be >= 0, got {budget}")
    if policy not in POLICIES:
        raise InvalidInputError(f"unknown policy {policy!r}; choose from {POLICIES}")
    g = new_graph(target, inventory, acyclic=(policy == "topo"))
    stats = RunStats(policy=policy)
    start = time.perf_counter()
    initialize(g, p, policy)
    aborted = None
    for _ in range(budget):
        t0 = time.perf_counter()
        try:
            report = step(g, model, feas, p, policy)
        except ExpansionError as exc:
            aborted = exc
            break
        if report.exhausted:
            stats.exhausted = True
            break
        stats.iterations += 1
        stats.rejected_reactions += report.rejected
        stats.iteration_times.append(time.perf_counter() - t0)
    stats.wall_time = time.perf_counter() - start
    if stats.iterations:
        stats.wall_time_per_iteration = stats.wall_time / stats.iterations
    if not g.open_nodes():
        stats.exhausted = True
    _finish(g, stats, seed, guard, mc_samples, eval_method, max_routes)
    if aborted is not None:
        stats.error = str(aborted)
        raise RunAborted(str(aborted), g, stats) from aborted
    return g, stats


def _finish(g, stats, seed, guard, mc_samples, eval_method, max_routes) -> None:
    counts = g.counts()
    stats.molecules = counts["molecules"]
    stats.reactions = counts["reactions"]
    stats.evaluation = evaluate_graph(g, guard=guard, mc_samples=mc_samples, seed=seed,
                                      method=eval_method)
    stats.final_ssp_estimate = stats.evaluation["value"]
    stats.routes_found = len(extract_routes(g, max_routes)) if max_routes else 0


__all__ = ["POLICIES", "Route", "RunAborted", "RunStats", "StepReport", "extract_routes",
           "initialize", "run", "select_next", "step"]
