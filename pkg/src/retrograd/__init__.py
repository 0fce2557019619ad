"""Gradient-guided AND-OR graph search for high success-probability synthesis plans."""

from .errors import (CycleError, EnumerationGuardError, ExpansionError, InvalidInputError,
                     NotFoundError, PlanningError, StateError)
from .evaluation import evaluate_graph, exact_ssp, mc_ssp, route_sigma_probability, success_under_sample
from .gradient import partial_molecule_wrt_reaction, partial_reaction_wrt_reactant, propagate
from .graph import MoleculeNode, ReactionNode, SearchGraph, add_reaction, mark_dead, new_graph, open_nodes
from .models import (Candidate, SetInventory, SyntheticWorld, TableModel, constant_feasibility,
                     feasibility_model, load_reaction_file, rank_feasibility)
from .planner import RunStats, run, select_next, step
from .routes import Route, extract_routes, validate_route
from .svalue import SearchParams, bottom_up_update, fixed_point_evaluate, local_s

__version__ = "0.1.0"
