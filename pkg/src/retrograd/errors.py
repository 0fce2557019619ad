"""Exception types raised across the package."""


class PlanningError(Exception):
    """Base class for all package errors."""


class InvalidInputError(PlanningError, ValueError):
    pass


class NotFoundError(PlanningError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "not found"


class StateError(PlanningError, RuntimeError):
    pass


class EnumerationGuardError(PlanningError):
    """The graph has too many uncertain reactions for exhaustive enumeration."""


class CycleError(PlanningError):
    """A cycle was found where the graph was required to be acyclic."""


class ExpansionError(PlanningError):
    """The expansion model failed on a molecule."""
