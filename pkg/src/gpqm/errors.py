"""Exception types shared across the planning pipeline."""


class PlanningError(Exception):
    """Base class for infeasibility discovered while building a plan."""


class InfeasibleDemandError(PlanningError):
    """A demand exceeds the largest per-FAP fair share in the rate table."""


class AggregateCapacityError(PlanningError):
    """Total offered load exceeds the usable channel capacity."""


class PlacementInfeasibleError(PlanningError):
    """No gateway position satisfies every link constraint at any allowed power."""


class DelayInfeasibleError(PlanningError):
    """Predicted queueing delay violates the threshold even at the top rate."""


class SaturationError(ValueError):
    """Queueing formulas were evaluated at utilisation >= 1."""
