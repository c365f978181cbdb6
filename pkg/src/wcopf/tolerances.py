"""Centralized numerical tolerances for the optimization core."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Tolerance knobs shared by the linear algebra and LP routines.

    feas: feasibility slack allowed on constraints and bounds.
    pivot: magnitude below which a pivot element counts as zero.
    objective: reduced-cost threshold for optimality.
    """

    feas: float = 1e-7
    pivot: float = 1e-12
    objective: float = 1e-9


DEFAULT_TOL = Tolerances()
