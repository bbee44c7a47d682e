"""Python access to the flowlab core (Ricci flow, Cotton-York tensor, L1 norms)."""

from ._flowlab import (
    DomainError,
    HypothesisViolated,
    InvariantBreach,
    NumericalError,
    UnsupportedBranch,
    cotton_york,
    cotton_york_closed,
    density,
    flow_rhs,
    geometries,
    heisenberg_closed_form,
    ricci,
    rosenau_cotton_york_23,
    rosenau_l1,
    run_cli,
    simulate,
    table1,
    verify,
)

__all__ = [
    "DomainError",
    "HypothesisViolated",
    "InvariantBreach",
    "NumericalError",
    "UnsupportedBranch",
    "cotton_york",
    "cotton_york_closed",
    "density",
    "flow_rhs",
    "geometries",
    "heisenberg_closed_form",
    "ricci",
    "rosenau_cotton_york_23",
    "rosenau_l1",
    "run_cli",
    "simulate",
    "table1",
    "verify",
]
