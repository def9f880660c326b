"""Superintegrable Hamiltonians on sl(2) and sl_z(2) Poisson coalgebra spaces."""

from .catalog import CATALOG, SystemSpec, build, list_catalog
from .coalgebra import (
    Realization,
    casimir,
    classical_integrals,
    deformed_integrals,
    functional_independence,
    verify_algebra,
    verify_involution,
)
from .dynamics import simulate
from .expr import evaluate, parse, to_source
from .geometry import curvature_report, gauss_curvature_brioschi, metric_of
from .phase import Observable, PhaseState, poisson_bracket

__all__ = [
    "CATALOG",
    "SystemSpec",
    "build",
    "list_catalog",
    "Realization",
    "casimir",
    "classical_integrals",
    "deformed_integrals",
    "functional_independence",
    "verify_algebra",
    "verify_involution",
    "simulate",
    "evaluate",
    "parse",
    "to_source",
    "curvature_report",
    "gauss_curvature_brioschi",
    "metric_of",
    "Observable",
    "PhaseState",
    "poisson_bracket",
]
