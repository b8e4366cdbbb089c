"""Representation counts, main terms, exceptional sets and the arc split."""

from ..progression import ResidueClass
from .arcs import ArcIntegral, ArcPartition, arc_integral, arc_integrals
from .convolution import Convolution, convolve
from .reps import (
    DiscrepancyReport,
    ExceptionScan,
    RepCounts,
    discrepancy_scan,
    exception_scan,
    main_term,
    main_terms,
    rep_counts,
)

__all__ = [
    "ArcIntegral",
    "ArcPartition",
    "Convolution",
    "DiscrepancyReport",
    "ExceptionScan",
    "RepCounts",
    "ResidueClass",
    "arc_integral",
    "arc_integrals",
    "convolve",
    "discrepancy_scan",
    "exception_scan",
    "main_term",
    "main_terms",
    "rep_counts",
]
