"""Aggregate risk analysis for catastrophe reinsurance portfolios.

Thin Python layer over the C++ engine: build or generate a year event table
and event loss tables, group ELTs into layers, run the analysis and compute
PML / TVaR / EP curves on the resulting year loss tables.
"""

from ._core import (
    UNLIMITED,
    EventLossTable,
    FinancialTerms,
    IoError,
    Layer,
    LayerTerms,
    MetricsError,
    ValidationError,
    YearEventTable,
    analyse,
    apply_aggregate_terms,
    apply_financial_terms,
    apply_occurrence_terms,
    ep_curve,
    generate,
    load_ylt,
    load_yet,
    pml,
    save_ylt,
    save_yet,
    tvar,
)

__all__ = [
    "UNLIMITED",
    "EventLossTable",
    "FinancialTerms",
    "IoError",
    "Layer",
    "LayerTerms",
    "MetricsError",
    "ValidationError",
    "YearEventTable",
    "analyse",
    "apply_aggregate_terms",
    "apply_financial_terms",
    "apply_occurrence_terms",
    "ep_curve",
    "generate",
    "load_ylt",
    "load_yet",
    "pml",
    "save_ylt",
    "save_yet",
    "tvar",
]
