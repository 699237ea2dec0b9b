"""Canonical coframing, its invariants, and a finite-difference cross-check."""

from .cartan import cartan_coframe, coframe_jets, hilbert_form
from .charts import Chart, SigmaPoint, change_chart, random_sigma_points, sigma_from_vectors, sigma_point
from .invariants import Invariants, connection_section, invariants_at, invariants_batch

__all__ = [
    "cartan_coframe", "coframe_jets", "hilbert_form",
    "Chart", "SigmaPoint", "change_chart", "random_sigma_points", "sigma_from_vectors", "sigma_point",
    "Invariants", "connection_section", "invariants_at", "invariants_batch",
]
