"""Exact checking of sequence-indexed TSP flow models and their valley counterexamples."""

from .core import (Assignment, Constraint, Dimension, Instance, ModelConfig, Relation,
                   StartMode, Version, expressiveness_gap, objective)

__version__ = "0.1.0"

__all__ = [
    "Assignment", "Constraint", "Dimension", "Instance", "ModelConfig", "Relation",
    "StartMode", "Version", "expressiveness_gap", "objective", "__version__",
]
