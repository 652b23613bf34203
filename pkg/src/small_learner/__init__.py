"""Sparse multi-prototype linear learners trained by Mirror-Prox."""

from .data import Dataset, Standardizer, SplitPlan, load_csv, fit_standardizer, apply_standardizer, make_splits
from .model import TrainedModel, decision_values, predict, sparsity_report
from .solver import SolverConfig, SolverTrace, train

__version__ = "0.1.0"
