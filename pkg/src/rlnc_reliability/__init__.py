"""Delivery-probability bounds for RLNC multicast over erasure channels."""

from .bounds import (
    NONSYSTEMATIC,
    SYSTEMATIC,
    BoundResult,
    CodeSpec,
    ConsistencyError,
    NetworkSpec,
    multicast_bound,
    mse,
    phi,
    product_bound,
    ptp_nonsystematic,
    ptp_systematic,
    two_user_exact,
)
from .combin import alpha, binom, enumerate_count_tuples, mu_range, permutation_count
from .gf import FieldMatrix, FieldSpec, field_inv, field_mul, matrix_rank
from .harness import ExperimentConfig, heterogeneous_epsilons, mse_report, run_sweep
from .rankprob import full_rank_prob, joint_full_rank_bound, joint_full_rank_product_bound, rank_prob
from .sim import Estimate, ReceptionStats, reception_stats, simulate_correlated_ensemble, simulate_multicast

__version__ = "0.1.0"

__all__ = [
    "NONSYSTEMATIC", "SYSTEMATIC", "BoundResult", "CodeSpec", "ConsistencyError", "NetworkSpec",
    "multicast_bound", "mse", "phi", "product_bound", "ptp_nonsystematic", "ptp_systematic",
    "two_user_exact", "alpha", "binom", "enumerate_count_tuples", "mu_range", "permutation_count",
    "FieldMatrix", "FieldSpec", "field_inv", "field_mul", "matrix_rank", "ExperimentConfig",
    "heterogeneous_epsilons", "mse_report", "run_sweep", "full_rank_prob", "joint_full_rank_bound",
    "joint_full_rank_product_bound", "rank_prob", "Estimate", "ReceptionStats", "reception_stats",
    "simulate_correlated_ensemble", "simulate_multicast",
]
