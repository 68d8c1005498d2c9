"""Exponential-reweighing expert aggregation with delayed feedback."""

from .aggregators import (
    AggregatorState,
    CapacityError,
    EtaStar,
    brute_force_posterior,
    drift_argmax_x,
    drift_bound,
    drift_boundary_a,
    drift_objective,
    eta_star,
    init_state,
    normalize_log_weights,
    predict,
    replicated_log_prob,
    v1_update,
)
from .game import (
    GameInput,
    GameTrace,
    corollary1_bound,
    replicate_game,
    run_game,
    theorem1_rhs,
    verify_replication_identity,
)
from .generators import generate_game
from .losses import LOG, SQUARE, LossSpec, check_exp_concavity, get_loss
from .priors import ExpertPrior, fixed_share_prior, identity_prior, sequence_log_prob

__all__ = [
    "AggregatorState",
    "CapacityError",
    "EtaStar",
    "ExpertPrior",
    "GameInput",
    "GameTrace",
    "LOG",
    "LossSpec",
    "SQUARE",
    "brute_force_posterior",
    "check_exp_concavity",
    "corollary1_bound",
    "drift_argmax_x",
    "drift_bound",
    "drift_boundary_a",
    "drift_objective",
    "eta_star",
    "fixed_share_prior",
    "generate_game",
    "get_loss",
    "identity_prior",
    "init_state",
    "normalize_log_weights",
    "predict",
    "replicate_game",
    "replicated_log_prob",
    "run_game",
    "sequence_log_prob",
    "theorem1_rhs",
    "v1_update",
    "verify_replication_identity",
]
