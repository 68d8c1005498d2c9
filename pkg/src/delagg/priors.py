"""Distributions over active-expert sequences.

A prior is an initial distribution over the N experts plus a first-order
Markov transition kernel.  Expert indices are 0-based throughout the package.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_STOCHASTIC_TOL = 1e-12


@dataclass(frozen=True)
class ExpertPrior:
    initial: np.ndarray     # (N,)
    transition: np.ndarray  # (N, N), row-stochastic

    def __post_init__(self):
        initial = np.asarray(self.initial, dtype=float)
        transition = np.asarray(self.transition, dtype=float)
        object.__setattr__(self, "initial", initial)
        object.__setattr__(self, "transition", transition)
        n = initial.shape[0]
        if initial.ndim != 1 or n < 1:
            raise ValueError("initial must be a nonempty vector")
        if transition.shape != (n, n):
            raise ValueError("transition must be an NxN matrix")
        if np.any(initial < 0) or np.any(transition < 0):
            raise ValueError("probabilities must be nonnegative")
        if abs(initial.sum() - 1.0) > _STOCHASTIC_TOL:
            raise ValueError("initial distribution must sum to 1")
        if np.any(np.abs(transition.sum(axis=1) - 1.0) > _STOCHASTIC_TOL):
            raise ValueError("every transition row must sum to 1")

    @property
    def num_experts(self) -> int:
        return self.initial.shape[0]


def identity_prior(n_experts: int) -> ExpertPrior:
    """Uniform initial distribution, identity transitions (no switching)."""
    if n_experts < 1:
        raise ValueError("need at least one expert")
    return ExpertPrior(np.full(n_experts, 1.0 / n_experts), np.eye(n_experts))


def fixed_share_prior(n_experts: int, alpha: float) -> ExpertPrior:
    """Uniform initial; each step switch to a uniformly random expert with
    probability alpha (self included), otherwise stay put."""
    if n_experts < 1:
        raise ValueError("need at least one expert")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    trans = (1.0 - alpha) * np.eye(n_experts) + alpha / n_experts
    return ExpertPrior(np.full(n_experts, 1.0 / n_experts), trans)


def sequence_log_prob(prior: ExpertPrior, sequence) -> float:
    """Exact log-probability of an active-expert sequence; -inf if any factor
    of the chain is zero."""
    seq = np.asarray(sequence)
    if seq.ndim != 1 or seq.size == 0:
        raise ValueError("sequence must be a nonempty 1-d index list")
    n = prior.num_experts
    if np.any(seq < 0) or np.any(seq >= n):
        raise ValueError(f"expert indices must lie in 0..{n - 1}")
    factors = np.concatenate((
        [prior.initial[seq[0]]],
        prior.transition[seq[:-1], seq[1:]],
    ))
    if np.any(factors == 0.0):
        return -math.inf
    return float(np.sum(np.log(factors)))
