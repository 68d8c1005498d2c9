"""Delayed-feedback game engine, regret accounting, loss-bound evaluation and
the block-replication construction relating delayed and one-step games."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .aggregators import AggregatorState, sequence_scores
from .losses import LossSpec
from .priors import ExpertPrior, sequence_log_prob


@dataclass(frozen=True)
class GameInput:
    """One game: T outcomes, a T x N expert-forecast matrix, the feedback
    delay and the loss in play."""

    outcomes: np.ndarray
    forecasts: np.ndarray
    delay: int
    loss: LossSpec

    def __post_init__(self):
        outcomes = np.asarray(self.outcomes, dtype=float)
        forecasts = np.asarray(self.forecasts, dtype=float)
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "forecasts", forecasts)
        if outcomes.ndim != 1 or outcomes.size < 1:
            raise ValueError("outcomes must be a nonempty vector")
        if forecasts.ndim != 2 or forecasts.shape[0] != outcomes.size or forecasts.shape[1] < 1:
            raise ValueError("forecasts must be a T x N matrix matching the outcomes")
        if self.delay < 1:
            raise ValueError("delay must be >= 1")
        # domain checks; the loss functions raise on out-of-domain values
        self.loss.fn(outcomes[:1], forecasts[:1])
        lo, hi = self.loss.gamma_domain
        if np.any(forecasts < lo) or np.any(forecasts > hi):
            raise ValueError("expert forecast out of the prediction domain")
        olo, ohi = self.loss.omega_domain
        if np.any(outcomes < olo) or np.any(outcomes > ohi):
            raise ValueError("outcome out of the outcome domain")

    @property
    def horizon(self) -> int:
        return int(self.outcomes.size)

    @property
    def num_experts(self) -> int:
        return int(self.forecasts.shape[1])


@dataclass
class GameTrace:
    """Full per-step record of one run."""

    algo: str
    delay: int
    eta: float
    loss_name: str
    gamma: np.ndarray            # algorithm forecasts, (T,)
    h: np.ndarray                # algorithm losses, (T,)
    m: np.ndarray                # mixlosses, (T,)
    expert_losses: np.ndarray    # per-step per-expert losses, (T, N)
    regret_curve: np.ndarray     # H_t - min_n L_t^n, (T,)
    weights: Optional[np.ndarray] = None  # (T, N) probabilities, if recorded

    @property
    def horizon(self) -> int:
        return int(self.h.size)

    @property
    def num_experts(self) -> int:
        return int(self.expert_losses.shape[1])

    @property
    def total_loss(self) -> float:
        return float(self.h.sum())

    @property
    def total_mixloss(self) -> float:
        return float(self.m.sum())

    @property
    def cumulative_expert_losses(self) -> np.ndarray:
        return self.expert_losses.sum(axis=0)

    @property
    def best_expert(self) -> int:
        # argmin breaks ties toward the lowest index
        return int(np.argmin(self.cumulative_expert_losses))

    @property
    def regret(self) -> float:
        return float(self.regret_curve[-1])


def run_game(game: GameInput, state: AggregatorState,
             record_weights: bool = False) -> GameTrace:
    """Play the delayed-feedback protocol to the end.

    Forecasts for times 1..D are made from the prior weights before any
    outcome is seen; at each step t the outcome is revealed, losses of the
    forecasts made at t-D are charged, the weights absorb the newly revealed
    loss vector, and the forecast for t+D is emitted.  Deterministic.
    """
    if state.delay != game.delay:
        raise ValueError("state and game disagree on the delay")
    if state.num_experts != game.num_experts:
        raise ValueError("state and game disagree on the number of experts")
    if state.revealed != 0:
        raise ValueError("run_game needs a freshly initialized state")

    loss_table = game.loss.table(game.outcomes, game.forecasts)
    log_w = state.weight_matrix(loss_table)
    probs = np.exp(log_w)
    lo, hi = game.loss.gamma_domain
    gamma = np.clip(np.einsum("tn,tn->t", probs, game.forecasts), lo, hi)
    h = np.asarray(game.loss.fn(game.outcomes, gamma), dtype=float)
    with np.errstate(invalid="ignore"):
        m = -logsumexp(log_w - state.eta * loss_table, axis=1) / state.eta
    cum_h = np.cumsum(h)
    cum_l = np.cumsum(loss_table, axis=0)
    regret_curve = cum_h - cum_l.min(axis=1)
    return GameTrace(
        algo=state.algo,
        delay=game.delay,
        eta=state.eta,
        loss_name=game.loss.name,
        gamma=gamma,
        h=h,
        m=m,
        expert_losses=loss_table,
        regret_curve=regret_curve,
        weights=probs if record_weights else None,
    )


def theorem1_rhs(game: GameInput, prior, eta: float) -> float:
    """Exact one-step-ahead loss bound -1/eta * ln E_p[exp(-eta * L_T^seq)]
    by enumeration over all active-expert sequences."""
    if game.delay != 1:
        raise ValueError("the one-step loss bound applies to delay-1 games")
    loss_table = game.loss.table(game.outcomes, game.forecasts)
    t = game.horizon
    _, scores = sequence_scores(prior, loss_table, eta, t, conditioned=t)
    return float(-logsumexp(scores) / eta)


def corollary1_bound(prior: ExpertPrior, comparator_sequence, eta: float) -> float:
    """Regret bound -1/eta * ln p(sequence) against a fixed active-expert
    sequence; +inf when the prior gives it zero mass."""
    logp = sequence_log_prob(prior, comparator_sequence)
    if logp == -math.inf:
        return math.inf
    return -logp / eta


def replicate_game(one_step_game: GameInput, delay: int) -> GameInput:
    """Stretch a one-step game into a delay-D game by repeating every step D
    consecutive times.  Per-expert cumulative losses scale exactly by D."""
    if one_step_game.delay != 1:
        raise ValueError("the source game must have delay 1")
    if delay < 1:
        raise ValueError("delay must be >= 1")
    return GameInput(
        outcomes=np.repeat(one_step_game.outcomes, delay),
        forecasts=np.repeat(one_step_game.forecasts, delay, axis=0),
        delay=delay,
        loss=one_step_game.loss,
    )


@dataclass(frozen=True)
class ReplicationReport:
    loss_identity_exact: bool      # L_T(replicated) == D * L_T'(source), exactly
    delayed_total_loss: float      # H of the delayed strategy on the replicated game
    one_step_total_loss: float     # H of the block-head strategy on the source game
    total_loss_gap: float          # delayed H minus D * one-step H
    delayed_regret: float
    one_step_regret: float
    regret_inequality_ok: bool     # delayed regret >= D * one-step regret
    passed: bool


def verify_replication_identity(one_step_game: GameInput, strategy_weights,
                                delay: int, tol: float = 1e-12) -> ReplicationReport:
    """Check the replication loss identities for a deterministic-mixture
    strategy on the replicated game.

    ``strategy_weights`` are the per-step weight rows (T'*D, N) the delayed
    strategy used on the replicated game.  Mixture losses are computed as
    weighted sums of the expert losses, matching the expectation semantics of
    randomized strategies.  The block-averaged strategy sampled at block
    heads must suffer exactly 1/D of the delayed strategy's total loss, and
    per-expert cumulative losses must satisfy L(replicated) = D * L(source)
    exactly.
    """
    weights = np.asarray(strategy_weights, dtype=float)
    t_src = one_step_game.horizon
    n = one_step_game.num_experts
    if weights.shape != (t_src * delay, n):
        raise ValueError("strategy weights must be a (T'*D, N) matrix")

    replicated = replicate_game(one_step_game, delay)
    table_rep = replicated.loss.table(replicated.outcomes, replicated.forecasts)
    table_src = one_step_game.loss.table(one_step_game.outcomes, one_step_game.forecasts)

    # exact per-expert cumulative-loss identity, in rational arithmetic
    loss_identity = True
    for expert in range(n):
        rep_sum = sum(Fraction(x) for x in table_rep[:, expert])
        src_sum = sum(Fraction(x) for x in table_src[:, expert])
        if rep_sum != delay * src_sum:
            loss_identity = False
            break

    h_delayed = math.fsum((weights * table_rep).ravel())
    # block-head strategy: average the delayed strategy's weights over each
    # block; its loss on the source game, scaled back by D
    block_sums = weights.reshape(t_src, delay, n).sum(axis=1)
    d_times_h1 = math.fsum((block_sums * table_src).ravel())
    h_one_step = d_times_h1 / delay
    gap = h_delayed - d_times_h1

    best_rep = float(table_rep.sum(axis=0).min())
    best_src = float(table_src.sum(axis=0).min())
    regret_delayed = h_delayed - best_rep
    regret_one_step = h_one_step - best_src
    regret_ok = regret_delayed >= delay * regret_one_step - 1e-9

    passed = loss_identity and abs(gap) <= tol and regret_ok
    return ReplicationReport(
        loss_identity_exact=loss_identity,
        delayed_total_loss=h_delayed,
        one_step_total_loss=h_one_step,
        total_loss_gap=gap,
        delayed_regret=regret_delayed,
        one_step_regret=regret_one_step,
        regret_inequality_ok=regret_ok,
        passed=passed,
    )
