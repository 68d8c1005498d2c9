"""Weight-update engines for delayed-feedback exponential reweighing.

All engines expose the same contract: ``weights_for(t)`` returns the
normalized log-weights used to forecast time ``t`` (1-based), and
``consume(losses)`` feeds the per-expert loss vector of the next revealed
time step, strictly in time order.  Weights are kept in log-space;
normalization happens on read, so numerically the engines agree bit-for-bit
where they coincide mathematically (e.g. the fully-connected engine at
delay 1 versus the classic one-step engine).

The brute-force posterior at the bottom enumerates active-expert sequences
and is the ground-truth oracle for every fast path.
"""
from __future__ import annotations

import copy
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .priors import ExpertPrior

ENUMERATION_GUARD = 10 ** 7

ALGORITHMS = ("v1", "vd", "vdfc", "g-markov")


class CapacityError(RuntimeError):
    """Raised when a brute-force enumeration would be too large."""


def normalize_log_weights(log_weights: np.ndarray) -> np.ndarray:
    return log_weights - logsumexp(log_weights)


def predict(log_weights: np.ndarray, expert_forecasts) -> float:
    """Aggregated forecast: inner product of the weights with the experts'
    forecasts.  Lies in [min forecast, max forecast]."""
    forecasts = np.asarray(expert_forecasts, dtype=float)
    log_weights = np.asarray(log_weights, dtype=float)
    if forecasts.shape != log_weights.shape:
        raise ValueError("weights and forecasts must have the same length")
    return float(np.exp(normalize_log_weights(log_weights)) @ forecasts)


def v1_update(log_weights: np.ndarray, losses, eta: float) -> np.ndarray:
    """One exponential-reweighing step: w_n <- w_n * exp(-eta * loss_n),
    renormalized, all in log-space."""
    losses = np.asarray(losses, dtype=float)
    if not np.all(np.isfinite(losses)):
        raise ValueError("losses must be finite")
    return normalize_log_weights(np.asarray(log_weights, float) - eta * losses)


def _log_probs(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(p)


def _log_matvec_t(log_a: np.ndarray, log_v: np.ndarray) -> np.ndarray:
    """log(A^T exp(log_v)) for a row-stochastic A given in log-space."""
    with np.errstate(invalid="ignore"):
        return logsumexp(log_a + log_v[:, None], axis=0)


class AggregatorState:
    """Base engine.  Subclasses implement ``_consume`` and ``weights_for``."""

    algo = "base"

    def __init__(self, prior: ExpertPrior, delay: int, eta: float):
        if delay < 1:
            raise ValueError("delay must be >= 1")
        if eta <= 0:
            raise ValueError("eta must be positive")
        self.prior = prior
        self.delay = delay
        self.eta = eta
        self.revealed = 0  # number of loss vectors consumed so far

    @property
    def num_experts(self) -> int:
        return self.prior.num_experts

    def consume(self, losses) -> None:
        losses = np.asarray(losses, dtype=float)
        if losses.shape != (self.num_experts,):
            raise ValueError("loss vector has the wrong length")
        if not np.all(np.isfinite(losses)):
            raise ValueError("losses must be finite")
        self._consume(losses)
        self.revealed += 1

    def _consume(self, losses: np.ndarray) -> None:
        raise NotImplementedError

    def weights_for(self, t: int) -> np.ndarray:
        raise NotImplementedError

    def weight_matrix(self, loss_table: np.ndarray) -> np.ndarray:
        """Normalized log-weights for every step of a game, given the full
        per-step per-expert loss table.  Row t-1 equals ``weights_for(t)``
        after consuming the losses of times 1..t-D.  Does not mutate self."""
        if self.revealed != 0:
            raise ValueError("weight_matrix requires a fresh state")
        clone = copy.deepcopy(self)
        t_total = loss_table.shape[0]
        rows = np.empty((t_total, self.num_experts))
        for t in range(1, t_total + 1):
            while clone.revealed < t - clone.delay:
                clone.consume(loss_table[clone.revealed])
            rows[t - 1] = clone.weights_for(t)
        return rows


class ExpWeightsState(AggregatorState):
    """Classic exponential weights (delay 1) and its fully-connected delayed
    variant: a single weight vector fed every revealed loss vector."""

    def __init__(self, prior, delay, eta, algo="vdfc"):
        super().__init__(prior, delay, eta)
        self.algo = algo
        self._log_init = _log_probs(prior.initial)
        self._logw = self._log_init.copy()  # unnormalized

    def _consume(self, losses):
        self._logw = self._logw - self.eta * losses

    def weights_for(self, t):
        if t < 1:
            raise ValueError("time index must be >= 1")
        return normalize_log_weights(self._logw)

    def weight_matrix(self, loss_table):
        if self.revealed != 0:
            raise ValueError("weight_matrix requires a fresh state")
        t_total, n = loss_table.shape
        cum = np.zeros((t_total, n))
        if t_total > self.delay:
            cum[self.delay:] = np.cumsum(loss_table[:t_total - self.delay], axis=0)
        logw = self._log_init - self.eta * cum
        return logw - logsumexp(logw, axis=1, keepdims=True)


class ReplicatedState(AggregatorState):
    """D independent one-step engines, one per congruence grid of the
    timeline; the grids never mix."""

    algo = "vd"

    def __init__(self, prior, delay, eta):
        super().__init__(prior, delay, eta)
        self._log_init = _log_probs(prior.initial)
        self._logw = np.tile(self._log_init, (delay, 1))  # unnormalized, per grid

    def _consume(self, losses):
        grid = self.revealed % self.delay  # time s = revealed + 1 -> (s-1) % D
        self._logw[grid] = self._logw[grid] - self.eta * losses

    def weights_for(self, t):
        if t < 1:
            raise ValueError("time index must be >= 1")
        grid = (t - 1) % self.delay
        return normalize_log_weights(self._logw[grid])

    def weight_matrix(self, loss_table):
        if self.revealed != 0:
            raise ValueError("weight_matrix requires a fresh state")
        t_total, n = loss_table.shape
        cum = np.zeros((t_total, n))
        d = self.delay
        for g in range(d):
            sub = loss_table[g::d]           # grid times g+1, g+1+D, ...
            if sub.shape[0] > 1:
                csub = np.cumsum(sub[:-1], axis=0)
                cum[g + d::d] = csub
        logw = self._log_init - self.eta * cum
        return logw - logsumexp(logw, axis=1, keepdims=True)


class MarkovState(AggregatorState):
    """Forward-algorithm engine for an arbitrary first-order Markov prior:
    keeps the (unnormalized, log-space) filtered posterior over the active
    expert at the latest revealed time, and pushes it through the transition
    kernel to reach the forecast time."""

    algo = "g-markov"

    def __init__(self, prior, delay, eta):
        super().__init__(prior, delay, eta)
        self._log_init = _log_probs(prior.initial)
        self._log_trans = _log_probs(prior.transition)
        self._log_f = None  # filtered log-posterior at time `revealed`

    def _consume(self, losses):
        if self.revealed == 0:
            self._log_f = self._log_init - self.eta * losses
        else:
            self._log_f = _log_matvec_t(self._log_trans, self._log_f) - self.eta * losses

    def weights_for(self, t):
        if t < 1:
            raise ValueError("time index must be >= 1")
        if self.revealed == 0:
            v = self._log_init
            pushes = t - 1
        else:
            pushes = t - self.revealed
            if pushes < 0:
                raise ValueError("cannot forecast a time already conditioned on")
            v = self._log_f
        for _ in range(pushes):
            v = _log_matvec_t(self._log_trans, v)
        return normalize_log_weights(v)


def init_state(algo: str, prior: ExpertPrior, delay: int, eta: float) -> AggregatorState:
    """Build a fresh engine.  Weights for times 1..delay equal the prior
    marginals."""
    if algo == "v1":
        if delay != 1:
            raise ValueError("v1 is the one-step-ahead algorithm; use vdfc or vd for delay > 1")
        return ExpWeightsState(prior, delay, eta, algo="v1")
    if algo == "vdfc":
        return ExpWeightsState(prior, delay, eta, algo="vdfc")
    if algo == "vd":
        return ReplicatedState(prior, delay, eta)
    if algo == "g-markov":
        return MarkovState(prior, delay, eta)
    raise ValueError(f"unknown algorithm {algo!r}; choose from {ALGORITHMS}")


# ---------------------------------------------------------------------------
# Brute-force sequence enumeration (the oracle)
# ---------------------------------------------------------------------------

def enumerate_sequences(n_experts: int, length: int) -> np.ndarray:
    """All expert sequences of the given length as an (N^length, length)
    integer array."""
    count = n_experts ** length
    if count > ENUMERATION_GUARD:
        raise CapacityError(f"{n_experts}^{length} sequences exceed the enumeration guard")
    idx = np.arange(count)
    return np.array(np.unravel_index(idx, (n_experts,) * length)).T


def sequence_scores(prior, loss_table, eta, t, conditioned):
    """Log-scores log p(seq) - eta * sum of the first ``conditioned`` losses
    along each sequence of length ``t``.

    ``prior`` is an ExpertPrior or a callable mapping an (M, t) sequence
    array to a length-M vector of log-probabilities.
    """
    loss_table = np.asarray(loss_table, dtype=float)
    n = loss_table.shape[1]
    seqs = enumerate_sequences(n, t)
    if isinstance(prior, ExpertPrior):
        log_init = _log_probs(prior.initial)
        log_trans = _log_probs(prior.transition)
        logp = log_init[seqs[:, 0]]
        for i in range(1, t):
            logp = logp + log_trans[seqs[:, i - 1], seqs[:, i]]
    else:
        logp = np.asarray(prior(seqs), dtype=float)
    scores = logp.astype(float, copy=True)
    for tau in range(conditioned):
        scores -= eta * loss_table[tau, seqs[:, tau]]
    return seqs, scores


def brute_force_posterior(prior, loss_table, eta, t, delay) -> np.ndarray:
    """Exact posterior marginal of the active expert at time ``t`` given the
    losses revealed by then (times 1..t-delay), by full enumeration.
    Returns normalized log-weights."""
    if t < 1:
        raise ValueError("t must be >= 1")
    loss_table = np.asarray(loss_table, dtype=float)
    n = loss_table.shape[1]
    conditioned = max(t - delay, 0)
    if loss_table.shape[0] < conditioned:
        raise ValueError("loss table too short for the requested time")
    seqs, scores = sequence_scores(prior, loss_table, eta, t, conditioned)
    out = np.empty(n)
    for expert in range(n):
        mask = seqs[:, -1] == expert
        with np.errstate(invalid="ignore"):
            out[expert] = logsumexp(scores[mask]) if mask.any() else -np.inf
    return normalize_log_weights(out)


def replicated_log_prob(n_experts: int, delay: int):
    """Sequence log-probability of the replicated model: the first D active
    experts are uniform i.i.d. and every later one repeats the expert D steps
    back.  Usable as the callable prior of the brute-force oracle."""

    def logp(seqs: np.ndarray) -> np.ndarray:
        t = seqs.shape[1]
        free = min(t, delay)
        valid = np.ones(seqs.shape[0], dtype=bool)
        for i in range(delay, t):
            valid &= seqs[:, i] == seqs[:, i - delay]
        out = np.where(valid, -free * math.log(n_experts), -np.inf)
        return out

    return logp


# ---------------------------------------------------------------------------
# Learning-rate / weight-drift calculus for the delayed fully-connected engine
# ---------------------------------------------------------------------------

def drift_bound(eta: float, delay: int, loss_bound: float) -> float:
    """Largest possible single-weight change accumulated over delay-1 hidden
    steps: (1 - sqrt(q))^2 / (1 - q) with q = exp(-eta*(delay-1)*H).
    Zero at delay 1 or eta 0 (the limit value)."""
    if delay < 1:
        raise ValueError("delay must be >= 1")
    if eta < 0 or loss_bound <= 0:
        raise ValueError("eta must be >= 0 and the loss bound positive")
    exponent = eta * (delay - 1) * loss_bound
    if exponent == 0.0:
        return 0.0
    q = math.exp(-exponent)
    return (1.0 - math.sqrt(q)) ** 2 / (1.0 - q)


def drift_objective(x, a: float, n_experts: int):
    """The inner maximization objective: the drift of the leading weight x
    when the remaining mass shrinks by factor profile a."""
    x = np.asarray(x, dtype=float)
    denom = x * a + (1.0 - x) * (1.0 - a) / (n_experts - 1)
    return x - x * a / denom


def drift_argmax_x(a: float, n_experts: int) -> float:
    """Stationary point of the drift objective over x in (0, 1)."""
    if n_experts < 2:
        raise ValueError("need at least two experts")
    if not 0.0 < a < 1.0 / n_experts:
        raise ValueError("a must lie in (0, 1/N)")
    return (1.0 - a - math.sqrt(a * (1.0 - a) * (n_experts - 1))) / (1.0 - a * n_experts)


def drift_boundary_a(eta: float, delay: int, loss_bound: float, n_experts: int) -> float:
    """The extremal shrink factor a = q / (N - 1 + q), q = exp(-eta*(D-1)*H)."""
    q = math.exp(-eta * (delay - 1) * loss_bound)
    return q / ((n_experts - 1) + q)


@dataclass(frozen=True)
class EtaStar:
    """Tuned learning rate for the delayed fully-connected engine, with the
    associated sqrt(T) regret constant."""
    eta: float
    bound: float  # 2*sqrt(F*N*ln N)*sqrt(T)
    F: float
    U: float


def eta_star(n_experts: int, horizon: int, loss, delay: int,
             epsilon_frac: float = 0.1) -> EtaStar:
    """argmin over eta of ln(N)/eta + F*N*T*eta, clamped to the loss's
    exponential-concavity rate; F = B*L*U with U the linearized drift slope
    (1 + epsilon_frac)*(D-1)*H/4."""
    if n_experts < 2:
        raise ValueError("need at least two experts")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    u = (1.0 + epsilon_frac) * (delay - 1) * loss.range_bound_H / 4.0
    if u == 0.0:
        return EtaStar(loss.default_eta, 0.0, 0.0, 0.0)
    f = loss.pred_norm_B * loss.lipschitz_L * u
    eta = min(math.sqrt(math.log(n_experts) / (f * n_experts * horizon)),
              loss.default_eta)
    bound = 2.0 * math.sqrt(f * n_experts * math.log(n_experts)) * math.sqrt(horizon)
    return EtaStar(eta, bound, f, u)
