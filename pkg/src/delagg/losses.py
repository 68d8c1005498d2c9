"""Loss functions on the unit interval and numerical exponential-concavity checks.

Both losses are scalar, with outcomes and forecasts living in [0, 1].  The
log loss clips forecasts away from {0, 1} so its range stays finite.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

EPS_CLIP = 1e-6
TOL_CONCAVITY = 1e-12


@dataclass(frozen=True)
class LossSpec:
    """A named loss with its domain, range bound H, Lipschitz constant L,
    prediction norm bound B and a default learning rate."""

    name: str
    omega_domain: tuple[float, float]
    gamma_domain: tuple[float, float]
    range_bound_H: float
    lipschitz_L: float
    pred_norm_B: float
    default_eta: float
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    # discrete outcome support, when the outcome is not continuous (log loss)
    omega_values: Optional[tuple[float, ...]] = None

    def __call__(self, omega, gamma):
        return self.fn(omega, gamma)

    def table(self, outcomes, forecasts) -> np.ndarray:
        """Per-step per-expert loss matrix (T, N)."""
        outcomes = np.asarray(outcomes, dtype=float)
        forecasts = np.asarray(forecasts, dtype=float)
        return np.asarray(self.fn(outcomes[:, None], forecasts), dtype=float)

    def sample_omega(self, rng, size=None):
        if self.omega_values is not None:
            return rng.choice(np.asarray(self.omega_values, dtype=float), size=size)
        lo, hi = self.omega_domain
        return rng.uniform(lo, hi, size=size)


def _check_interval(x, lo, hi, what):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{what} must be finite")
    if np.any(x < lo) or np.any(x > hi):
        raise ValueError(f"{what} out of domain [{lo}, {hi}]")
    return x


def square_loss(omega, gamma):
    """(omega - gamma)^2 with both arguments in [0, 1]."""
    omega = _check_interval(omega, 0.0, 1.0, "omega")
    gamma = _check_interval(gamma, 0.0, 1.0, "gamma")
    return (omega - gamma) ** 2


def log_loss(omega, gamma):
    """-omega*ln(g) - (1-omega)*ln(1-g) with g the forecast clipped into
    [EPS_CLIP, 1 - EPS_CLIP] and omega in {0, 1}."""
    omega = np.asarray(omega, dtype=float)
    if not np.all(np.isfinite(omega)) or np.any((omega != 0.0) & (omega != 1.0)):
        raise ValueError("omega must be 0 or 1 for the log loss")
    gamma = _check_interval(gamma, 0.0, 1.0, "gamma")
    g = np.clip(gamma, EPS_CLIP, 1.0 - EPS_CLIP)
    return -(omega * np.log(g) + (1.0 - omega) * np.log1p(-g))


SQUARE = LossSpec(
    name="square",
    omega_domain=(0.0, 1.0),
    gamma_domain=(0.0, 1.0),
    range_bound_H=1.0,
    lipschitz_L=2.0,
    pred_norm_B=1.0,
    default_eta=0.5,
    fn=square_loss,
)

LOG = LossSpec(
    name="log",
    omega_domain=(0.0, 1.0),
    gamma_domain=(EPS_CLIP, 1.0 - EPS_CLIP),
    range_bound_H=-np.log(EPS_CLIP),
    lipschitz_L=1.0 / EPS_CLIP,
    pred_norm_B=1.0,
    default_eta=1.0,
    fn=log_loss,
    omega_values=(0.0, 1.0),
)

LOSSES = {"square": SQUARE, "log": LOG}


def get_loss(name: str) -> LossSpec:
    try:
        return LOSSES[name]
    except KeyError:
        raise ValueError(f"unknown loss {name!r}; choose from {sorted(LOSSES)}")


@dataclass(frozen=True)
class ConcavityReport:
    passed: bool
    worst_margin: float
    # (omega, support points, probabilities) of the worst / violating sample
    counterexample: Optional[tuple[float, np.ndarray, np.ndarray]]


def _concavity_margin(loss: LossSpec, eta: float, omega, gammas, probs):
    """lhs - rhs of the exponential-concavity inequality, vectorized over rows.

    gammas, probs: (m, k).  omega: (m,).  Negative margin means violation.
    """
    mix = np.sum(probs * gammas, axis=1)
    lo, hi = loss.gamma_domain
    mix = np.clip(mix, lo, hi)  # guard float drift out of the convex domain
    lhs = np.exp(-eta * loss.fn(omega, mix))
    rhs = np.sum(probs * np.exp(-eta * loss.fn(omega[:, None], gammas)), axis=1)
    return lhs - rhs


def check_exp_concavity(loss: LossSpec, eta: float, trials: int, seed: int,
                        refine: bool = True) -> ConcavityReport:
    """Monte Carlo refutation search for eta-exponential concavity.

    Draws random outcomes, random finite supports of 2..8 forecasts and random
    mixing probabilities; flags the first sample where the mixture's
    exponentiated loss falls below the mixed exponentiated losses by more than
    TOL_CONCAVITY.  If no violation is sampled, optionally refines around the
    worst sample with a shrinking random local search.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if eta <= 0:
        raise ValueError("eta must be positive")
    rng = np.random.default_rng(seed)
    ks = rng.integers(2, 9, size=trials)
    order = np.arange(trials)
    lo, hi = loss.gamma_domain

    worst = (np.inf, None)  # (margin, (omega, gammas, probs))
    first_violation = None  # (trial index, sample)
    for k in range(2, 9):
        mask = ks == k
        m = int(mask.sum())
        if m == 0:
            continue
        omega = np.asarray(loss.sample_omega(rng, size=m), dtype=float)
        gammas = rng.uniform(lo, hi, size=(m, k))
        raw = rng.exponential(size=(m, k))
        probs = raw / raw.sum(axis=1, keepdims=True)
        margins = _concavity_margin(loss, eta, omega, gammas, probs)
        i = int(np.argmin(margins))
        if margins[i] < worst[0]:
            worst = (float(margins[i]), (float(omega[i]), gammas[i].copy(), probs[i].copy()))
        viol = np.flatnonzero(margins < -TOL_CONCAVITY)
        if viol.size:
            j = viol[np.argmin(order[mask][viol])]
            idx = int(order[mask][j])
            if first_violation is None or idx < first_violation[0]:
                first_violation = (idx, (float(omega[j]), gammas[j].copy(), probs[j].copy()))

    if first_violation is not None:
        _, sample = first_violation
        return ConcavityReport(False, worst[0], sample)

    if refine and worst[1] is not None:
        margin, sample = _refine_worst(loss, eta, worst[0], worst[1], rng)
        if margin < -TOL_CONCAVITY:
            return ConcavityReport(False, margin, sample)
        worst = (margin, sample)

    return ConcavityReport(True, worst[0], worst[1])


def _refine_worst(loss, eta, margin, sample, rng, rounds=40, batch=64):
    """Local random search around the worst Monte Carlo sample."""
    omega, gammas, probs = sample
    lo, hi = loss.gamma_domain
    width = hi - lo
    sigma = 0.1 * width
    best = (margin, sample)
    for _ in range(rounds):
        omega0, g0, p0 = best[1]
        k = g0.size
        g = np.clip(g0 + sigma * rng.standard_normal((batch, k)), lo, hi)
        p = np.abs(p0 + sigma * rng.standard_normal((batch, k)))
        p /= p.sum(axis=1, keepdims=True)
        if loss.omega_values is not None:
            om = rng.choice(np.asarray(loss.omega_values, float), size=batch)
        else:
            olo, ohi = loss.omega_domain
            om = np.clip(omega0 + sigma * rng.standard_normal(batch), olo, ohi)
        margins = _concavity_margin(loss, eta, om, g, p)
        i = int(np.argmin(margins))
        if margins[i] < best[0]:
            best = (float(margins[i]), (float(om[i]), g[i], p[i]))
        sigma *= 0.85
    return best
