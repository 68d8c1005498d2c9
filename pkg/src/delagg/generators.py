"""Synthetic game generators for benchmarking the aggregators.

All generators are deterministic functions of their seed.  Outcomes and
forecasts live in [0, 1], matching the square loss domain.
"""
from __future__ import annotations

import numpy as np

from .game import GameInput
from .losses import SQUARE, LossSpec

MODELS = ("noisy-experts", "drifting-best", "adversarial-swap")


def _signal(rng: np.random.Generator, steps: int) -> np.ndarray:
    """Smooth bounded latent signal: a random sinusoid inside [0.3, 0.7]."""
    phase = rng.uniform(0.0, 2.0 * np.pi)
    period = steps / rng.uniform(3.0, 8.0)
    t = np.arange(1, steps + 1)
    return 0.5 + 0.18 * np.sin(2.0 * np.pi * t / period + phase)


def generate_game(model: str, n_experts: int, steps: int, noise: float,
                  seed: int, delay: int = 1, loss: LossSpec = SQUARE,
                  block: int = 1) -> GameInput:
    """Build a synthetic game.

    noisy-experts: latent signal observed by every expert through its own
    noise channel, variances increasing with the expert index.

    drifting-best: the low-noise expert index changes every T/5 steps; the
    experts' errors share a common shock so that averaging them does not
    cancel, and the rotation is asymmetric (expert 0 is the low-noise one in
    three of the five segments), which makes a single expert the long-run
    leader while the short-run leader drifts.

    adversarial-swap: experts 0 and 1 alternate being exactly right in
    blocks of length ``block``; the off expert forecasts the mirrored value.
    """
    if n_experts < 1 or steps < 1:
        raise ValueError("need at least one expert and one step")
    rng = np.random.default_rng(seed)

    if model == "noisy-experts":
        signal = _signal(rng, steps)
        outcomes = np.clip(signal, 0.0, 1.0)
        scales = noise * np.arange(1, n_experts + 1) / n_experts
        forecasts = np.clip(
            signal[:, None] + scales * rng.standard_normal((steps, n_experts)),
            0.0, 1.0)
    elif model == "drifting-best":
        signal = _signal(rng, steps)
        outcomes = np.clip(signal, 0.0, 1.0)
        seg_len = max(steps // 5, 1)
        segments = np.minimum(np.arange(steps) // seg_len, 4)
        rotating = max(n_experts - 1, 1)
        best_of_segment = np.where(
            segments % 2 == 0, 0, 1 + (segments // 2) % rotating)
        sigma = np.tile(noise * (1.0 + 0.05 * np.arange(n_experts)), (steps, 1))
        sigma[np.arange(steps), best_of_segment] = 0.02 * noise
        shock = rng.uniform(-1.0, 1.0, steps)              # shared across experts
        jitter = 0.02 * noise * rng.standard_normal((steps, n_experts))
        forecasts = np.clip(signal[:, None] + sigma * shock[:, None] + jitter,
                            0.0, 1.0)
    elif model == "adversarial-swap":
        if block < 1:
            raise ValueError("block length must be >= 1")
        parity = (np.arange(steps) // block) % 2
        outcomes = np.where(parity == 0, 0.25, 0.75)
        forecasts = np.empty((steps, n_experts))
        on = outcomes
        off = 1.0 - outcomes
        forecasts[:, 0] = np.where(parity == 0, on, off)
        if n_experts > 1:
            forecasts[:, 1] = np.where(parity == 0, off, on)
        if n_experts > 2:
            forecasts[:, 2:] = np.clip(
                0.5 + noise * rng.standard_normal((steps, n_experts - 2)),
                0.0, 1.0)
    else:
        raise ValueError(f"unknown generator model {model!r}; choose from {MODELS}")

    return GameInput(outcomes=outcomes, forecasts=forecasts, delay=delay, loss=loss)
