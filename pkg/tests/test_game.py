import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delagg import aggregators as agg
from delagg.game import (GameInput, corollary1_bound, replicate_game, run_game,
                         theorem1_rhs, verify_replication_identity)
from delagg.generators import generate_game
from delagg.losses import LOG, SQUARE
from delagg.priors import fixed_share_prior, identity_prior


def _state(algo, n, delay, eta=0.5, prior=None):
    return agg.init_state(algo, prior or identity_prior(n), delay, eta)


# ---------------------------------------------------------------------------
# game inputs and the protocol
# ---------------------------------------------------------------------------

def test_game_input_validation():
    with pytest.raises(ValueError):
        GameInput(np.array([0.5]), np.array([[0.5], [0.5]]), 1, SQUARE)
    with pytest.raises(ValueError):
        GameInput(np.array([1.5, 0.5]), np.full((2, 2), 0.5), 1, SQUARE)
    with pytest.raises(ValueError):
        GameInput(np.array([0.5, 0.5]), np.full((2, 2), 1.5), 1, SQUARE)
    with pytest.raises(ValueError):
        GameInput(np.array([0.5, 0.5]), np.full((2, 2), 0.5), 0, SQUARE)
    with pytest.raises(ValueError):
        # log-loss outcomes must be binary
        GameInput(np.array([0.5, 0.5]), np.full((2, 2), 0.5), 1, LOG)


def test_run_game_rejects_mismatched_state():
    game = generate_game("noisy-experts", 3, 10, 0.2, 0)
    with pytest.raises(ValueError):
        run_game(game, _state("vdfc", 3, 2))  # delay mismatch
    with pytest.raises(ValueError):
        run_game(game, _state("v1", 4, 1))    # expert-count mismatch
    used = _state("v1", 3, 1)
    used.consume([0.1, 0.2, 0.3])
    with pytest.raises(ValueError):
        run_game(game, used)                  # partially consumed state


def test_trace_shapes_and_accounting():
    game = generate_game("noisy-experts", 4, 30, 0.3, 1)
    trace = run_game(game, _state("v1", 4, 1), record_weights=True)
    t, n = 30, 4
    assert trace.h.shape == (t,) and trace.m.shape == (t,)
    assert trace.gamma.shape == (t,) and trace.expert_losses.shape == (t, n)
    assert trace.weights.shape == (t, n)
    assert np.allclose(trace.weights.sum(axis=1), 1.0, atol=1e-12)
    assert trace.total_loss == pytest.approx(float(trace.h.sum()))
    assert trace.regret == pytest.approx(
        trace.total_loss - float(trace.cumulative_expert_losses.min()))
    # the regret curve tracks the running best expert, not the final one
    cum = np.cumsum(trace.expert_losses, axis=0)
    assert np.allclose(trace.regret_curve, np.cumsum(trace.h) - cum.min(axis=1))


def test_first_forecasts_use_prior_weights():
    game = generate_game("noisy-experts", 3, 12, 0.3, 2, delay=4)
    trace = run_game(game, _state("vdfc", 3, 4), record_weights=True)
    assert np.allclose(trace.weights[:4], 1 / 3, atol=1e-12)
    assert np.allclose(trace.gamma[:4], game.forecasts[:4].mean(axis=1), atol=1e-12)


def test_single_expert_game_has_zero_regret():
    game = generate_game("noisy-experts", 1, 20, 0.3, 5)
    trace = run_game(game, _state("vdfc", 1, 1))
    assert trace.regret == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(trace.gamma, game.forecasts[:, 0])


@pytest.mark.parametrize("algo,delay", [("v1", 1), ("vdfc", 4), ("vd", 4),
                                        ("g-markov", 4)])
def test_mixloss_dominates_algorithm_loss(algo, delay):
    prior = fixed_share_prior(5, 0.1) if algo == "g-markov" else identity_prior(5)
    game = generate_game("noisy-experts", 5, 60, 0.35, 3, delay=delay)
    trace = run_game(game, _state(algo, 5, delay, prior=prior))
    assert np.all(trace.h <= trace.m + 1e-12)


def test_one_step_regret_bound():
    for seed in range(5):
        game = generate_game("drifting-best", 6, 300, 0.3, seed)
        trace = run_game(game, _state("v1", 6, 1))
        assert trace.regret <= math.log(6) / 0.5 + 1e-9


def test_replicated_regret_bound():
    for seed in range(5):
        game = generate_game("drifting-best", 4, 300, 0.3, seed, delay=5)
        trace = run_game(game, _state("vd", 4, 5))
        assert trace.regret <= 5 * math.log(4) / 0.5 + 1e-9


# ---------------------------------------------------------------------------
# loss bounds by enumeration
# ---------------------------------------------------------------------------

def test_theorem1_identity_prior_closed_form():
    rng = np.random.default_rng(4)
    game = GameInput(rng.uniform(0, 1, 5), rng.uniform(0, 1, (5, 3)), 1, SQUARE)
    table = SQUARE.table(game.outcomes, game.forecasts)
    cum = table.sum(axis=0)
    expect = -math.log(np.mean(np.exp(-0.5 * cum))) / 0.5
    got = theorem1_rhs(game, identity_prior(3), 0.5)
    assert got == pytest.approx(expect, abs=1e-12)


def test_theorem1_bounds_loss_and_equals_mixloss_sum():
    rng = np.random.default_rng(8)
    for prior in (identity_prior(3), fixed_share_prior(3, 0.3)):
        for _ in range(5):
            game = GameInput(rng.uniform(0, 1, 6), rng.uniform(0, 1, (6, 3)),
                             1, SQUARE)
            trace = run_game(game, _state("g-markov", 3, 1, prior=prior))
            rhs = theorem1_rhs(game, prior, 0.5)
            assert trace.total_loss <= rhs + 1e-9
            assert trace.total_mixloss == pytest.approx(rhs, abs=1e-9)


def test_theorem1_requires_delay_one():
    game = generate_game("noisy-experts", 2, 6, 0.2, 0, delay=2)
    with pytest.raises(ValueError):
        theorem1_rhs(game, identity_prior(2), 0.5)


def test_corollary1_values():
    prior = identity_prior(4)
    assert corollary1_bound(prior, [1] * 9, 0.5) == pytest.approx(math.log(4) / 0.5)
    assert corollary1_bound(prior, [0, 1], 0.5) == math.inf
    fs = fixed_share_prior(2, 0.2)
    expect = -(math.log(0.5) + math.log(0.9) + math.log(0.1)) / 0.5
    assert corollary1_bound(fs, [0, 0, 1], 0.5) == pytest.approx(expect, abs=1e-12)


def test_corollary1_bounds_actual_regret_against_sequence():
    # regret against a fixed comparator sequence, delay 1, square loss
    rng = np.random.default_rng(12)
    prior = fixed_share_prior(3, 0.3)
    for _ in range(5):
        game = GameInput(rng.uniform(0, 1, 6), rng.uniform(0, 1, (6, 3)), 1, SQUARE)
        trace = run_game(game, _state("g-markov", 3, 1, prior=prior))
        table = trace.expert_losses
        seq = rng.integers(0, 3, 6)
        seq_loss = float(table[np.arange(6), seq].sum())
        assert trace.total_loss - seq_loss <= corollary1_bound(prior, seq, 0.5) + 1e-9


# ---------------------------------------------------------------------------
# block replication
# ---------------------------------------------------------------------------

def test_replicate_game_structure():
    src = generate_game("noisy-experts", 3, 7, 0.2, 0)
    rep = replicate_game(src, 3)
    assert rep.horizon == 21 and rep.delay == 3
    assert np.array_equal(rep.outcomes[::3], src.outcomes)
    assert np.array_equal(rep.outcomes[1::3], src.outcomes)
    assert np.array_equal(rep.forecasts[2::3], src.forecasts)
    with pytest.raises(ValueError):
        replicate_game(rep, 2)


def test_replication_cumulative_losses_scale_exactly():
    src = generate_game("noisy-experts", 4, 11, 0.3, 9)
    for delay in (2, 5):
        rep = replicate_game(src, delay)
        t_src = SQUARE.table(src.outcomes, src.forecasts)
        t_rep = SQUARE.table(rep.outcomes, rep.forecasts)
        for expert in range(4):
            # exact identity in rational arithmetic, independent of float
            # summation order
            rep_sum = sum(Fraction(x) for x in t_rep[:, expert])
            src_sum = sum(Fraction(x) for x in t_src[:, expert])
            assert rep_sum == delay * src_sum


@pytest.mark.parametrize("delay", [2, 3, 5])
def test_replication_identity_report(delay):
    rng = np.random.default_rng(delay)
    src = GameInput(rng.uniform(0, 1, 20), rng.uniform(0, 1, (20, 4)), 1, SQUARE)
    rep = replicate_game(src, delay)
    trace = run_game(rep, _state("vdfc", 4, delay), record_weights=True)
    report = verify_replication_identity(src, trace.weights, delay)
    assert report.loss_identity_exact
    assert abs(report.total_loss_gap) <= 1e-12
    assert report.regret_inequality_ok
    assert report.passed


def test_replication_identity_rejects_wrong_shape():
    src = generate_game("noisy-experts", 2, 5, 0.2, 0)
    with pytest.raises(ValueError):
        verify_replication_identity(src, np.full((9, 2), 0.5), 2)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("model", ["noisy-experts", "drifting-best",
                                   "adversarial-swap"])
def test_generators_deterministic_and_in_domain(model):
    a = generate_game(model, 4, 50, 0.3, 42, block=3)
    b = generate_game(model, 4, 50, 0.3, 42, block=3)
    assert np.array_equal(a.outcomes, b.outcomes)
    assert np.array_equal(a.forecasts, b.forecasts)
    assert np.all((a.outcomes >= 0) & (a.outcomes <= 1))
    assert np.all((a.forecasts >= 0) & (a.forecasts <= 1))


def test_generator_seeds_differ():
    a = generate_game("noisy-experts", 3, 40, 0.3, 1)
    b = generate_game("noisy-experts", 3, 40, 0.3, 2)
    assert not np.array_equal(a.forecasts, b.forecasts)


def test_noisy_experts_zero_noise_is_perfect():
    game = generate_game("noisy-experts", 3, 25, 0.0, 7)
    table = SQUARE.table(game.outcomes, game.forecasts)
    assert np.max(table) <= 1e-25


def test_adversarial_swap_frozen_losses():
    # block 1, two experts: the on expert is exact, the off expert mirrors
    # (distance 0.5, loss 0.25); over 10 steps each expert is off 5 times
    game = generate_game("adversarial-swap", 2, 10, 0.0, 0, block=1)
    table = SQUARE.table(game.outcomes, game.forecasts)
    assert np.allclose(table.sum(axis=0), 1.25, atol=1e-12)
    assert np.allclose(np.sort(table, axis=1)[:, 0], 0.0)


def test_unknown_model_raises():
    with pytest.raises(ValueError):
        generate_game("white-noise", 2, 10, 0.1, 0)


@given(st.integers(2, 5), st.integers(10, 60), st.integers(0, 1000))
@settings(max_examples=25)
def test_drifting_best_long_run_leader_is_expert_zero(n, steps, seed):
    game = generate_game("drifting-best", n, steps, 0.4, seed)
    assert game.horizon == steps and game.num_experts == n
    table = SQUARE.table(game.outcomes, game.forecasts)
    assert np.all(np.isfinite(table))
