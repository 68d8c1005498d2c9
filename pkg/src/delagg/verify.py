"""Self-contained invariant and oracle suite, runnable from the CLI.

Every check is independent and seeded; `run_all` returns one result per
check and the CLI turns any failure into a nonzero exit code.
"""
from __future__ import annotations

import itertools
import math
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import aggregators as agg
from . import generators
from .fileio import parse_game_file, write_game_file
from .game import (GameInput, corollary1_bound, replicate_game, run_game,
                   theorem1_rhs, verify_replication_identity)
from .losses import LOG, SQUARE, check_exp_concavity
from .priors import fixed_share_prior, identity_prior, sequence_log_prob


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _check(name, cond, detail=""):
    return CheckResult(name, bool(cond), detail)


def check_prior_normalization(seed=0):
    worst = 0.0
    for n, t in [(2, 6), (3, 5)]:
        prior = fixed_share_prior(n, 0.3)
        total = math.fsum(
            math.exp(sequence_log_prob(prior, seq))
            for seq in itertools.product(range(n), repeat=t))
        worst = max(worst, abs(total - 1.0))
    return _check("prior sequence probabilities sum to one", worst <= 1e-9,
                  f"worst deviation {worst:.2e}")


def check_loss_constants(seed=0):
    rng = np.random.default_rng(seed)
    ok = True
    for loss in (SQUARE, LOG):
        omega = loss.sample_omega(rng, size=2000)
        lo, hi = loss.gamma_domain
        g1, g2 = rng.uniform(lo, hi, (2, 2000))
        v1, v2 = loss.fn(omega, g1), loss.fn(omega, g2)
        ok &= bool(np.all(v1 >= 0) and np.all(v1 <= loss.range_bound_H + 1e-12))
        ok &= bool(np.all(np.abs(v1 - v2) <= loss.lipschitz_L * np.abs(g1 - g2) + 1e-12))
    return _check("loss range and Lipschitz bounds", ok)


def check_exp_concavity_thresholds(seed=0):
    sq_pass = check_exp_concavity(SQUARE, 0.5, 20_000, seed).passed
    sq_fail = not check_exp_concavity(SQUARE, 2.0, 20_000, seed + 1).passed
    log_pass = check_exp_concavity(LOG, 1.0, 20_000, seed + 2).passed
    return _check("exponential-concavity thresholds (square 1/2, log 1)",
                  sq_pass and sq_fail and log_pass)


def check_update_invariants(seed=0):
    rng = np.random.default_rng(seed)
    ok = True
    for _ in range(50):
        n = int(rng.integers(2, 7))
        logw = agg.normalize_log_weights(rng.standard_normal(n))
        losses = rng.uniform(0, 1, n)
        new = agg.v1_update(logw, losses, 0.5)
        ok &= abs(np.exp(new).sum() - 1.0) <= 1e-12
        shifted = agg.v1_update(logw, losses + 0.37, 0.5)
        ok &= bool(np.max(np.abs(np.exp(new) - np.exp(shifted))) <= 1e-12)
        perm = rng.permutation(n)
        permuted = agg.v1_update(logw[perm], losses[perm], 0.5)
        ok &= bool(np.max(np.abs(permuted - new[perm])) <= 1e-12)
    return _check("simplex preservation, loss-shift invariance, permutation equivariance", ok)


def _drive(state, loss_table, t):
    while state.revealed < t - state.delay:
        state.consume(loss_table[state.revealed])
    return state.weights_for(t)


def check_oracle_equivalence(seed=0, tables=5, horizon=6):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in (2, 3):
        for delay in (1, 2, 3):
            for _ in range(tables):
                table = rng.uniform(0, 1, (horizon, n))
                cases = [
                    ("vdfc", identity_prior(n), identity_prior(n)),
                    ("g-markov", fixed_share_prior(n, 0.3), fixed_share_prior(n, 0.3)),
                    ("vd", identity_prior(n), agg.replicated_log_prob(n, delay)),
                ]
                if delay == 1:
                    cases.append(("v1", identity_prior(n), identity_prior(n)))
                for algo, prior, oracle_prior in cases:
                    state = agg.init_state(algo, prior, delay, 0.5)
                    for t in range(1, horizon + 1):
                        fast = np.exp(_drive(state, table, t))
                        ref = np.exp(agg.brute_force_posterior(
                            oracle_prior, table, 0.5, t, delay))
                        worst = max(worst, float(np.max(np.abs(fast - ref))))
    return _check("fast-path weights match the brute-force posterior",
                  worst <= 1e-10, f"max abs diff {worst:.2e}")


def check_reduction_chain(seed=0):
    rng = np.random.default_rng(seed)
    n, horizon = 4, 10
    table = rng.uniform(0, 1, (horizon, n))
    prior = identity_prior(n)
    rows = {}
    for algo in ("v1", "vdfc", "vd", "g-markov"):
        state = agg.init_state(algo, prior, 1, 0.5)
        rows[algo] = np.stack([_drive(state, table, t) for t in range(1, horizon + 1)])
    base = rows["v1"]
    ok = all(np.array_equal(rows[a], base) for a in ("vdfc", "vd", "g-markov"))
    return _check("delay-1 reduction chain is bitwise identical", ok)


def check_weight_concentration(seed=0):
    rng = np.random.default_rng(seed)
    ok = True
    for _ in range(20):
        n = int(rng.integers(2, 6))
        table = rng.uniform(0, 1, (12, n))
        state = agg.init_state("vdfc", identity_prior(n), 2, 0.5)
        for row in table:
            state.consume(row)
        cum = table.sum(axis=0)
        leader = int(np.argmin(cum))
        if np.sum(cum == cum[leader]) == 1:
            w = np.exp(state.weights_for(state.revealed + 2))
            ok &= bool(np.all(w[leader] > np.delete(w, leader)))
    return _check("smallest cumulative loss holds the largest weight", ok)


def check_drift_calculus(seed=0, trials=50):
    rng = np.random.default_rng(seed)
    xs = np.arange(1e-4, 1.0, 1e-4)
    ok = True
    worst = 0.0
    done = 0
    while done < trials:
        eta = rng.uniform(0.02, 0.5)
        delay = int(rng.integers(2, 8))
        h = rng.uniform(0.2, 1.0)
        n = int(rng.integers(2, 7))
        if eta * (delay - 1) * h > 3.0:
            continue
        done += 1
        a = agg.drift_boundary_a(eta, delay, h, n)
        grid_max = float(np.max(agg.drift_objective(xs, a, n)))
        bound = agg.drift_bound(eta, delay, h)
        worst = max(worst, abs(grid_max - bound))
        ok &= grid_max <= bound + 1e-6 and abs(grid_max - bound) <= 1e-6
    return _check("grid search of the weight-drift objective matches its closed form",
                  ok, f"worst gap {worst:.2e}")


def check_regret_bounds(seed=0, games=10):
    ok = True
    for i in range(games):
        game = generators.generate_game("noisy-experts", 6, 200, 0.3, seed + i)
        trace = run_game(game, agg.init_state("v1", identity_prior(6), 1, 0.5))
        ok &= trace.regret <= math.log(6) / 0.5 + 1e-9
        ok &= bool(np.all(trace.h <= trace.m + 1e-12))
        game_d = generators.generate_game("noisy-experts", 4, 210, 0.3, seed + i,
                                          delay=3)
        trace_d = run_game(game_d, agg.init_state("vd", identity_prior(4), 3, 0.5))
        ok &= trace_d.regret <= 3 * math.log(4) / 0.5 + 1e-9
        ok &= bool(np.all(trace_d.h <= trace_d.m + 1e-12))
    return _check("one-step and replicated regret bounds, mixloss domination", ok)


def check_theorem1(seed=0, tables=5):
    rng = np.random.default_rng(seed)
    ok = True
    worst = 0.0
    for prior in (identity_prior(3), fixed_share_prior(3, 0.3)):
        for _ in range(tables):
            game = GameInput(rng.uniform(0, 1, 6), rng.uniform(0, 1, (6, 3)), 1, SQUARE)
            trace = run_game(game, agg.init_state("g-markov", prior, 1, 0.5))
            rhs = theorem1_rhs(game, prior, 0.5)
            ok &= trace.total_loss <= rhs + 1e-9
            worst = max(worst, abs(trace.total_mixloss - rhs))
    return _check("one-step cumulative loss below its sequence-expectation bound",
                  ok and worst <= 1e-9, f"mixloss telescope gap {worst:.2e}")


def check_corollary1(seed=0):
    prior = identity_prior(5)
    ok = abs(corollary1_bound(prior, [2] * 7, 0.5) - math.log(5) / 0.5) <= 1e-12
    ok &= corollary1_bound(prior, [0, 1, 0], 0.5) == math.inf
    return _check("fixed-sequence regret bound from the prior mass", ok)


def check_replication(seed=0):
    rng = np.random.default_rng(seed)
    source = GameInput(rng.uniform(0, 1, 30), rng.uniform(0, 1, (30, 4)), 1, SQUARE)
    ok = True
    for delay in (2, 3):
        replicated = replicate_game(source, delay)
        trace = run_game(replicated,
                         agg.init_state("vdfc", identity_prior(4), delay, 0.5),
                         record_weights=True)
        report = verify_replication_identity(source, trace.weights, delay)
        ok &= report.passed
    return _check("block replication loss identities", ok)


def check_file_roundtrip(seed=0):
    game = generators.generate_game("noisy-experts", 3, 25, 0.2, seed)
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "game.csv"
        write_game_file(path, game)
        parsed = parse_game_file(path)
    ok = (np.array_equal(parsed.outcomes, game.outcomes)
          and np.array_equal(parsed.forecasts, game.forecasts))
    return _check("game file write/parse round-trip is exact", ok)


CHECKS = [
    check_prior_normalization,
    check_loss_constants,
    check_exp_concavity_thresholds,
    check_update_invariants,
    check_oracle_equivalence,
    check_reduction_chain,
    check_weight_concentration,
    check_drift_calculus,
    check_regret_bounds,
    check_theorem1,
    check_corollary1,
    check_replication,
    check_file_roundtrip,
]


def run_all(seed: int = 0) -> list[CheckResult]:
    return [check(seed=seed) for check in CHECKS]
