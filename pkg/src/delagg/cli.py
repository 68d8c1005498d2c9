"""Command-line interface: run games, generate data, sweep parameters,
verify invariants and print theoretical bounds."""
from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import aggregators as agg
from . import generators, verify
from .fileio import GameFileError, parse_game_file, write_game_file, write_trace_json
from .game import GameInput, run_game
from .losses import get_loss
from .priors import ExpertPrior, fixed_share_prior, identity_prior, sequence_log_prob

USAGE_ERROR = 2


@dataclass
class RunConfig:
    algo: str
    loss_name: str
    prior_spec: str
    delay: int
    eta: str            # decimal literal or "auto"
    seed: int
    data: Optional[str]
    gen: Optional[str]
    experts: int
    steps: int
    noise: float
    block: int
    out: Optional[str]
    record_weights: bool = False
    epsilon_frac: float = 0.1


def parse_prior_spec(spec: str, n_experts: int) -> ExpertPrior:
    if spec == "identity":
        return identity_prior(n_experts)
    if spec.startswith("fixed-share:"):
        alpha = float(spec.split(":", 1)[1])
        return fixed_share_prior(n_experts, alpha)
    raise ValueError(f"unknown prior {spec!r}; use 'identity' or 'fixed-share:ALPHA'")


def _load_game(cfg: RunConfig, loss, delay: int) -> GameInput:
    if cfg.data:
        return parse_game_file(cfg.data, loss=loss, delay=delay)
    if cfg.gen:
        block = cfg.block if cfg.block else delay
        return generators.generate_game(cfg.gen, cfg.experts, cfg.steps, cfg.noise,
                                        cfg.seed, delay=delay, loss=loss, block=block)
    raise ValueError("either --data or --gen is required")


def _resolve_eta(eta_spec: str, n_experts: int, steps: int, loss, delay: int,
                 epsilon_frac: float) -> float:
    if eta_spec == "auto":
        return agg.eta_star(n_experts, steps, loss, delay, epsilon_frac).eta
    return float(eta_spec)


def _run_one(cfg: RunConfig):
    loss = get_loss(cfg.loss_name)
    game = _load_game(cfg, loss, cfg.delay)
    prior = parse_prior_spec(cfg.prior_spec, game.num_experts)
    eta = _resolve_eta(cfg.eta, game.num_experts, game.horizon, loss, cfg.delay,
                       cfg.epsilon_frac)
    state = agg.init_state(cfg.algo, prior, cfg.delay, eta)
    trace = run_game(game, state, record_weights=cfg.record_weights)
    return game, eta, trace


def _algo_bound(algo: str, prior_spec: str, n_experts: int, steps: int, eta: float,
                loss, delay: int, epsilon_frac: float) -> float:
    """Theoretical regret bound reported in sweep rows: the sqrt(T) constant
    for the delayed fully-connected engine, otherwise the fixed-sequence
    bound of the constant comparator (per grid for the replicated engine)."""
    if algo == "vdfc" and delay > 1:
        return agg.eta_star(n_experts, steps, loss, delay, epsilon_frac).bound
    prior = parse_prior_spec(prior_spec, n_experts)
    if algo == "vd":
        per_grid = -sequence_log_prob(prior, [0] * max(steps // delay, 1)) / eta
        return delay * per_grid
    return -sequence_log_prob(prior, [0] * steps) / eta


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    game, eta, trace = _run_one(cfg)
    extra = {"seed": cfg.seed, "prior": cfg.prior_spec, "eta_policy": cfg.eta}
    if cfg.out:
        write_trace_json(cfg.out, trace, extra)
    print(f"algo={trace.algo} N={game.num_experts} T={game.horizon} D={game.delay} "
          f"eta={eta:.6g} HT={trace.total_loss:.6f} "
          f"best_LT={float(trace.cumulative_expert_losses.min()):.6f} "
          f"regret={trace.regret:.6f}")
    return 0


def cmd_gen(args) -> int:
    loss = get_loss(args.loss)
    game = generators.generate_game(args.model, args.experts, args.steps, args.noise,
                                    args.seed, delay=1, loss=loss,
                                    block=args.block or 1)
    write_game_file(args.out, game)
    print(f"wrote {args.out}: N={game.num_experts} T={game.horizon}")
    return 0


def cmd_sweep(args) -> int:
    loss = get_loss(args.loss)
    etas = [e for e in args.eta_grid.split(",") if e]
    delays = [int(d) for d in args.delay_grid.split(",")]
    algos = [a for a in args.algo_list.split(",") if a]
    seeds = [int(s) for s in args.seeds.split(",")]
    rows = []
    for algo in algos:
        for eta_spec in etas:
            for delay in delays:
                if algo == "v1" and delay != 1:
                    continue  # one-step algorithm; other delays have no v1 cell
                for seed in seeds:
                    cfg = _config_from_args(args, algo=algo, eta=eta_spec,
                                            delay=delay, seed=seed)
                    game, eta, trace = _run_one(cfg)
                    bound = _algo_bound(algo, cfg.prior_spec, game.num_experts,
                                        game.horizon, eta, loss, delay,
                                        cfg.epsilon_frac)
                    rows.append((algo, eta, delay, seed, trace.total_loss,
                                 float(trace.cumulative_expert_losses.min()),
                                 trace.regret, bound))
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3]))
    out = Path(args.out)
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algo", "eta", "D", "seed", "HT", "best_LT", "regret", "bound"])
        for algo, eta, delay, seed, ht, best, regret, bound in rows:
            writer.writerow([algo, format(eta, ".17g"), delay, seed,
                             format(ht, ".17g"), format(best, ".17g"),
                             format(regret, ".17g"), format(bound, ".17g")])
    print(f"wrote {out}: {len(rows)} rows")
    return 0


def cmd_verify(args) -> int:
    results = verify.run_all(seed=args.seed)
    failed = 0
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        detail = f"  ({res.detail})" if res.detail else ""
        print(f"[{status}] {res.name}{detail}")
        failed += not res.passed
    if failed:
        print(f"{failed} check(s) failed")
        return 1
    print(f"all {len(results)} checks passed")
    return 0


def cmd_bound(args) -> int:
    loss = get_loss(args.loss)
    n, delay, steps = args.experts, args.delay, args.steps
    eta = float(args.eta) if args.eta is not None else loss.default_eta
    star = agg.eta_star(n, steps, loss, delay, args.epsilon_frac)
    print(f"v1_regret_bound {math.log(n) / eta:.15g}")
    print(f"vd_regret_bound {delay * math.log(n) / eta:.15g}")
    print(f"eta_star {star.eta:.15g}")
    print(f"vdfc_regret_bound {star.bound * 1.0:.15g}")
    return 0


def _config_from_args(args, **overrides) -> RunConfig:
    values = dict(
        algo=getattr(args, "algo", "v1"),
        loss_name=args.loss,
        prior_spec=getattr(args, "prior", "identity"),
        delay=getattr(args, "delay", 1),
        eta=getattr(args, "eta", None) or "auto",
        seed=getattr(args, "seed", 0),
        data=getattr(args, "data", None),
        gen=getattr(args, "gen", None),
        experts=getattr(args, "experts", 2),
        steps=getattr(args, "steps", 100),
        noise=getattr(args, "noise", 0.2),
        block=getattr(args, "block", 0),
        out=getattr(args, "out", None),
        record_weights=getattr(args, "record_weights", False),
        epsilon_frac=getattr(args, "epsilon_frac", 0.1),
    )
    values.update(overrides)
    return RunConfig(**values)


def _add_game_source(parser):
    parser.add_argument("--data", help="game file (CSV) to play")
    parser.add_argument("--gen", choices=generators.MODELS,
                        help="generate the game instead of reading a file")
    parser.add_argument("--experts", type=int, default=2)
    parser.add_argument("--steps", type=int, default=100)
    parser.add_argument("--noise", type=float, default=0.2)
    parser.add_argument("--block", type=int, default=0,
                        help="swap block length for adversarial-swap (0: use the delay)")
    parser.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="delagg",
        description="Delayed-feedback prediction with expert advice via exponential reweighing")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="play one game and write its trace")
    p_run.add_argument("--algo", choices=agg.ALGORITHMS, required=True)
    p_run.add_argument("--loss", choices=["square", "log"], default="square")
    p_run.add_argument("--prior", default="identity")
    p_run.add_argument("--delay", type=int, default=1)
    p_run.add_argument("--eta", default="auto", help="learning rate or 'auto'")
    _add_game_source(p_run)
    p_run.add_argument("--out", help="trace JSON output path")
    p_run.add_argument("--record-weights", action="store_true")
    p_run.add_argument("--epsilon-frac", type=float, default=0.1)
    p_run.set_defaults(func=cmd_run)

    p_gen = sub.add_parser("gen", help="write a synthetic game file")
    p_gen.add_argument("--model", choices=generators.MODELS, required=True)
    p_gen.add_argument("--experts", type=int, default=2)
    p_gen.add_argument("--steps", type=int, default=100)
    p_gen.add_argument("--noise", type=float, default=0.2)
    p_gen.add_argument("--block", type=int, default=1)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--loss", choices=["square", "log"], default="square")
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=cmd_gen)

    p_sweep = sub.add_parser("sweep", help="cartesian sweep, CSV summary")
    p_sweep.add_argument("--algo-list", default="v1,vd,vdfc")
    p_sweep.add_argument("--eta-grid", default="0.5")
    p_sweep.add_argument("--delay-grid", default="1")
    p_sweep.add_argument("--seeds", default="0")
    p_sweep.add_argument("--loss", choices=["square", "log"], default="square")
    p_sweep.add_argument("--prior", default="identity")
    _add_game_source(p_sweep)
    p_sweep.add_argument("--epsilon-frac", type=float, default=0.1)
    p_sweep.add_argument("--out", required=True)
    p_sweep.set_defaults(func=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the invariant/oracle suite")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.set_defaults(func=cmd_verify)

    p_bound = sub.add_parser("bound", help="print theoretical regret numbers")
    p_bound.add_argument("--algo", choices=agg.ALGORITHMS, default=None,
                         help="accepted for symmetry; all bounds are printed")
    p_bound.add_argument("--experts", type=int, required=True)
    p_bound.add_argument("--eta", default=None)
    p_bound.add_argument("--delay", type=int, default=1)
    p_bound.add_argument("--steps", type=int, default=1000)
    p_bound.add_argument("--loss", choices=["square", "log"], default="square")
    p_bound.add_argument("--epsilon-frac", type=float, default=0.1)
    p_bound.set_defaults(func=cmd_bound)

    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, GameFileError, agg.CapacityError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
