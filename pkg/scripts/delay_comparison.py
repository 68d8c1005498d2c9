#!/usr/bin/env python3
"""Compare the replicated and fully-connected engines across feedback delays.

For each delay the same games are played by both engines (and by the
one-step engine at delay 1 as the baseline); the table shows mean regret
over the seeds next to the replicated engine's D*ln(N)/eta guarantee.
"""
import argparse
import math

import numpy as np

from delagg import generate_game, identity_prior, init_state, run_game


def mean_regret(algo, delay, eta, args):
    prior = identity_prior(args.experts)
    regrets = []
    for seed in range(args.seeds):
        game = generate_game(args.model, args.experts, args.steps, args.noise,
                             seed, delay=delay)
        trace = run_game(game, init_state(algo, prior, delay, eta))
        regrets.append(trace.regret)
    return float(np.mean(regrets))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model", default="noisy-experts",
                    choices=["noisy-experts", "drifting-best"])
    ap.add_argument("--experts", type=int, default=5)
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--noise", type=float, default=0.3)
    ap.add_argument("--eta", type=float, default=0.5)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--delays", default="1,2,4,8,16")
    args = ap.parse_args()

    print(f"{'D':>4}  {'vd regret':>10}  {'vdfc regret':>11}  {'vd bound':>9}")
    for delay in (int(d) for d in args.delays.split(",")):
        vd = mean_regret("vd", delay, args.eta, args)
        vdfc = mean_regret("vdfc", delay, args.eta, args)
        bound = delay * math.log(args.experts) / args.eta
        print(f"{delay:>4}  {vd:>10.3f}  {vdfc:>11.3f}  {bound:>9.3f}")


if __name__ == "__main__":
    main()
