"""Game file (CSV) and trace (JSON) serialization.

Game files carry a header ``t,omega,xi_1,...,xi_N`` and one row per step with
t ascending from 1.  Reals are written with 17 significant digits so that
write -> parse round-trips are lossless.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .game import GameInput, GameTrace
from .losses import LossSpec, SQUARE


class GameFileError(ValueError):
    """Malformed game file; the message names the offending line."""


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_game_file(path, game: GameInput) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        n = game.num_experts
        writer.writerow(["t", "omega"] + [f"xi_{i}" for i in range(1, n + 1)])
        for t in range(game.horizon):
            writer.writerow([str(t + 1), _fmt(game.outcomes[t])]
                            + [_fmt(v) for v in game.forecasts[t]])


def parse_game_file(path, loss: LossSpec = SQUARE, delay: int = 1) -> GameInput:
    """Read a game file; the number of experts is inferred from the header."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise GameFileError(f"{path}: empty file")
        n = len(header) - 2
        expected = ["t", "omega"] + [f"xi_{i}" for i in range(1, n + 1)]
        if n < 1 or header != expected:
            raise GameFileError(f"{path}: line 1: bad header {header!r}")
        outcomes, forecasts = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != n + 2:
                raise GameFileError(f"{path}: line {lineno}: expected {n + 2} fields, got {len(row)}")
            try:
                t = int(row[0])
                values = [float(v) for v in row[1:]]
            except ValueError as exc:
                raise GameFileError(f"{path}: line {lineno}: {exc}") from None
            if t != lineno - 1:
                raise GameFileError(f"{path}: line {lineno}: step index {t} not contiguous")
            if not all(math.isfinite(v) for v in values):
                raise GameFileError(f"{path}: line {lineno}: non-finite value")
            outcomes.append(values[0])
            forecasts.append(values[1:])
    if not outcomes:
        raise GameFileError(f"{path}: no data rows")
    try:
        return GameInput(outcomes=np.asarray(outcomes),
                         forecasts=np.asarray(forecasts),
                         delay=delay, loss=loss)
    except ValueError as exc:
        # locate the first out-of-domain entry so the error names its row
        out = np.asarray(outcomes)
        fc = np.asarray(forecasts)
        olo, ohi = loss.omega_domain
        glo, ghi = loss.gamma_domain
        bad_out = np.flatnonzero((out < olo) | (out > ohi))
        bad_fc = np.argwhere((fc < glo) | (fc > ghi))
        if bad_out.size:
            raise GameFileError(
                f"{path}: line {bad_out[0] + 2}: omega={out[bad_out[0]]} "
                f"outside [{olo}, {ohi}] for the {loss.name} loss") from None
        if bad_fc.size:
            r, c = bad_fc[0]
            raise GameFileError(
                f"{path}: line {r + 2}: xi_{c + 1}={fc[r, c]} "
                f"outside [{glo}, {ghi}] for the {loss.name} loss") from None
        raise GameFileError(f"{path}: {exc}") from None


def trace_to_dict(trace: GameTrace, extra_meta: dict | None = None) -> dict:
    meta = {
        "algo": trace.algo,
        "num_experts": trace.num_experts,
        "horizon": trace.horizon,
        "delay": trace.delay,
        "eta": trace.eta,
        "loss": trace.loss_name,
    }
    if extra_meta:
        meta.update(extra_meta)
    doc = {
        "meta": meta,
        "h": trace.h.tolist(),
        "m": trace.m.tolist(),
        "gamma": trace.gamma.tolist(),
        "regret_curve": trace.regret_curve.tolist(),
        "expert_cumulative_losses": trace.cumulative_expert_losses.tolist(),
        "total_loss": trace.total_loss,
        "regret": trace.regret,
        "best_expert": trace.best_expert,
    }
    if trace.weights is not None:
        doc["weights"] = trace.weights.tolist()
    return doc


def write_trace_json(path, trace: GameTrace, extra_meta: dict | None = None) -> None:
    Path(path).write_text(json.dumps(trace_to_dict(trace, extra_meta), indent=1))
