"""Black strategies: seeded random play, a greedy orbit attack, replay and scripts."""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cmp_to_key
from typing import Optional

from . import contfrac as cf
from .errors import ConfigMismatch, DivergenceError
from .game import BLACK, WHITE, CenteredShrink, GameView, Transcript, ball_from_json, ball_to_json
from .theta import LinearForm, ball, bracket, compare, sign_of, signed_offset

RANDOM, GREEDY_ORBIT, REPLAY, SCRIPTED = "random", "greedy_orbit", "replay", "scripted"
KINDS = (RANDOM, GREEDY_ORBIT, REPLAY, SCRIPTED)
DENOMINATOR = 2**16

_DODGE = re.compile(r"dodge\((\d+)\.\.(\d+)\)")


@dataclass
class AdversarySpec:
    kind: str
    seed: Optional[int] = None
    source: Optional[str] = None
    moves: list = field(default_factory=list)
    lookahead_generations: int = 2

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown adversary kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.kind == GREEDY_ORBIT and self.lookahead_generations < 1:
            raise ValueError("lookahead must be >= 1")

    def to_json(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == RANDOM:
            d["seed"] = self.seed
        elif self.kind == GREEDY_ORBIT:
            d["lookahead_generations"] = self.lookahead_generations
        elif self.kind == REPLAY:
            d["source"] = self.source
        else:
            d["moves"] = [ball_to_json(b) for b in self.moves]
        return d

    @classmethod
    def from_json(cls, d: dict) -> "AdversarySpec":
        return cls(
            d["kind"],
            seed=d.get("seed"),
            source=d.get("source"),
            moves=[ball_from_json(b) for b in d.get("moves", [])],
            lookahead_generations=int(d.get("lookahead_generations", 2)),
        )


def _legal_span(view: GameView):
    W = view.last.ball
    rB = view.config.beta * W.radius
    return W, rB, W.radius - rB


class RandomBlack:
    """Center offset (1 - beta) rho(W) * (2k/D - 1), k uniform in [0, D]."""

    def __init__(self, seed: int, denominator: int = DENOMINATOR):
        self.seed = seed
        self.denominator = denominator

    def move(self, view: GameView):
        W, rB, span = _legal_span(view)
        # one generator per (seed, round): a move never depends on earlier draws
        rng = random.Random(f"{self.seed}:{view.round}")
        k = rng.randint(0, self.denominator)
        off = span * (Fraction(2 * k, self.denominator) - 1)
        return ball(W.center.rep + off, rB, view.config.theta), ""


def dodged_horizon(view: GameView) -> int:
    """Highest generation White has announced dodging (-1 if none)."""
    hi = -1
    for m in view.moves:
        if m.mover == WHITE:
            for match in _DODGE.finditer(m.note):
                hi = max(hi, int(match.group(2)))
    return hi


class GreedyOrbitBlack:
    """Push B toward the nearest orbit point of generation <= horizon + lookahead.

    The target is the legal center closest to an orbit point in W (ties:
    smaller q).  ``rational`` rounds the chosen center to a nearby legal
    rational, for games whose strategies only read rational centers.
    """

    def __init__(self, lookahead: int = 2, scan_cap: int = cf.DEFAULT_SCAN_CAP, rational: bool = False):
        if lookahead < 1:
            raise ValueError("lookahead must be >= 1")
        self.lookahead = lookahead
        self.scan_cap = scan_cap
        self.rational = rational

    def move(self, view: GameView):
        th = view.config.theta
        W, rB, span = _legal_span(view)
        horizon = min(max(dodged_horizon(view), 0) + self.lookahead, cf.max_generation_within(th, self.scan_cap))
        if horizon < 0:
            return CenteredShrink().move(view)
        found = cf.orbit_points_near(th, W, horizon, self.scan_cap, include_zero=True)
        if not found:
            return CenteredShrink().move(view)
        lo, hi = LinearForm.const(-span), LinearForm.const(span)
        cands = []
        for q, pt in found:
            o = signed_offset(pt, W.center, th)
            c = lo if compare(o, lo, th) < 0 else hi if compare(o, hi, th) > 0 else o
            gap = o - c
            cands.append((gap if sign_of(gap, th) >= 0 else -gap, q, c))

        def order(x, y):
            return compare(x[0], y[0], th) or (x[1] > y[1]) - (x[1] < y[1])

        _, q, off = sorted(cands, key=cmp_to_key(order))[0]
        if self.rational and not off.is_rational:
            r, _ = bracket(off, th, span / 2**32)
            off = LinearForm.const(min(max(r, -span), span))
        return ball(W.center.rep + off, rB, th), f"target q={q}"


class ReplayBlack:
    """Re-emit the Black moves of a recorded transcript."""

    def __init__(self, recorded: Transcript):
        self.recorded = recorded

    def _check(self, view: GameView) -> None:
        a, b = self.recorded.config, view.config
        if (a.alpha, a.beta, a.theta) != (b.alpha, b.beta, b.theta) or a.initial_black != b.initial_black:
            raise ConfigMismatch(
                f"recorded game has alpha={a.alpha} beta={a.beta} theta={a.theta}; live game has "
                f"alpha={b.alpha} beta={b.beta} theta={b.theta}"
            )

    def move(self, view: GameView):
        self._check(view)
        rec = self.recorded.moves
        for i, m in enumerate(view.moves):
            if i >= len(rec):
                raise DivergenceError(m.round, "live game is longer than the recording")
            r = rec[i]
            if (m.mover, m.ball) != (r.mover, r.ball):
                raise DivergenceError(m.round, f"{m.mover} played {m.ball}, recording has {r.ball}")
        nxt = len(view.moves)
        if nxt >= len(rec) or rec[nxt].mover != BLACK:
            raise DivergenceError(view.round, "recording has no Black move here")
        return rec[nxt].ball, rec[nxt].note


class ScriptedBlack:
    """Play the listed balls in order, then centered shrinks."""

    def __init__(self, moves: list):
        self.moves = list(moves)

    def move(self, view: GameView):
        k = len(view.black_moves) - 1
        if k < len(self.moves):
            return self.moves[k], "scripted"
        return CenteredShrink().move(view)


def build_black(spec: AdversarySpec, scan_cap: int = cf.DEFAULT_SCAN_CAP, recorded: Optional[Transcript] = None, rational: bool = False):
    if spec.kind == RANDOM:
        return RandomBlack(spec.seed or 0)
    if spec.kind == GREEDY_ORBIT:
        return GreedyOrbitBlack(spec.lookahead_generations, scan_cap, rational)
    if spec.kind == REPLAY:
        if recorded is None:
            raise ValueError("replay adversary needs the recorded transcript")
        return ReplayBlack(recorded)
    return ScriptedBlack(spec.moves)
