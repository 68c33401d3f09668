"""Referee and runner for Schmidt (alpha, beta)-games on the circle.

Black opens with ``config.initial_black``; afterwards the players alternate,
White's radius always alpha times Black's and Black's beta times White's.
Strategies are objects with ``move(view) -> (ball, note)``; White strategies
may also expose ``claims()`` describing what their play certifies.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Protocol, Sequence

from .errors import ForfeitError, NonIsometryError
from .theta import (
    CircleInterval,
    CirclePoint,
    LinearForm,
    ThetaSpec,
    as_form,
    ball,
    interval_contains,
)
from .verifier import Certificate, certificate_constant

BLACK, WHITE = "B", "W"


@dataclass(frozen=True)
class GameConfig:
    alpha: Fraction
    beta: Fraction
    theta: ThetaSpec
    max_rounds: int
    initial_black: CircleInterval

    def __post_init__(self):
        a, b = Fraction(self.alpha), Fraction(self.beta)
        if not 0 < a < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {a}")
        if not 0 < b < 1:
            raise ValueError(f"beta must lie in (0, 1), got {b}")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)


@dataclass(frozen=True)
class Move:
    mover: str
    ball: CircleInterval
    round: int
    note: str = ""


@dataclass(frozen=True)
class Violation:
    law: str
    detail: str

    def __str__(self) -> str:
        return f"{self.law}: {self.detail}"


@dataclass(frozen=True)
class GameView:
    """What a strategy sees: the configuration and every move so far."""

    config: GameConfig
    moves: tuple

    @property
    def last(self) -> Move:
        return self.moves[-1]

    @property
    def round(self) -> int:
        """Round of the move about to be made."""
        last = self.moves[-1]
        return last.round if last.mover == BLACK else last.round + 1

    @property
    def black_moves(self) -> list:
        return [m for m in self.moves if m.mover == BLACK]


class Strategy(Protocol):
    def move(self, view: GameView): ...


@dataclass(frozen=True)
class Claim:
    """A White strategy's promise, in its own coordinates x' = scale * x + offset."""

    label: str
    theta: ThetaSpec
    alpha: Fraction
    beta: Fraction
    q_lo: int
    q_hi: int
    scale: int = 1
    offset: LinearForm = LinearForm()

    @property
    def c(self) -> Fraction:
        return certificate_constant(self.alpha, self.beta)

    def frame_ball(self, b: CircleInterval) -> CircleInterval:
        return map_ball(b, self.scale, self.offset, self.theta)

    def certificate(self, final: CircleInterval, ref: str = "") -> Certificate:
        return Certificate(self.theta, self.frame_ball(final), self.c, self.q_lo, self.q_hi, ref)

    def reframed(self, scale: int, offset: LinearForm, prefix: str = "") -> "Claim":
        """Compose with a map applied before this claim's own frame."""
        return replace(
            self,
            label=prefix + self.label,
            scale=self.scale * scale,
            offset=as_form(offset).scale(self.scale) + self.offset,
        )


@dataclass
class Transcript:
    config: GameConfig
    moves: list
    seed: Optional[int] = None
    meta: dict = field(default_factory=dict)
    claims: list = field(default_factory=list)

    @property
    def final(self) -> CircleInterval:
        return self.moves[-1].ball

    def certificates(self, ref: str = "") -> list:
        return [cl.certificate(self.final, ref) for cl in self.claims]


def validate_move(prev: Move, nxt: Move, config: GameConfig) -> Optional[Violation]:
    """None if ``nxt`` legally follows ``prev``; otherwise the broken law."""
    if prev.mover == nxt.mover:
        return Violation("alternation", f"{nxt.mover} moved twice")
    factor = config.alpha if nxt.mover == WHITE else config.beta
    want = prev.ball.radius * factor
    if nxt.ball.radius != want:
        return Violation("radius", f"radius {nxt.ball.radius} but the law requires {want}")
    if not interval_contains(prev.ball, nxt.ball, config.theta):
        return Violation("containment", f"{nxt.ball} is not inside {prev.ball}")
    return None


def _ask(strategy, view: GameView):
    out = strategy.move(view)
    if isinstance(out, tuple):
        return out[0], out[1]
    return out, ""


def run_game(black, white, config: GameConfig, seed: Optional[int] = None, meta: Optional[dict] = None) -> Transcript:
    moves = [Move(BLACK, config.initial_black, 1, "")]
    for rnd in range(1, config.max_rounds + 1):
        b, note = _ask(white, GameView(config, tuple(moves)))
        m = Move(WHITE, b, rnd, note)
        v = validate_move(moves[-1], m, config)
        if v is not None:
            raise ForfeitError("White", rnd, v)
        moves.append(m)
        if rnd == config.max_rounds:
            break
        b, note = _ask(black, GameView(config, tuple(moves)))
        m = Move(BLACK, b, rnd + 1, note)
        v = validate_move(moves[-1], m, config)
        if v is not None:
            raise ForfeitError("Black", rnd + 1, v)
        moves.append(m)
    claims = list(white.claims()) if hasattr(white, "claims") else []
    return Transcript(config, moves, seed, dict(meta or {}), claims)


def validate_transcript(tr: Transcript) -> Optional[tuple[int, Violation]]:
    """First (move index, violation) in a stored transcript, or None."""
    m0 = tr.moves[0]
    if m0.mover != BLACK or m0.ball != tr.config.initial_black:
        return 0, Violation("opening", "first move must be Black's initial ball")
    for k in range(1, len(tr.moves)):
        v = validate_move(tr.moves[k - 1], tr.moves[k], tr.config)
        if v is not None:
            return k, v
    return None


# -- simple strategies and combinators -------------------------------------


class CenteredShrink:
    """Shrink the opponent's ball about its own center (legal for either colour)."""

    def move(self, view: GameView):
        last = view.last
        factor = view.config.alpha if last.mover == BLACK else view.config.beta
        return CircleInterval(last.ball.center, last.ball.radius * factor), ""


def map_ball(b: CircleInterval, scale: int, offset, theta: ThetaSpec) -> CircleInterval:
    """Image of a ball under x -> scale * x + offset (scale = +-1)."""
    return ball(b.center.rep.scale(scale) + as_form(offset), b.radius, theta)


class Dovetail:
    """Round-robin White strategy: round t goes to strategy (t - 1) mod n.

    Strategy k sees only the rounds it plays.  Between two of its turns the
    other n - 1 rounds are absorbed into the effective beta' = beta (alpha beta)^(n-1),
    so each inner strategy faces a legal (alpha, beta') game.
    """

    def __init__(self, strategies: Sequence):
        if not strategies:
            raise ValueError("need at least one strategy")
        self.strategies = list(strategies)

    def subview(self, view: GameView, k: int) -> GameView:
        n = len(self.strategies)
        cfg = view.config
        beta = cfg.beta * (cfg.alpha * cfg.beta) ** (n - 1)
        picked = [m for m in view.moves if (m.round - 1) % n == k]
        inner = replace(
            cfg,
            beta=beta,
            initial_black=picked[0].ball,
            max_rounds=max(1, (cfg.max_rounds - k + n - 1) // n),
        )
        renumbered = tuple(replace(m, round=(m.round - 1) // n + 1) for m in picked)
        return GameView(inner, renumbered)

    def move(self, view: GameView):
        n = len(self.strategies)
        k = (view.round - 1) % n
        b, note = _ask(self.strategies[k], self.subview(view, k))
        return b, note if n == 1 else f"[{k}] {note}"

    def claims(self) -> list:
        n = len(self.strategies)
        out = []
        for k, s in enumerate(self.strategies):
            if hasattr(s, "claims"):
                out.extend(cl if n == 1 else replace(cl, label=f"[{k}]{cl.label}") for cl in s.claims())
        return out


class Conjugate:
    """The strategy phi o inner o phi^-1 for an isometry phi(x) = scale * x + offset."""

    def __init__(self, inner, scale: int = 1, offset=LinearForm()):
        if Fraction(scale) not in (1, -1):
            raise NonIsometryError(f"scale {scale} is not +-1; radius laws would not be preserved")
        self.inner = inner
        self.scale = int(scale)
        self.offset = as_form(offset)

    def _pull(self, b: CircleInterval, theta: ThetaSpec) -> CircleInterval:
        # phi^-1(x) = scale * (x - offset)
        return map_ball(b, self.scale, -self.offset.scale(self.scale), theta)

    def move(self, view: GameView):
        cfg = view.config
        inner_cfg = replace(cfg, initial_black=self._pull(cfg.initial_black, cfg.theta))
        moves = tuple(replace(m, ball=self._pull(m.ball, cfg.theta)) for m in view.moves)
        b, note = _ask(self.inner, GameView(inner_cfg, moves))
        return map_ball(b, self.scale, self.offset, cfg.theta), note

    def claims(self) -> list:
        if not hasattr(self.inner, "claims"):
            return []
        pre = -self.offset.scale(self.scale)
        return [cl.reframed(self.scale, pre, "conj:") for cl in self.inner.claims()]


def reflect(inner) -> Conjugate:
    """Conjugate by x -> -x."""
    return Conjugate(inner, -1, LinearForm())


# -- JSON ------------------------------------------------------------------


def _form_json(f: LinearForm) -> dict:
    return {"a": str(f.a), "b": str(f.b)}


def _form_from(d: dict) -> LinearForm:
    return LinearForm(Fraction(d["a"]), Fraction(d["b"]))


def ball_to_json(b: CircleInterval) -> dict:
    return {"center": _form_json(b.center.rep), "radius": str(b.radius)}


def ball_from_json(d: dict) -> CircleInterval:
    return CircleInterval(CirclePoint(_form_from(d["center"])), Fraction(d["radius"]))


def moves_digest(moves: Sequence[dict]) -> str:
    blob = json.dumps(list(moves), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def claim_to_json(cl: Claim) -> dict:
    return {
        "label": cl.label,
        "theta": str(cl.theta),
        "alpha": str(cl.alpha),
        "beta": str(cl.beta),
        "c": str(cl.c),
        "q_lo": str(cl.q_lo),
        "q_hi": str(cl.q_hi),
        "scale": cl.scale,
        "offset": _form_json(cl.offset),
    }


def claim_from_json(d: dict) -> Claim:
    return Claim(
        d["label"],
        ThetaSpec.parse(d["theta"]),
        Fraction(d["alpha"]),
        Fraction(d["beta"]),
        int(d["q_lo"]),
        int(d["q_hi"]),
        int(d["scale"]),
        _form_from(d["offset"]),
    )


def transcript_to_json(tr: Transcript) -> dict:
    moves = [
        {
            "mover": m.mover,
            "center": _form_json(m.ball.center.rep),
            "radius": str(m.ball.radius),
            "note": m.note,
        }
        for m in tr.moves
    ]
    return {
        "theta": str(tr.config.theta),
        "alpha": str(tr.config.alpha),
        "beta": str(tr.config.beta),
        "seed": tr.seed,
        "max_rounds": tr.config.max_rounds,
        "moves": moves,
        "digest": moves_digest(moves),
        "meta": tr.meta,
        "claims": [claim_to_json(cl) for cl in tr.claims],
    }


def transcript_from_json(d: dict) -> Transcript:
    """Rebuild a transcript; centers are taken verbatim (no re-reduction)."""
    theta = ThetaSpec.parse(d["theta"])
    moves = []
    black_round, white_round = 0, 0
    for m in d["moves"]:
        b = CircleInterval(CirclePoint(_form_from(m["center"])), Fraction(m["radius"]))
        if m["mover"] == BLACK:
            black_round += 1
            rnd = black_round
        else:
            white_round += 1
            rnd = white_round
        moves.append(Move(m["mover"], b, rnd, m.get("note", "")))
    cfg = GameConfig(
        Fraction(d["alpha"]),
        Fraction(d["beta"]),
        theta,
        int(d.get("max_rounds", white_round)),
        moves[0].ball,
    )
    claims = [claim_from_json(c) for c in d.get("claims", [])]
    return Transcript(cfg, moves, d.get("seed"), d.get("meta", {}), claims)


def dumps(tr: Transcript) -> str:
    return json.dumps(transcript_to_json(tr), indent=1) + "\n"


def loads(text: str) -> Transcript:
    return transcript_from_json(json.loads(text))
