"""The White strategy that keeps the limit point away from the orbit {theta q}.

Bookkeeping follows the two-case induction: after a warm-up, an anchor
(N, n0) with

    (alpha beta) Delta_N < 2 (alpha beta)^n0 rho(B_1) <= Delta_N,   N maximal,

fixes which generations are dodged at which round.  Each cycle either takes
the "large drop" branch (alpha beta Delta_N > Delta_{N+1}, case A) or the
"small drop" branch (case B), schedules one or two dodge moves, and hands a
new anchor to the next cycle.  Rounds without a dodge are centered shrinks.

Orbit enumeration is a bounded scan, so dodging stops once the next
generation would need q beyond ``scan_cap``; play then continues with
centered shrinks and the certified q-range ends at the last dodged
generation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import contfrac as cf
from .errors import InternalContradiction, NoGapError, StreamExhausted
from .game import Claim, Conjugate, Dovetail, GameView, reflect
from .theta import (
    CircleInterval,
    CirclePoint,
    LinearForm,
    ThetaSpec,
    ball,
    bracket,
    circle_distance,
    compare,
    interval_contains,
    interval_gap_complement,
    intervals_disjoint,
    sign_of,
    sort_forms,
)
from .verifier import certificate_constant

DEFAULT_ALPHA = Fraction(1, 8)


class Phase(enum.Enum):
    WARMUP = "warmup"
    ALIGN = "align"
    CASE_A_FREE = "free(case=A)"
    CASE_B_FREE = "free(case=B)"
    DONE = "done"


@dataclass(frozen=True)
class DodgeTask:
    lo: int
    hi: int
    top: int


@dataclass
class DodgeSet:
    """Balls to avoid: around each listed orbit point, of the listed radius.

    ``radius`` is a rational just below (alpha beta) Delta_top / 4.  Points
    whose q lies in the certified range get max(radius, c/q).
    """

    generations: tuple
    top: int
    s: Fraction
    radius: Fraction
    points: list

    def obstacles(self) -> list:
        return [CircleInterval(pt, r) for _, pt, r in self.points]


@dataclass
class StrategyState:
    phase: Phase = Phase.WARMUP
    J: Optional[int] = None
    rho1: Optional[Fraction] = None
    N: Optional[int] = None
    n0: Optional[int] = None
    n1: Optional[int] = None
    m: Optional[int] = None
    M: Optional[int] = None
    N_init: Optional[int] = None
    dodged_up_to: int = -1
    target_round: Optional[int] = None
    anchor_round: Optional[int] = None
    schedule: dict = field(default_factory=dict)
    cases: list = field(default_factory=list)
    bound_checks: int = 0
    bound_failures: list = field(default_factory=list)

    def snapshot(self) -> str:
        return f"N={self.N},n0={self.n0},n1={self.n1},m={self.m},M={self.M}"


def _halfdiam(s: Fraction, n: int, rho1: Fraction) -> Fraction:
    """2 (alpha beta)^n rho(B_1): the diameter of the reindexed B_{n+1}."""
    return 2 * s**n * rho1


def lemma_window(theta: ThetaSpec, s, top: int, rho) -> bool:
    """(alpha beta) Delta_top < 2 rho <= Delta_top, exactly."""
    d = cf.delta(theta, top).value
    return sign_of(d * s - 2 * rho, theta) < 0 and sign_of(d - 2 * rho, theta) >= 0


def align_indices(theta: ThetaSpec, s, rho1) -> tuple[int, int]:
    """The anchor (N, n0) for an opening ball of radius rho1.

    N0 is the first index with Delta_N0 < 2 rho1, n0 >= 1 the first exponent
    with 2 s^n0 rho1 <= Delta_N0, and N the largest index with
    Delta_N >= 2 s^n0 rho1.
    """
    s, rho1 = Fraction(s), Fraction(rho1)
    v = 2 * rho1
    n_first = 1
    while cf.delta_ge(theta, n_first, v):
        n_first += 1
    n0 = 1
    while not cf.delta_ge(theta, n_first, v * s**n0):
        n0 += 1
    u = v * s**n0
    N = cf.last_index_with_delta_ge(theta, u, n_first)
    if not lemma_window(theta, s, N, u / 2) or cf.delta_ge(theta, N + 1, u):
        raise InternalContradiction(f"anchor sandwich fails at N={N}, n0={n0}")
    return N, n0


def dodge_radius(theta: ThetaSpec, s, top: int) -> Fraction:
    """Rational R with R < (alpha beta) Delta_top / 4, relative error below 2^-64."""
    d = cf.delta(theta, top)
    target = d.value * (Fraction(s) / 4)
    lo, _ = bracket(target, theta, Fraction(s) * d.lo / 4 / 2**64)
    return lo


def build_dodge_set(
    theta: ThetaSpec,
    B: CircleInterval,
    task: DodgeTask,
    s: Fraction,
    c: Fraction,
    claim_from: Optional[int],
    scan_cap: int,
) -> DodgeSet:
    R = dodge_radius(theta, s, task.top)
    first_q = cf.generation_start(theta, task.lo) if task.lo > 0 else 1
    reach = R
    if claim_from is not None:
        reach = max(R, c / max(first_q, claim_from))
    window = CircleInterval(B.center, min(B.radius + reach, Fraction(1, 2)))
    found = cf.orbit_points_near(
        theta, window, task.hi, scan_cap, min_generation=task.lo, include_zero=task.lo == 0
    )
    points = []
    for q, pt in found:
        r = R
        if claim_from is not None and q >= claim_from and q > 0:
            r = max(R, c / q)
        d = circle_distance(pt, B.center, theta)
        if sign_of(d - (B.radius + r), theta) <= 0:
            points.append((q, pt, r))
    return DodgeSet((task.lo, task.hi), task.top, s, R, points)


def _rational_inside(mid: LinearForm, slack: LinearForm, theta: ThetaSpec, scale: Fraction) -> Fraction:
    """A rational within slack/2 of mid (slack > 0)."""
    width = scale
    while True:
        eps, _ = bracket(slack, theta, width)
        if eps > 0:
            break
        width /= 2**16
    lo, _ = bracket(mid, theta, eps / 2)
    return lo


def dodge_move(
    B: CircleInterval, alpha, dodge: DodgeSet, theta: ThetaSpec, rational: bool = False
) -> CircleInterval:
    """A legal White ball inside B, disjoint from every obstacle of ``dodge``.

    Picks the widest gap (ties: midpoint nearest B's center, then smaller
    offset) and centers the ball at the gap's midpoint.  With ``rational``
    the center is moved to a nearby rational that still fits the gap.
    """
    if not lemma_window(theta, dodge.s, dodge.top, B.radius):
        raise InternalContradiction(f"dodge at top={dodge.top} outside the lemma's radius window")
    rW = Fraction(alpha) * B.radius
    obstacles = dodge.obstacles()
    if not obstacles:
        return CircleInterval(B.center, rW)
    z = B.center.rep
    arcs = interval_gap_complement(B, obstacles, theta)
    need = LinearForm.const(2 * rW)
    fits = []
    for arc in arcs:
        sgn = sign_of(arc.length - need, theta)
        if sgn > 0 or (sgn == 0 and not (arc.lo_obstacle or arc.hi_obstacle)):
            fits.append(arc)
    if not fits:
        raise NoGapError(f"no gap of length {2 * rW} among {len(arcs)} arcs of {B}")

    def rank(a, b):
        c = compare(b.length, a.length, theta)
        if c:
            return c
        ma, mb = (a.lo + a.hi).scale(Fraction(1, 2)) - z, (b.lo + b.hi).scale(Fraction(1, 2)) - z
        da = ma if sign_of(ma, theta) >= 0 else -ma
        db = mb if sign_of(mb, theta) >= 0 else -mb
        return compare(da, db, theta) or compare(ma, mb, theta)

    from functools import cmp_to_key

    best = sorted(fits, key=cmp_to_key(rank))[0]
    mid = (best.lo + best.hi).scale(Fraction(1, 2))
    slack = best.length - need
    if rational and not mid.is_rational and sign_of(slack, theta) > 0:
        mid = LinearForm.const(_rational_inside(mid, slack, theta, rW))
    W = ball(mid, rW, theta)
    if not interval_contains(B, W, theta) or not all(intervals_disjoint(W, ob, theta) for ob in obstacles):
        raise AssertionError("selected dodge ball fails its own post-check")
    return W


class DodgeWhite:
    """White strategy certifying that the limit point x satisfies
    ||theta q - x|| >= c / q, c = (alpha beta / 4)^3, on a finite q-range.

    One instance per game.  ``theta`` defaults to the game's theta.
    """

    def __init__(
        self,
        theta: Optional[ThetaSpec] = None,
        scan_cap: int = cf.DEFAULT_SCAN_CAP,
        label: str = "dodge",
        rational_centers: bool = False,
    ):
        self.theta = theta
        self.scan_cap = scan_cap
        self.rational_centers = rational_centers
        self.label = label
        self.state = StrategyState()
        self.dodges: list = []
        self._cfg = None

    # -- helpers ----------------------------------------------------------

    def _shrink(self, B: CircleInterval, note: str):
        return CircleInterval(B.center, self._alpha * B.radius), note

    def _gen_cap(self) -> int:
        return cf.max_generation_within(self._th, self.scan_cap)

    def _u(self, n: int) -> Fraction:
        return _halfdiam(self._s, n, self.state.rho1)

    # -- main entry -------------------------------------------------------

    def move(self, view: GameView):
        cfg = view.config
        if self._cfg is None:
            self._cfg = cfg
            self._th = self.theta or cfg.theta
            self._alpha = cfg.alpha
            self._s = cfg.alpha * cfg.beta
            self._c = certificate_constant(cfg.alpha, cfg.beta)
        st = self.state
        B = view.last.ball
        k = view.round
        if self._th != cfg.theta and not B.center.rep.is_rational:
            # centers are forms in the game's theta; a foreign theta can only read rationals
            raise ValueError(f"strategy for {self._th} received an irrational center in a {cfg.theta} game")

        if st.phase is Phase.WARMUP:
            if not cf.delta_ge(self._th, 1, 2 * B.radius):
                return self._shrink(B, "warmup")
            st.J, st.rho1 = k, B.radius
            st.N, st.n0 = align_indices(self._th, self._s, st.rho1)
            st.N_init = st.N
            st.anchor_round = st.n0 + 1
            st.schedule[st.n0 + 1] = DodgeTask(0, st.N, st.N)
            st.target_round = st.n0 + 1
            st.phase = Phase.ALIGN

        r = k - st.J + 1
        task = st.schedule.pop(r, None)
        if task is None or st.phase is Phase.DONE:
            label = st.phase.value
            return self._shrink(B, label if st.phase is Phase.WARMUP else f"{label} {st.snapshot()}")

        W, note = self._dodge(B, task, r)
        if r == st.anchor_round and st.phase is not Phase.DONE:
            note += " " + self._advance()
        st.target_round = min(st.schedule) if st.schedule else None
        return W, note

    def _dodge(self, B: CircleInterval, task: DodgeTask, r: int):
        st = self.state
        if 2 * B.radius != self._u(r - 1):
            raise InternalContradiction(f"round {r}: ball radius does not follow the schedule")
        hi = min(task.hi, self._gen_cap())
        if hi < task.lo:
            st.phase = Phase.DONE
            st.schedule.clear()
            return self._shrink(B, f"done(scan cap) {st.snapshot()}")
        claim_from = self._th.convergent(st.N_init + 1)[1]
        ds = build_dodge_set(self._th, B, DodgeTask(task.lo, hi, task.top), self._s, self._c, claim_from, self.scan_cap)
        self._account(ds, claim_from)
        rational = self.rational_centers or self._th != self._cfg.theta
        W = dodge_move(B, self._alpha, ds, self._th, rational)
        self.dodges.append(ds)
        st.dodged_up_to = max(st.dodged_up_to, hi)
        note = f"dodge({task.lo}..{hi})"
        if hi < task.hi:
            note += f" truncated(scan cap, wanted ..{task.hi})"
            st.phase = Phase.DONE
            st.schedule.clear()
        return W, note

    def _account(self, ds: DodgeSet, claim_from: int) -> None:
        """Check c/q <= (alpha beta) Delta_top / 4 for every certified q of the dodged generations.

        The left side falls with q, so the smallest such q decides the whole
        range; the points actually found near B are checked one by one too.
        """
        st = self.state
        bound = cf.delta(self._th, ds.top).value * (self._s / 4)
        q_min = max(claim_from, cf.generation_start(self._th, ds.generations[0]))
        qs = [q_min] if q_min < cf.generation_end(self._th, ds.generations[1]) else []
        qs += [q for q, _, _ in ds.points if q >= claim_from and q > 0]
        for q in qs:
            st.bound_checks += 1
            if sign_of(bound - self._c / q, self._th) < 0:
                st.bound_failures.append((q, ds.top))

    def _advance(self) -> str:
        """Case analysis at the current anchor; schedules the next dodges."""
        st, th, s = self.state, self._th, self._s
        N, n0 = st.N, st.n0
        try:
            d = lambda i: cf.delta(th, i).value  # noqa: E731
            if sign_of(d(N) * s - d(N + 1), th) > 0:
                case, m = "A", 0
                base = N + 1
            else:
                case = "B"
                m = cf.find_drop(th, N, s)
                if m < 1:
                    raise InternalContradiction("case B with drop offset 0")
                if not lemma_window(th, s, N + m, self._u(n0 + 1) / 2):
                    if sign_of(d(N + m) * s - self._u(n0 + 1), th) >= 0:
                        raise InternalContradiction("case B: anchor maximality contradicted (m = 0 branch)")
                    raise InternalContradiction("case B: next ball outside the window at N+m")
                base = N + m + 1
            n1 = 1
            while not cf.delta_ge(th, base, self._u(n0 + n1)):
                n1 += 1
            u = self._u(n0 + n1)
            if sign_of(d(base) * s - u, th) >= 0:
                raise InternalContradiction(f"case {case}: n1 sandwich fails")
            top = cf.last_index_with_delta_ge(th, u, base)
            M = top - (base - 1)
            if sign_of(d(base) * s - d(top), th) >= 0:
                raise InternalContradiction(f"case {case}: extension inequality fails")
            if case == "A":
                st.schedule[n0 + n1 + 1] = DodgeTask(N + 1, top, top)
            elif n1 == 1:
                if sign_of(d(N + m) * s - d(top), th) >= 0:
                    raise InternalContradiction("case B, n1 = 1: extension inequality fails")
                st.schedule[n0 + 2] = DodgeTask(N + 1, top, top)
            else:
                st.schedule[n0 + 2] = DodgeTask(N + 1, N + m, N + m)
                st.schedule[n0 + n1 + 1] = DodgeTask(N + m + 1, top, top)
        except StreamExhausted:
            st.phase = Phase.DONE
            st.schedule.clear()
            return "done(stream exhausted)"
        st.n1, st.m, st.M = n1, m, M
        note = f"case={case} {st.snapshot()}"
        st.cases.append(case)
        st.N, st.n0 = top, n0 + n1
        st.anchor_round = st.n0 + 1
        if not (lemma_window(th, s, st.N, self._u(st.n0) / 2) and not cf.delta_ge(th, st.N + 1, self._u(st.n0))):
            raise InternalContradiction("re-anchoring breaks the anchor sandwich")
        st.phase = Phase.CASE_A_FREE if case == "A" else Phase.CASE_B_FREE
        return note

    # -- results ----------------------------------------------------------

    def claims(self) -> list:
        st = self.state
        th = self.theta or (self._cfg.theta if self._cfg else None)
        if self._cfg is None or st.N_init is None or st.dodged_up_to < 0:
            lo = hi = 1
        else:
            lo = th.convergent(st.N_init + 1)[1]
            hi = max(lo, th.convergent(st.dodged_up_to + 1)[1])
        alpha = self._cfg.alpha if self._cfg else DEFAULT_ALPHA
        beta = self._cfg.beta if self._cfg else Fraction(1, 2)
        label = self.label if alpha == DEFAULT_ALPHA else f"{self.label}(experimental alpha)"
        return [Claim(label, th, alpha, beta, lo, hi)]


def build_white(kind: str = "dodge", thetas=None, scan_cap: int = cf.DEFAULT_SCAN_CAP):
    """White strategy from a serializable description.

    kind "dodge": one strategy per theta (dovetailed if several);
    kind "two-sided": each theta also gets its x -> -x conjugate.
    Several distinct thetas force rational ball centers, the only centers
    every strategy can read exactly.
    """
    thetas = [ThetaSpec.parse(t) if isinstance(t, str) else t for t in (thetas or [None])]
    mixed = len(set(thetas)) > 1
    parts = []
    for th in thetas:
        parts.append(DodgeWhite(th, scan_cap, rational_centers=mixed))
        if kind == "two-sided":
            parts.append(reflect(DodgeWhite(th, scan_cap, rational_centers=mixed)))
        elif kind != "dodge":
            raise ValueError(f"unknown white strategy kind {kind!r}")
    return parts[0] if len(parts) == 1 else Dovetail(parts)
