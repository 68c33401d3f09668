"""Exact arithmetic for numbers a*theta + b and for arcs of the circle R/Z.

theta is an irrational number in (0, 1) given by its partial quotients
``[0; a1, a2, ...]``.  Every comparison is decided exactly by locating the
competing rational between two consecutive convergents of theta.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from math import floor
from typing import Iterable, Optional, Sequence, Union

from .errors import RationalThetaError, StreamExhausted

Rational = Union[int, Fraction]

DEFAULT_QUOTIENT_BUDGET = 20_000
HALF = Fraction(1, 2)


class ThetaSpec:
    """An irrational theta = [0; a1, a2, ...] in (0, 1).

    Either a finite list of quotients with a hard depth, or an eventually
    periodic description ``prefix`` followed by ``period`` repeated forever.
    Convergents are memoized; the memo only ever grows, under a lock, so
    concurrent readers always see a consistent prefix.
    """

    def __init__(
        self,
        prefix: Sequence[int],
        period: Optional[Sequence[int]] = None,
        budget: int = DEFAULT_QUOTIENT_BUDGET,
    ):
        prefix = tuple(int(a) for a in prefix)
        if period is not None:
            period = tuple(int(a) for a in period)
            if not period:
                raise RationalThetaError("empty period: the continued fraction terminates, theta is rational")
        elif not prefix:
            raise RationalThetaError("no partial quotients given")
        for a in prefix + (period or ()):
            if a < 1:
                raise ValueError(f"partial quotients must be >= 1, got {a}")
        self.prefix = prefix
        self.period = period
        self.budget = budget
        # _p[i + 1], _q[i + 1] hold p_i, q_i; slot 0 is the (1, 0) seed at i = -1.
        self._p = [1, 0]
        self._q = [0, 1]
        self._lock = threading.Lock()

    # -- construction -------------------------------------------------

    @classmethod
    def parse(cls, text: str, budget: int = DEFAULT_QUOTIENT_BUDGET) -> "ThetaSpec":
        """Parse ``cf:[a1,a2,...]`` or ``cfper:[pre|period]``."""
        text = text.strip()
        m = re.fullmatch(r"cf:\[([^\]]*)\]", text)
        if m:
            return cls(_int_list(m.group(1), text), None, budget)
        m = re.fullmatch(r"cfper:\[([^|\]]*)\|([^\]]*)\]", text)
        if m:
            return cls(_int_list(m.group(1), text), _int_list(m.group(2), text), budget)
        raise ValueError(f"cannot parse theta spec {text!r}: expected cf:[...] or cfper:[pre|period]")

    @classmethod
    def from_fraction(cls, x: Fraction) -> "ThetaSpec":
        raise RationalThetaError(f"theta = {x} is rational; only irrational theta are supported")

    def __str__(self) -> str:
        pre = ",".join(map(str, self.prefix))
        if self.period is None:
            return f"cf:[{pre}]"
        return f"cfper:[{pre}|{','.join(map(str, self.period))}]"

    def __repr__(self) -> str:
        return f"ThetaSpec({str(self)!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, ThetaSpec) and str(self) == str(other)

    def __hash__(self) -> int:
        return hash(str(self))

    # -- quotient stream ----------------------------------------------

    @property
    def depth(self) -> Optional[int]:
        """Number of available quotients, or None for an infinite stream."""
        return len(self.prefix) if self.period is None else None

    def quotient(self, i: int) -> int:
        """Partial quotient a_i, i >= 1 (a_0 is 0)."""
        if i == 0:
            return 0
        if i < 0:
            raise IndexError(i)
        if i <= len(self.prefix):
            return self.prefix[i - 1]
        if self.period is None:
            raise StreamExhausted(i, len(self.prefix))
        if i > self.budget:
            raise StreamExhausted(i, self.budget)
        return self.period[(i - 1 - len(self.prefix)) % len(self.period)]

    def convergent(self, i: int) -> tuple[int, int]:
        """(p_i, q_i); i = -1 gives the seed (1, 0)."""
        if i + 1 >= len(self._q):
            self._extend(i)
        return self._p[i + 1], self._q[i + 1]

    def _extend(self, i: int) -> None:
        with self._lock:
            p, q = list(self._p), list(self._q)
            while len(q) <= i + 1:
                k = len(q) - 1  # index of the convergent being built
                a = self.quotient(k)
                p.append(a * p[-1] + p[-2])
                q.append(a * q[-1] + q[-2])
            # swap in whole lists so readers never see a half-built prefix
            self._p, self._q = p, q

    def compare_rational(self, r: Rational) -> int:
        """Sign of theta - r."""
        r = Fraction(r)
        if r <= 0:
            return 1
        if r >= 1:
            return -1
        u, v = r.numerator, r.denominator
        j = 0
        while True:
            # theta lies strictly between p_j/q_j and p_{j+1}/q_{j+1}
            pj, qj = self.convergent(j)
            pk, qk = self.convergent(j + 1)
            # cross-multiplied: sign(r - p/q) = sign(u q - v p)
            s_lo = _sgn(u * qj - v * pj)
            s_hi = _sgn(u * qk - v * pk)
            if j % 2 == 0:  # p_j/q_j < theta < p_{j+1}/q_{j+1}
                if s_lo <= 0:
                    return 1
                if s_hi >= 0:
                    return -1
            else:
                if s_lo >= 0:
                    return -1
                if s_hi <= 0:
                    return 1
            j += 1

    def enclosure(self, j: int) -> tuple[Fraction, Fraction]:
        """Rationals lo < theta < hi from the convergents j and j+1."""
        pj, qj = self.convergent(j)
        pk, qk = self.convergent(j + 1)
        a, b = Fraction(pj, qj), Fraction(pk, qk)
        return (a, b) if a < b else (b, a)


def _int_list(body: str, text: str) -> list[int]:
    body = body.strip()
    if not body:
        return []
    out = []
    for pos, tok in enumerate(body.split(",")):
        tok = tok.strip()
        if not re.fullmatch(r"\d+", tok):
            raise ValueError(f"bad partial quotient {tok!r} at position {pos} in {text!r}")
        out.append(int(tok))
    return out


def _sgn(x) -> int:
    return (x > 0) - (x < 0)


@dataclass(frozen=True)
class LinearForm:
    """The real number a*theta + b with rational a and b.

    Orbit points have integral a; rational a appears once forms are scaled,
    e.g. at midpoints of arcs.
    """

    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))

    @classmethod
    def const(cls, b: Rational) -> "LinearForm":
        return cls(0, Fraction(b))

    def __add__(self, other) -> "LinearForm":
        other = as_form(other)
        return LinearForm(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __sub__(self, other) -> "LinearForm":
        other = as_form(other)
        return LinearForm(self.a - other.a, self.b - other.b)

    def __rsub__(self, other) -> "LinearForm":
        return as_form(other) - self

    def __neg__(self) -> "LinearForm":
        return LinearForm(-self.a, -self.b)

    def scale(self, k: Rational) -> "LinearForm":
        k = Fraction(k)
        return LinearForm(self.a * k, self.b * k)

    def __mul__(self, k) -> "LinearForm":
        if isinstance(k, LinearForm):
            raise TypeError("product of two linear forms is not a linear form")
        return self.scale(k)

    __rmul__ = __mul__

    @property
    def is_rational(self) -> bool:
        return self.a == 0

    def __str__(self) -> str:
        if self.a == 0:
            return str(self.b)
        return f"{self.a}θ{'+' if self.b >= 0 else '-'}{abs(self.b)}"


def as_form(x) -> LinearForm:
    if isinstance(x, LinearForm):
        return x
    if isinstance(x, (int, Fraction)):
        return LinearForm(0, Fraction(x))
    raise TypeError(f"cannot treat {x!r} as a linear form")


def sign_of(f, theta: ThetaSpec) -> int:
    """Exact sign of a*theta + b."""
    f = as_form(f)
    if f.a == 0:
        return _sgn(f.b)
    # a*theta + b has the sign of a times the sign of (theta - (-b/a))
    return _sgn(f.a) * theta.compare_rational(-f.b / f.a)


def compare(f, g, theta: ThetaSpec) -> int:
    return sign_of(as_form(f) - as_form(g), theta)


def form_min(f, g, theta: ThetaSpec) -> LinearForm:
    return as_form(f) if compare(f, g, theta) <= 0 else as_form(g)


def sort_forms(forms: Iterable, theta: ThetaSpec, key=lambda x: x) -> list:
    return sorted(forms, key=cmp_to_key(lambda x, y: compare(key(x), key(y), theta)))


def bracket(f, theta: ThetaSpec, width: Rational) -> tuple[Fraction, Fraction]:
    """Rationals lo <= f <= hi with hi - lo <= width (strict unless f is rational)."""
    f = as_form(f)
    if f.a == 0:
        return f.b, f.b
    width = Fraction(width)
    j = 0
    while True:
        _, qj = theta.convergent(j)
        _, qk = theta.convergent(j + 1)
        # the convergent enclosure has width 1/(qj qk); the form scales it by |a|
        if abs(f.a) <= width * qj * qk:
            lo, hi = theta.enclosure(j)
            ends = (f.a * lo + f.b, f.a * hi + f.b)
            return min(ends), max(ends)
        j += 1


def floor_of(f, theta: ThetaSpec) -> int:
    f = as_form(f)
    if f.a == 0:
        return floor(f.b)
    j = 0
    while True:
        lo, hi = theta.enclosure(j)
        ends = sorted((f.a * lo + f.b, f.a * hi + f.b))
        if floor(ends[0]) == floor(ends[1]):
            return floor(ends[0])
        j += 1


def to_decimal(f, theta: ThetaSpec, digits: int = 30) -> str:
    """Decimal string of f with ``digits`` places after the point."""
    f = as_form(f)
    lo, hi = bracket(f, theta, Fraction(1, 10 ** (digits + 8)))
    mid = (lo + hi) / 2
    sign = "-" if mid < 0 else ""
    mid = abs(mid)
    ip = int(mid)
    frac = mid - ip
    scaled = round(frac * 10**digits)
    if scaled == 10**digits:
        ip, scaled = ip + 1, 0
    return f"{sign}{ip}.{scaled:0{digits}d}"


@dataclass(frozen=True)
class CirclePoint:
    """A point of R/Z, stored by its canonical lift with 0 <= value < 1."""

    rep: LinearForm

    @classmethod
    def of(cls, f, theta: ThetaSpec) -> "CirclePoint":
        return cls(reduce_form(f, theta))

    def __str__(self) -> str:
        return f"[{self.rep}]"


def reduce_form(f, theta: ThetaSpec) -> LinearForm:
    """Shift f by an integer so its value lies in [0, 1)."""
    f = as_form(f)
    k = floor_of(f, theta)
    return f if k == 0 else f - k


def orbit_point(q: int, theta: ThetaSpec) -> CirclePoint:
    """theta*q mod 1."""
    return CirclePoint.of(LinearForm(q, 0), theta)


def _point_form(x) -> LinearForm:
    return x.rep if isinstance(x, CirclePoint) else as_form(x)


def signed_offset(x, y, theta: ThetaSpec) -> LinearForm:
    """The lift of x - y lying in [-1/2, 1/2)."""
    d = reduce_form(_point_form(x) - _point_form(y), theta)
    if sign_of(d - HALF, theta) >= 0:
        d = d - 1
    return d


def circle_distance(x, y, theta: ThetaSpec) -> LinearForm:
    """min over integers p of |x - y - p|, as an exact form with value in [0, 1/2]."""
    d = reduce_form(_point_form(x) - _point_form(y), theta)
    if sign_of(d - HALF, theta) > 0:
        return 1 - d
    return d


@dataclass(frozen=True)
class CircleInterval:
    """Closed arc {x : dist(x, center) <= radius}, 0 < radius <= 1/2."""

    center: CirclePoint
    radius: Fraction

    def __post_init__(self):
        r = Fraction(self.radius)
        if not 0 < r <= HALF:
            raise ValueError(f"radius must lie in (0, 1/2], got {r}")
        object.__setattr__(self, "radius", r)
        if not isinstance(self.center, CirclePoint):
            raise TypeError("center must be a CirclePoint")

    def __str__(self) -> str:
        return f"B({self.center.rep}, {self.radius})"


def ball(center, radius: Rational, theta: ThetaSpec) -> CircleInterval:
    if not isinstance(center, CirclePoint):
        center = CirclePoint.of(center, theta)
    return CircleInterval(center, Fraction(radius))


def interval_contains(outer: CircleInterval, inner: CircleInterval, theta: ThetaSpec) -> bool:
    """dist(centers) <= outer.radius - inner.radius, exactly."""
    slack = outer.radius - inner.radius
    if slack < 0:
        return False
    d = circle_distance(outer.center, inner.center, theta)
    return sign_of(d - slack, theta) <= 0


def point_in_interval(x, iv: CircleInterval, theta: ThetaSpec) -> bool:
    return sign_of(circle_distance(x, iv.center, theta) - iv.radius, theta) <= 0


def intervals_disjoint(u: CircleInterval, v: CircleInterval, theta: ThetaSpec) -> bool:
    """True iff the closed arcs share no point."""
    if u.radius + v.radius >= HALF:
        return False
    d = circle_distance(u.center, v.center, theta)
    return sign_of(d - (u.radius + v.radius), theta) > 0


@dataclass(frozen=True)
class Arc:
    """Closed arc [lo, hi] of the real line, read mod 1 (lo <= hi as lifts).

    ``lo_obstacle``/``hi_obstacle`` say whether that end touches an obstacle
    rather than the boundary of the window it was cut from.
    """

    lo: LinearForm
    hi: LinearForm
    lo_obstacle: bool = False
    hi_obstacle: bool = False

    @property
    def length(self) -> LinearForm:
        return self.hi - self.lo


def interval_gap_complement(
    window: CircleInterval, obstacles: Sequence[CircleInterval], theta: ThetaSpec
) -> list[Arc]:
    """Maximal closed subarcs of ``window`` meeting no obstacle interior.

    Arcs are returned in order along the window, as lifts around the lift of
    the window's center.  Degenerate (single point) gaps are dropped.
    """
    z = window.center.rep
    rho = window.radius
    pieces = []
    for ob in obstacles:
        o = signed_offset(ob.center, window.center, theta)
        for shift in (-1, 0, 1):
            lo, hi = o + shift - ob.radius, o + shift + ob.radius
            if sign_of(hi + rho, theta) < 0 or sign_of(lo - rho, theta) > 0:
                continue
            if sign_of(lo + rho, theta) < 0:
                lo = LinearForm.const(-rho)
            if sign_of(hi - rho, theta) > 0:
                hi = LinearForm.const(rho)
            pieces.append((lo, hi))
    pieces = sort_forms(pieces, theta, key=lambda p: p[0])
    arcs = []
    cur = LinearForm.const(-rho)
    cur_obstacle = False
    for lo, hi in pieces:
        if sign_of(lo - cur, theta) > 0:
            arcs.append(Arc(z + cur, z + lo, cur_obstacle, True))
        if sign_of(hi - cur, theta) >= 0:
            cur, cur_obstacle = hi, True
    if sign_of(cur - rho, theta) < 0:
        arcs.append(Arc(z + cur, z + rho, cur_obstacle, False))
    return arcs
