"""Convergents, the Delta sequence, generations of the orbit {theta q}, and index searches."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import ScanCapExceeded, StreamExhausted
from .theta import (
    CircleInterval,
    CirclePoint,
    LinearForm,
    ThetaSpec,
    bracket,
    circle_distance,
    sign_of,
    to_decimal,
)

DEFAULT_SCAN_CAP = 10**6
_INT64_HEADROOM = 2**62
_CHUNK = 1 << 20


@dataclass(frozen=True)
class Convergent:
    i: int
    p: int
    q: int


@dataclass(frozen=True)
class Delta:
    """Delta_i = |q_i theta - p_i| (= ||theta q_i|| for i >= 1), with lo < value < hi."""

    i: int
    value: LinearForm
    lo: Fraction
    hi: Fraction

    @property
    def rational_bounds(self) -> tuple[Fraction, Fraction]:
        return self.lo, self.hi


def convergent(theta: ThetaSpec, i: int) -> Convergent:
    p, q = theta.convergent(i)
    return Convergent(i, p, q)


@lru_cache(maxsize=4096)
def delta(theta: ThetaSpec, i: int) -> Delta:
    p, q = theta.convergent(i)
    _, q_next = theta.convergent(i + 1)
    value = LinearForm(q, -p) if i % 2 == 0 else LinearForm(-q, p)
    if sign_of(value, theta) <= 0:
        raise AssertionError(f"Delta_{i} = {value} is not positive")
    return Delta(i, value, Fraction(1, q_next + q), Fraction(1, q_next))


def delta_ge(theta: ThetaSpec, i: int, x) -> bool:
    """Delta_i >= x (x rational), with the rational bounds as a pre-filter."""
    d = delta(theta, i)
    x = Fraction(x)
    if x <= d.lo:
        return True
    if x >= d.hi:
        return False
    return sign_of(d.value - x, theta) >= 0


def last_index_with_delta_ge(theta: ThetaSpec, x, start: int = 0) -> int:
    """Largest j >= start with Delta_j >= x; requires Delta_start >= x."""
    if not delta_ge(theta, start, x):
        raise ValueError(f"Delta_{start} < {x}")
    j = start
    while delta_ge(theta, j + 1, x):
        j += 1
    return j


def generation_of(theta: ThetaSpec, q: int) -> int:
    """The i with q_i <= q < q_{i+1}; 0 for 1 <= q < q_1."""
    if q < 1:
        raise ValueError("generations are defined for q >= 1")
    i = 1
    if q < theta.convergent(1)[1]:
        return 0
    while theta.convergent(i + 1)[1] <= q:
        i += 1
    return i


def generation_start(theta: ThetaSpec, g: int) -> int:
    """Smallest q of generation g (generation 0 starts at q = 1)."""
    return 1 if g == 0 else theta.convergent(g)[1]


def generation_end(theta: ThetaSpec, g: int) -> int:
    """q_{g+1}: one past the last q of generation g."""
    return theta.convergent(g + 1)[1]


def find_drop(theta: ThetaSpec, N: int, s) -> int:
    """Smallest m >= 1 with Delta_{N+m+1} < s Delta_N <= Delta_{N+m}; 0 if s Delta_N > Delta_{N+1}."""
    s = Fraction(s)
    if not 0 < s < 1:
        raise ValueError("s must lie in (0, 1)")
    target = delta(theta, N).value * s
    if sign_of(target - delta(theta, N + 1).value, theta) > 0:
        return 0
    j = N + 1
    while sign_of(delta(theta, j + 1).value - target, theta) >= 0:
        j += 1
    m = j - N
    bound = 2 * _ceil_log2(1 / s) + 2
    if m > bound:
        raise AssertionError(f"drop offset {m} exceeds the bound {bound}")
    return m


def _ceil_log2(x: Fraction) -> int:
    k = 0
    while 2**k < x:
        k += 1
    return k


# -- orbit scans -----------------------------------------------------------


@dataclass(frozen=True)
class OrbitGrid:
    """theta replaced by p/Q for a convergent with Q * q_max < 2**62.

    For 0 <= q < q_max, (q p mod Q) / Q is within 1/Q of theta q mod 1, so
    integer residues locate each orbit point to within one grid unit.
    """

    p: int
    Q: int
    q_max: int

    @classmethod
    def for_range(cls, theta: ThetaSpec, q_max: int) -> "OrbitGrid":
        q_max = max(int(q_max), 2)
        if q_max >= 2**31:
            raise ScanCapExceeded(q_max, 2**31 - 1)
        k = 1
        while theta.convergent(k + 1)[1] * q_max < _INT64_HEADROOM:
            k += 1
        p, Q = theta.convergent(k)
        # the next denominator must exceed q_max for the one-unit error bound
        assert theta.convergent(k + 1)[1] > q_max
        return cls(p, Q, q_max)

    def residues(self, q: np.ndarray) -> np.ndarray:
        return (q * np.int64(self.p)) % np.int64(self.Q)

    def locate(self, x: LinearForm, theta: ThetaSpec) -> int:
        """Integer C with |x*Q - C| <= 1 (x read mod 1)."""
        lo, _ = bracket(x, theta, Fraction(1, 2 * self.Q))
        return int(round((lo % 1) * self.Q)) % self.Q

    def circ(self, res: np.ndarray, c: int) -> np.ndarray:
        d = np.abs(res - np.int64(c))
        return np.minimum(d, np.int64(self.Q) - d)


def orbit_points_in_range(
    theta: ThetaSpec,
    window: CircleInterval,
    q_lo: int,
    q_hi: int,
    scan_cap: int = DEFAULT_SCAN_CAP,
) -> list[tuple[int, CirclePoint]]:
    """All q in [q_lo, q_hi) with dist(theta q, window.center) <= window.radius, sorted by q."""
    if q_hi > scan_cap:
        raise ScanCapExceeded(q_hi, scan_cap)
    q_lo = max(int(q_lo), 0)
    if q_hi <= q_lo:
        return []
    grid = OrbitGrid.for_range(theta, q_hi)
    c = grid.locate(window.center.rep, theta)
    # grid error: 1 unit from theta, 1 from the center; +1 for the floor
    limit = int(window.radius * grid.Q) + 3
    out = []
    for start in range(q_lo, q_hi, _CHUNK):
        q = np.arange(start, min(start + _CHUNK, q_hi), dtype=np.int64)
        d = grid.circ(grid.residues(q), c)
        for qq in q[d <= limit].tolist():
            pt = CirclePoint.of(LinearForm(qq, 0), theta)
            dist = circle_distance(pt, window.center, theta)
            if sign_of(dist - window.radius, theta) <= 0:
                out.append((qq, pt))
    return out


def orbit_points_near(
    theta: ThetaSpec,
    window: CircleInterval,
    max_generation: int,
    scan_cap: int = DEFAULT_SCAN_CAP,
    min_generation: int = 0,
    include_zero: bool = False,
) -> list[tuple[int, CirclePoint]]:
    """Orbit points of generations min_generation..max_generation lying in ``window``.

    ``include_zero`` adds q = 0 (the point 0 itself) when min_generation is 0.
    """
    q_hi = generation_end(theta, max_generation)
    if q_hi > scan_cap:
        raise ScanCapExceeded(q_hi, scan_cap)
    q_lo = generation_start(theta, min_generation)
    if min_generation == 0 and include_zero:
        q_lo = 0
    return orbit_points_in_range(theta, window, q_lo, q_hi, scan_cap)


def max_generation_within(theta: ThetaSpec, scan_cap: int) -> int:
    """Largest g with q_{g+1} <= scan_cap (-1 if none).

    For a finite quotient stream the search also stops where the stream ends.
    """
    g = -1
    try:
        while theta.convergent(g + 2)[1] <= scan_cap:
            g += 1
    except StreamExhausted:
        pass
    return g


def facts_table(theta: ThetaSpec, depth: int, digits: int = 30) -> list[dict]:
    rows = []
    for i in range(depth + 1):
        c = convergent(theta, i)
        d = delta(theta, i)
        rows.append(
            {
                "i": i,
                "a": theta.quotient(i),
                "p": c.p,
                "q": c.q,
                "delta_lo": d.lo,
                "delta_hi": d.hi,
                "delta": to_decimal(d.value, theta, digits),
            }
        )
    return rows
