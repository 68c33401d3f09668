"""Brute-force oracles: certificate checks, effective badness, and fact batteries.

This module deliberately depends only on ``theta`` and ``contfrac``; it never
imports the White strategy, so a certificate check re-derives everything from
the final interval and a q-range.

Scans use an exact integer grid as a pre-filter: theta is replaced by a
convergent p/Q with Q * q_max < 2**62, which places every theta q (q < q_max)
within one grid unit.  Anything the grid cannot settle with a two-unit margin
is decided by exact arithmetic.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor
from typing import Optional

import numpy as np

from . import contfrac as cf
from .errors import ScanCapExceeded
from .theta import (
    CircleInterval,
    CirclePoint,
    LinearForm,
    ThetaSpec,
    bracket,
    circle_distance,
    compare,
    orbit_point,
    reduce_form,
    sign_of,
)

_CHUNK = 1 << 18
_LEMMA_CHUNK = 1 << 22


def _circ(d: np.ndarray, Q: int) -> np.ndarray:
    d = np.abs(d)
    return np.minimum(d, np.int64(Q) - d)


def default_scan_cap() -> int:
    return int(os.environ.get("SCHMIDT_SCAN_CAP", cf.DEFAULT_SCAN_CAP))


def certificate_constant(alpha, beta) -> Fraction:
    """c = (alpha beta / 4)^3."""
    return (Fraction(alpha) * Fraction(beta) / 4) ** 3


@dataclass(frozen=True)
class Certificate:
    """Claim: q * dist(theta q, W_final) >= c for every q in [q_lo, q_hi)."""

    theta: ThetaSpec
    W_final: CircleInterval
    c: Fraction
    q_lo: int
    q_hi: int
    transcript_ref: str = ""


@dataclass(frozen=True)
class Verdict:
    verified: bool
    q_lo: int
    q_hi: int
    c: Fraction
    q: Optional[int] = None
    margin: Optional[Fraction] = None

    def to_json(self) -> dict:
        out = {
            "verdict": "verified" if self.verified else "refuted",
            "range": [self.q_lo, self.q_hi],
            "c": str(self.c),
        }
        if not self.verified:
            out["q"] = self.q
            out["margin"] = str(self.margin)
        return out


class _Grid:
    def __init__(self, theta: ThetaSpec, q_max: int):
        q_max = max(int(q_max), 2)
        if q_max >= 2**31:
            raise ScanCapExceeded(q_max, 2**31 - 1)
        k = 1
        while theta.convergent(k + 1)[1] * q_max < 2**62:
            k += 1
        self.p, self.Q = theta.convergent(k)
        if theta.convergent(k + 1)[1] <= q_max:
            raise AssertionError("grid too coarse for the scan range")

    def positions(self, q: np.ndarray) -> np.ndarray:
        return (q * np.int64(self.p)) % np.int64(self.Q)

    def place(self, x: LinearForm, theta: ThetaSpec) -> int:
        lo, _ = bracket(x, theta, Fraction(1, 4 * self.Q))
        return floor((lo % 1) * self.Q + Fraction(1, 2)) % self.Q

    def dist(self, pos: np.ndarray, c: int) -> np.ndarray:
        d = np.abs(pos - np.int64(c))
        return np.minimum(d, np.int64(self.Q) - d)


def _exact_shortfall(q: int, cert: Certificate) -> int:
    """Sign of q * dist(theta q, W) - c, with dist = 0 inside W."""
    theta, W = cert.theta, cert.W_final
    d = circle_distance(orbit_point(q, theta), W.center, theta) - W.radius
    if sign_of(d, theta) <= 0:
        return -1 if cert.c > 0 else 0
    return sign_of(d * q - cert.c, theta)


def _margin(q: int, cert: Certificate) -> Fraction:
    """A rational lower bound (to 1e-30) on q * dist(theta q, W)."""
    theta, W = cert.theta, cert.W_final
    d = circle_distance(orbit_point(q, theta), W.center, theta) - W.radius
    if sign_of(d, theta) <= 0:
        return Fraction(0)
    lo, _ = bracket(d * q, theta, Fraction(1, 10**30))
    return max(lo, Fraction(0))


def check_certificate(
    cert: Certificate, scan_cap: Optional[int] = None, method: str = "grid"
) -> Verdict:
    """Exhaustive check of the certificate's claim; reports the first failing q.

    ``method="exact"`` skips the grid and decides every q with exact forms
    (slow, meant for small ranges and for cross-checking).
    """
    scan_cap = default_scan_cap() if scan_cap is None else scan_cap
    lo, hi, c = cert.q_lo, cert.q_hi, Fraction(cert.c)
    if hi <= lo:
        return Verdict(True, lo, hi, c)
    if hi - 1 > scan_cap:
        raise ScanCapExceeded(hi - 1, scan_cap)
    if method == "exact":
        for q in range(max(lo, 1), hi):
            if _exact_shortfall(q, cert) < 0:
                return Verdict(False, lo, hi, c, q, _margin(q, cert))
        return Verdict(True, lo, hi, c)
    if method != "grid":
        raise ValueError(f"unknown method {method!r}")

    theta, W = cert.theta, cert.W_final
    grid = _Grid(theta, hi)
    center = grid.place(W.center.rep, theta)
    rq = ceil(W.radius * grid.Q)
    cq = ceil(c * grid.Q)
    for start in range(max(lo, 1), hi, _CHUNK):
        q = np.arange(start, min(start + _CHUNK, hi), dtype=np.int64)
        d = grid.dist(grid.positions(q), center)
        need = rq + (np.int64(cq) + q - 1) // q
        for qq in q[d - 2 < need].tolist():
            if _exact_shortfall(qq, cert) < 0:
                return Verdict(False, lo, hi, c, qq, _margin(qq, cert))
    return Verdict(True, lo, hi, c)


def effective_badness(x, theta: ThetaSpec, Q: int, scan_cap: Optional[int] = None) -> tuple[LinearForm, int]:
    """(min over 1 <= q <= Q of q * ||theta q - x||, first minimizing q)."""
    scan_cap = default_scan_cap() if scan_cap is None else scan_cap
    if Q > scan_cap:
        raise ScanCapExceeded(Q, scan_cap)
    if Q < 1:
        raise ValueError("Q must be >= 1")
    x = x.rep if isinstance(x, CirclePoint) else x
    grid = _Grid(theta, Q + 1)
    center = grid.place(x, theta)
    q = np.arange(1, Q + 1, dtype=np.int64)
    d = grid.dist(grid.positions(q), center)
    lower = q * np.maximum(d - 2, 0)
    upper = q * (d + 2)
    cands = q[lower <= upper.min()].tolist()
    best, best_q = None, None
    for qq in cands:
        v = circle_distance(orbit_point(qq, theta), x, theta) * qq
        if best is None or compare(v, best, theta) < 0:
            best, best_q = v, qq
    return best, best_q


# -- fact battery ------------------------------------------------------------


@dataclass
class BatteryReport:
    theta: str
    depth: int
    checks: list = field(default_factory=list)

    def add(self, fact: str, i: int, ok: bool, **detail) -> None:
        self.checks.append({"fact": fact, "i": i, "pass": bool(ok), **detail})

    @property
    def all_pass(self) -> bool:
        return all(c["pass"] for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c["pass"]]

    def to_json(self) -> dict:
        return {"theta": self.theta, "depth": self.depth, "all_pass": self.all_pass, "checks": self.checks}


def check_delta_sandwich(theta: ThetaSpec, i: int) -> bool:
    """1/2 Delta_{i-1}^{-1} < q_i <= Delta_{i-1}^{-1}."""
    q = theta.convergent(i)[1]
    d = cf.delta(theta, i - 1).value
    return sign_of(d * (2 * q) - 1, theta) > 0 and sign_of(d * q - 1, theta) <= 0


def check_delta_recurrence(theta: ThetaSpec, i: int) -> bool:
    """Delta_{i-1} = a_{i+1} Delta_i + Delta_{i+1} as an identity of forms."""
    lhs = cf.delta(theta, i - 1).value
    rhs = cf.delta(theta, i).value * theta.quotient(i + 1) + cf.delta(theta, i + 1).value
    return lhs == rhs


def check_delta_shape(theta: ThetaSpec, i: int) -> bool:
    d0, d1, d2 = (cf.delta(theta, j) for j in (i - 1, i, i + 1))
    decreasing = sign_of(d1.value - d2.value, theta) > 0 and sign_of(d0.value - d1.value, theta) > 0
    halving = sign_of(d2.value - d0.value * Fraction(1, 2), theta) < 0
    bounds = sign_of(d1.value - d1.lo, theta) >= 0 and sign_of(d1.value - d1.hi, theta) <= 0
    return decreasing and halving and bounds


def _sorted_orbit(theta: ThetaSpec, n: int, grid: _Grid) -> np.ndarray:
    """q = 0..n-1 ordered by the position of theta q in [0, 1).

    Neighbours whose grid positions differ by more than two units are
    ordered correctly by the grid; closer neighbours are compared exactly.
    """
    q = np.arange(n, dtype=np.int64)
    pos = grid.positions(q)
    perm = np.argsort(pos, kind="stable")
    order, pos = q[perm], pos[perm]
    for k in np.nonzero(np.diff(pos) <= 2)[0].tolist():
        u = orbit_point(int(order[k]), theta).rep
        v = orbit_point(int(order[k + 1]), theta).rep
        if compare(u, v, theta) >= 0:
            raise AssertionError("grid ordering disagrees with exact ordering")
    return order


def check_spacing(theta: ThetaSpec, i: int, pairwise_limit: int = 60) -> tuple[bool, bool]:
    """Over 0 <= j < k < q_i: ||theta k - theta j|| >= Delta_{i-1}, and equality occurs.

    The minimum over all pairs of points on a circle is the minimum over
    neighbours in sorted order, which is what is scanned; for small q_i a
    literal all-pairs scan is run as well.
    """
    n = theta.convergent(i)[1]
    target = cf.delta(theta, i - 1).value
    if n < 2:
        return True, True
    grid = _Grid(theta, n)
    order = _sorted_orbit(theta, n, grid)
    pos = grid.positions(order)
    gaps = np.diff(np.append(pos, pos[0] + grid.Q))
    gaps = np.minimum(gaps, np.int64(grid.Q) - gaps)
    t_lo, t_hi = bracket(target, theta, Fraction(1, grid.Q))
    t_lo, t_hi = floor(t_lo * grid.Q), ceil(t_hi * grid.Q)
    if np.any(gaps + 2 < t_lo):
        return False, False
    bound_ok, attained = True, False
    order = order.tolist()
    for k in np.nonzero(gaps - 2 <= t_hi)[0].tolist():
        u = orbit_point(order[k], theta)
        v = orbit_point(order[(k + 1) % n], theta)
        s = sign_of(circle_distance(u, v, theta) - target, theta)
        bound_ok &= s >= 0
        attained |= s == 0
    if n <= pairwise_limit:
        pts = [orbit_point(k, theta) for k in range(n)]
        for k in range(n):
            for j in range(k):
                if sign_of(circle_distance(pts[k], pts[j], theta) - target, theta) < 0:
                    return False, attained
    return bound_ok, attained


def check_best_approximation(theta: ThetaSpec, i: int) -> bool:
    """min over 1 <= q < q_{i+1} of ||theta q|| equals Delta_i."""
    q_next = theta.convergent(i + 1)[1]
    n = q_next - 1
    if n < 1:
        return True
    grid = _Grid(theta, q_next)
    q = np.arange(1, q_next, dtype=np.int64)
    d = grid.dist(grid.positions(q), 0)
    cands = q[d - 2 <= d.min() + 2].tolist()
    best = None
    for k in cands:
        v = circle_distance(orbit_point(k, theta), LinearForm(), theta)
        if best is None or compare(v, best, theta) < 0:
            best = v
    return sign_of(best - cf.delta(theta, i).value, theta) == 0


def check_lemma_circle_mult(theta: ThetaSpec, i: int, r: Fraction) -> dict:
    """Brute-force check of: q in [q_{i+1}, q_{i+2}) far (>= r Delta_i) from every
    theta p with 0 <= p < q_{i+1}  ==>  q >= (r/2) q_{i+2}.

    A second path decomposes q = n q_{i+1} + s and follows the chain
    n Delta_{i+1} = ||theta q - theta s|| >= r Delta_i; both verdicts are returned.
    """
    r = Fraction(r)
    q1 = theta.convergent(i + 1)[1]
    q2 = theta.convergent(i + 2)[1]
    d_i = cf.delta(theta, i).value
    d_next = cf.delta(theta, i + 1).value
    threshold = d_i * r
    grid = _Grid(theta, q2)

    base = _sorted_orbit(theta, q1, grid)
    base_pos = grid.positions(base)
    t_lo, t_hi = bracket(threshold, theta, Fraction(1, grid.Q))
    t_lo, t_hi = floor(t_lo * grid.Q), ceil(t_hi * grid.Q)

    chain = sign_of(d_i * (2 * q1) - d_next * q2, theta) >= 0
    per_n = {}

    def decomp_ok(n: int) -> bool:
        # n Delta_{i+1} = ||theta n q_{i+1}|| must reach the threshold, and n q_{i+1} >= (r/2) q_{i+2}
        if n not in per_n:
            far = circle_distance(orbit_point(n * q1, theta), LinearForm(), theta)
            per_n[n] = (
                far == d_next * n,
                chain and sign_of(d_next * n - threshold, theta) >= 0 and n * q1 * 2 * r.denominator >= r.numerator * q2,
            )
        return per_n[n][1]

    lemma_ok = agree = True
    hyp_count = 0
    for start in range(q1, q2, _LEMMA_CHUNK):
        qs = np.arange(start, min(start + _LEMMA_CHUNK, q2), dtype=np.int64)
        pos = grid.positions(qs)
        idx = np.searchsorted(base_pos, pos) % len(base)
        left = (idx - 1) % len(base)
        d_near = np.minimum(_circ(pos - base_pos[left], grid.Q), _circ(pos - base_pos[idx], grid.Q))

        hyp = d_near - 2 >= t_hi
        for k in np.nonzero((d_near - 2 < t_hi) & (d_near + 2 >= t_lo))[0].tolist():
            pq = orbit_point(int(qs[k]), theta)
            hyp[k] = all(
                sign_of(circle_distance(pq, orbit_point(nb, theta), theta) - threshold, theta) >= 0
                for nb in (int(base[left[k]]), int(base[idx[k]]))
            )
        sel = qs[hyp]
        hyp_count += len(sel)
        # direct verdict: q >= (r/2) q_{i+2}
        direct = (2 * sel * r.denominator) >= (r.numerator * q2)
        lemma_ok &= bool(np.all(direct))
        ns, inv = np.unique(sel // q1, return_inverse=True)
        decomp = np.array([decomp_ok(int(n)) for n in ns.tolist()], dtype=bool)[inv]
        agree &= bool(np.array_equal(direct, decomp))
    identity_ok = all(v[0] for v in per_n.values())

    return {
        "pass": lemma_ok and agree and identity_ok,
        "lemma": lemma_ok,
        "decomposition_agrees": agree,
        "identity": bool(identity_ok),
        "hypothesis_count": hyp_count,
        "scanned": q2 - q1,
    }


def run_fact_battery(
    theta: ThetaSpec,
    depth: int,
    scan_cap: Optional[int] = None,
    spacing_limit: int = 5000,
    lemma_depth: int = 12,
    radii=(Fraction(1, 4), Fraction(1, 8), Fraction(1, 16)),
) -> BatteryReport:
    """Every continued-fraction fact and the circle-multiplication lemma, per index."""
    scan_cap = default_scan_cap() if scan_cap is None else scan_cap
    report = BatteryReport(str(theta), depth)
    for i in range(1, depth + 1):
        report.add("delta_sandwich", i, check_delta_sandwich(theta, i))
        report.add("delta_recurrence", i, check_delta_recurrence(theta, i))
        report.add("delta_shape", i, check_delta_shape(theta, i))
    i = 1
    while i <= depth and theta.convergent(i)[1] <= min(spacing_limit, scan_cap):
        bound_ok, attained = check_spacing(theta, i)
        report.add("spacing", i, bound_ok and attained, bound=bound_ok, attained=attained)
        if theta.convergent(i + 1)[1] <= min(spacing_limit, scan_cap):
            report.add("best_approximation", i, check_best_approximation(theta, i))
        i += 1
    # Delta_0 = theta is ||theta|| only when a_1 >= 2
    first = 0 if theta.quotient(1) >= 2 else 1
    for i in range(first, min(lemma_depth, depth) + 1):
        if theta.convergent(i + 2)[1] > scan_cap:
            break
        for r in radii:
            res = check_lemma_circle_mult(theta, i, r)
            report.add("lemma_circle_mult", i, res.pop("pass"), r=str(r), **res)
    return report
