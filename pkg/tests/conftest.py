from fractions import Fraction

import mpmath
import pytest

from schmidt.theta import LinearForm, ThetaSpec

GOLDEN = "cfper:[|1]"
SILVER = "cfper:[|2]"
LINEAR30 = "cf:[" + ",".join(str(k) for k in range(1, 31)) + "]"
# a single a_10 = 50 lands on an anchor for the default opening ball
BIG_QUOTIENT = "cfper:[1,1,1,1,1,1,1,1,1,50|1]"
ACCEPTANCE_THETAS = [GOLDEN, SILVER, LINEAR30]

mpmath.mp.dps = 250


def theta_mp(theta: ThetaSpec, terms: int = 400):
    """theta to ~250 digits by folding its continued fraction from the back."""
    n = terms if theta.depth is None else theta.depth
    x = mpmath.mpf(0)
    for i in range(n, 0, -1):
        x = 1 / (theta.quotient(i) + x)
    return x


def form_mp(f: LinearForm, t):
    return mpmath.mpf(f.a.numerator) / f.a.denominator * t + mpmath.mpf(f.b.numerator) / f.b.denominator


def brute_convergents(quotients, n):
    """p_i/q_i for i <= n straight from the Fraction value of [0; a1..ai]."""
    out = [(0, 1)]
    for i in range(1, n + 1):
        x = Fraction(0)
        for a in reversed(quotients[:i]):
            x = 1 / (a + x)
        out.append((x.numerator, x.denominator))
    return out


@pytest.fixture(params=[GOLDEN, SILVER, LINEAR30, BIG_QUOTIENT])
def theta(request):
    return ThetaSpec.parse(request.param)
