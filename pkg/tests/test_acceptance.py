"""The eight acceptance criteria, one test each.

Each test prints a single ``ACCEPTANCE <k> PASS|FAIL`` line.  Running this
file directly (``python3 tests/test_acceptance.py``) prints the same lines
without pytest.
"""

import json
import os
import random
import subprocess
import sys
import tempfile
import time
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import ACCEPTANCE_THETAS, BIG_QUOTIENT, GOLDEN, SILVER  # noqa: E402
from schmidt import contfrac as cf  # noqa: E402
from schmidt.adversaries import GreedyOrbitBlack, RandomBlack  # noqa: E402
from schmidt.cli import main as cli_main  # noqa: E402
from schmidt.game import GameConfig, dumps, loads, run_game  # noqa: E402
from schmidt.strategy import DodgeTask, DodgeWhite, build_dodge_set, build_white, dodge_move, lemma_window  # noqa: E402
from schmidt.theta import ThetaSpec, ball, bracket, interval_contains, intervals_disjoint, orbit_point  # noqa: E402
from schmidt.verifier import (  # noqa: E402
    certificate_constant,
    check_certificate,
    check_delta_sandwich,
    check_lemma_circle_mult,
    check_spacing,
    default_scan_cap,
)

ALPHA = Fraction(1, 8)
BETAS = (Fraction(1, 5), Fraction(1, 2), Fraction(4, 5))
RADII = (Fraction(1, 4), Fraction(1, 8), Fraction(1, 16))
NAMES = {GOLDEN: "golden", SILVER: "silver", ACCEPTANCE_THETAS[2]: "cf:[1..30]"}


def adversaries():
    return [(f"random({s})", lambda s=s: RandomBlack(s)) for s in range(1, 6)] + [
        ("greedy_orbit(2)", lambda: GreedyOrbitBlack(2))
    ]


def config(theta, beta, rounds=40):
    return GameConfig(ALPHA, beta, theta, rounds, ball(Fraction(1, 2), Fraction(1, 2), theta))


_RUNS = {}


def grid_runs(thetas):
    """Every (theta, beta, adversary) game of the end-to-end grid, memoized."""
    out = []
    for text in thetas:
        th = ThetaSpec.parse(text)
        for beta in BETAS:
            for name, make in adversaries():
                key = (text, beta, name)
                if key not in _RUNS:
                    _RUNS[key] = run_game(make(), DodgeWhite(), config(th, beta), meta={"adversary": name})
                out.append((key, _RUNS[key]))
    return out


def report(k, ok, detail):
    line = f"ACCEPTANCE {k} {'PASS' if ok else 'FAIL'}: {detail}"
    print(line, flush=True)
    return line


@pytest.fixture
def say(capsys):
    def _say(k, ok, detail):
        with capsys.disabled():
            print()
            report(k, ok, detail)

    return _say


# 1 -----------------------------------------------------------------------


def criterion_1():
    t0 = time.time()
    bad = []
    runs = grid_runs(ACCEPTANCE_THETAS)
    for (text, beta, name), tr in runs:
        (claim,) = tr.claims
        want = (ALPHA * beta / 4) ** 3
        v = check_certificate(claim.certificate(tr.final))
        if len(tr.moves) != 80 or tr.moves[-1].round != 40 or claim.c != want or not v.verified or claim.q_hi <= claim.q_lo:
            bad.append((text, str(beta), name, v.to_json()))
    c_half = certificate_constant(ALPHA, Fraction(1, 2))
    ok = not bad and c_half == Fraction(1, 262144)
    return ok, f"{len(runs)} games of 40 rounds, all certificates verified, c(1/2)={c_half}, {time.time() - t0:.1f}s" if ok else f"failures: {bad[:3]}"


def test_criterion_1_end_to_end(say):
    ok, detail = criterion_1()
    say(1, ok, detail)
    assert ok, detail


# 2 -----------------------------------------------------------------------


def criterion_2():
    bad, spacing_checked = [], 0
    for text in ACCEPTANCE_THETAS:
        th = ThetaSpec.parse(text)
        for i in range(1, 26):
            if not check_delta_sandwich(th, i):
                bad.append((text, "sandwich", i))
        i = 1
        while th.convergent(i)[1] <= 5000:
            bound, attained = check_spacing(th, i)
            spacing_checked += 1
            if not (bound and attained):
                bad.append((text, "spacing", i, bound, attained))
            i += 1
    return not bad, f"sandwich i<=25 and {spacing_checked} spacing scans (q_i<=5000) exact" if not bad else f"failures: {bad}"


def test_criterion_2_fact_battery(say):
    ok, detail = criterion_2()
    say(2, ok, detail)
    assert ok, detail


# 3 -----------------------------------------------------------------------


# brute force over [q_{i+1}, q_{i+2}) needs the whole base orbit of q_{i+1} points in memory
LEMMA_DESK_CAP = 10**8


def criterion_3():
    """Returns (ok, detail, scanned_ok): scanned_ok covers what was actually run."""
    bad, done, missing = [], 0, {}
    for text in ACCEPTANCE_THETAS:
        th = ThetaSpec.parse(text)
        first = 0 if th.quotient(1) >= 2 else 1
        for i in range(first, 13):
            if th.convergent(i + 2)[1] > LEMMA_DESK_CAP:
                missing.setdefault(NAMES[text], []).append(i)
                continue
            for r in RADII:
                res = check_lemma_circle_mult(th, i, r)
                done += 1
                if not (res["pass"] and res["lemma"] and res["decomposition_agrees"]):
                    bad.append((text, i, str(r), res))
    detail = f"{done} (theta, i, r) scans passed, direct and decomposition verdicts agree"
    if bad:
        detail = f"failures: {bad[:2]}"
    if missing:
        gaps = "; ".join(f"{t} i={min(v)}..{max(v)}" for t, v in missing.items())
        detail += f"; NOT COVERED (q_{{i+2}} over desk cap {LEMMA_DESK_CAP:.0e}): {gaps}"
    return not bad and not missing, detail, not bad


def test_criterion_3_lemma_oracle(say):
    ok, detail, scanned_ok = criterion_3()
    say(3, ok, detail)
    assert scanned_ok, detail


@pytest.mark.xfail(run=False, strict=True, reason="cf:[1..30] at i >= 10 needs a base orbit of 8e7 to 1.3e10 points")
def test_criterion_3_full_depth_linear30():
    th = ThetaSpec.parse(ACCEPTANCE_THETAS[2])
    for i in range(10, 13):
        for r in RADII:
            assert check_lemma_circle_mult(th, i, r)["pass"]


# 4 -----------------------------------------------------------------------


def criterion_4():
    bad, total = [], 0
    c = certificate_constant(ALPHA, Fraction(1, 2))
    s = ALPHA * Fraction(1, 2)
    for text in ACCEPTANCE_THETAS + [BIG_QUOTIENT]:
        th = ThetaSpec.parse(text)
        rng = random.Random(f"acceptance-4:{text}")
        top = min(12, cf.max_generation_within(th, 10**6))
        for _ in range(100):
            k = rng.randint(1, top)
            d = cf.delta(th, k).value
            _, lo = bracket(d * s, th, Fraction(1, 2**90))
            hi, _ = bracket(d, th, Fraction(1, 2**90))
            rho = (lo + (hi - lo) * Fraction(rng.randint(1, 2**20), 2**20)) / 2
            assert lemma_window(th, s, k, rho)
            # adversarial: centered on (or just beside) an orbit point of a dodged generation
            q = rng.randrange(0, cf.generation_end(th, k))
            jitter = Fraction(rng.randint(-2**10, 2**10), 2**12) * rho
            B = ball(orbit_point(q, th).rep + jitter, rho, th)
            ds = build_dodge_set(th, B, DodgeTask(0, k, k), s, c, None, 10**6)
            W = dodge_move(B, ALPHA, ds, th)  # NoGapError would propagate
            total += 1
            if W.radius != ALPHA * rho or not interval_contains(B, W, th):
                bad.append((text, k, "illegal"))
            if not all(intervals_disjoint(W, ob, th) for ob in ds.obstacles()):
                bad.append((text, k, "overlap"))
    return not bad, f"{total} adversarial placements, every dodge ball exactly disjoint" if not bad else f"failures: {bad[:3]}"


def test_criterion_4_dodge_soundness(say):
    ok, detail = criterion_4()
    say(4, ok, detail)
    assert ok, detail


# 5 -----------------------------------------------------------------------


def criterion_5():
    # strategy errors (including the contradiction branch) would raise inside run_game
    notes = [m.note for _, tr in grid_runs(ACCEPTANCE_THETAS + [BIG_QUOTIENT]) for m in tr.moves]
    seen = {n.split("case=")[1][0] for n in notes if "case=" in n}
    a_hits = sum("case=A" in n for n in notes)
    b_hits = sum("case=B" in n for n in notes)
    ok = seen == {"A", "B"}
    return ok, f"case=A x{a_hits}, case=B x{b_hits} across {len(_RUNS)} games; contradiction branch never reached"


def test_criterion_5_case_coverage(say):
    ok, detail = criterion_5()
    say(5, ok, detail)
    assert ok, detail


# 6 -----------------------------------------------------------------------


def criterion_6():
    th = ThetaSpec.parse(GOLDEN)
    results = []
    for name, make in (("random(1)", lambda: RandomBlack(1)), ("greedy_orbit(2)", lambda: GreedyOrbitBlack(2))):
        two = run_game(make(), build_white("two-sided"), config(th, Fraction(1, 2)))
        dual = run_game(
            GreedyOrbitBlack(2, rational=True) if "greedy" in name else make(),
            build_white("dodge", [GOLDEN, SILVER]),
            config(th, Fraction(1, 2)),
        )
        for label, tr in (("two-sided", two), ("two-theta", dual)):
            certs = tr.certificates()
            ok = len(certs) == 2 and all(check_certificate(c).verified and c.q_hi > c.q_lo for c in certs)
            results.append((label, name, ok, [(c.q_lo, c.q_hi) for c in certs]))
    ok = all(r[2] for r in results)
    return ok, "two-sided (x and -x) and cfper:[|1]+cfper:[|2] dovetails: " + "; ".join(f"{a}/{b}: {rng}" for a, b, _, rng in results)


def test_criterion_6_combinators(say):
    ok, detail = criterion_6()
    say(6, ok, detail)
    assert ok, detail


# 7 -----------------------------------------------------------------------


def _verify(path) -> int:
    import contextlib
    import io

    with contextlib.redirect_stdout(io.StringIO()):
        return cli_main(["verify", str(path)])


def criterion_7():
    th = ThetaSpec.parse(SILVER)
    tr = run_game(RandomBlack(2), DodgeWhite(), config(th, Fraction(1, 2)), meta={"white": {"kind": "dodge", "thetas": [SILVER], "scan_cap": default_scan_cap()}})
    text = dumps(tr)
    bad = []
    if dumps(loads(text)) != text:
        bad.append("round trip not bit-exact")
    amounts = [Fraction(1, 10**9), Fraction(-1, 10**40), Fraction(3, 7), Fraction(1)]
    with tempfile.TemporaryDirectory() as d:
        p = Path(d) / "t.json"
        p.write_text(text)
        if _verify(p) != 0:
            bad.append("unperturbed transcript fails verify")
        doc = json.loads(text)
        tried = 0
        for k in range(len(doc["moves"])):
            for field in ("radius", "center.a", "center.b"):
                for amt in amounts:
                    mod = json.loads(text)
                    m = mod["moves"][k]
                    if field == "radius":
                        m["radius"] = str(Fraction(m["radius"]) + amt * Fraction(m["radius"]))
                    else:
                        key = field.split(".")[1]
                        m["center"][key] = str(Fraction(m["center"][key]) + amt)
                    p.write_text(json.dumps(mod))
                    tried += 1
                    if _verify(p) == 0:
                        bad.append((k, field, str(amt)))
    ok = not bad
    return ok, f"{tried} single-field perturbations all rejected (exit 3); unperturbed round trip bit-exact" if ok else f"accepted: {bad[:5]}"


def test_criterion_7_referee_and_replay(say):
    ok, detail = criterion_7()
    say(7, ok, detail)
    assert ok, detail


# 8 -----------------------------------------------------------------------

_INDEPENDENT = r"""
import json, sys
from fractions import Fraction
from schmidt.theta import ThetaSpec, LinearForm, CirclePoint, CircleInterval, ball
from schmidt.verifier import Certificate, check_certificate, certificate_constant
out = []
for path in sys.argv[1:]:
    doc = json.load(open(path))
    last = doc["moves"][-1]
    center = LinearForm(Fraction(last["center"]["a"]), Fraction(last["center"]["b"]))
    for cl in doc["claims"]:
        th = ThetaSpec.parse(cl["theta"])
        off = LinearForm(Fraction(cl["offset"]["a"]), Fraction(cl["offset"]["b"]))
        W = ball(center.scale(int(cl["scale"])) + off, Fraction(last["radius"]), th)
        c = certificate_constant(Fraction(cl["alpha"]), Fraction(cl["beta"]))
        assert c == Fraction(cl["c"])
        v = check_certificate(Certificate(th, W, c, int(cl["q_lo"]), int(cl["q_hi"]), path))
        out.append(v.verified)
loaded = sorted(m for m in sys.modules if m.startswith("schmidt"))
print(json.dumps({"verdicts": out, "loaded": loaded}))
"""


def criterion_8():
    runs = grid_runs(ACCEPTANCE_THETAS)
    th = ThetaSpec.parse(GOLDEN)
    extra = run_game(RandomBlack(4), build_white("two-sided"), config(th, Fraction(1, 2)))
    with tempfile.TemporaryDirectory() as d:
        paths = []
        for n, (_, tr) in enumerate(runs + [(None, extra)]):
            p = Path(d) / f"run{n}.json"
            p.write_text(dumps(tr))
            paths.append(str(p))
        env = dict(os.environ)
        res = subprocess.run([sys.executable, "-c", _INDEPENDENT, *paths], capture_output=True, text=True, env=env, timeout=600)
    if res.returncode != 0:
        return False, f"subprocess failed: {res.stderr[-500:]}"
    rep = json.loads(res.stdout)
    allowed = {"schmidt", "schmidt.theta", "schmidt.contfrac", "schmidt.verifier", "schmidt.errors"}
    ok = all(rep["verdicts"]) and set(rep["loaded"]) <= allowed and "schmidt.strategy" not in rep["loaded"]
    return ok, f"{len(rep['verdicts'])} certificates re-verified in a fresh process that loaded only {', '.join(rep['loaded'])}"


def test_criterion_8_independent_oracle(say):
    ok, detail = criterion_8()
    say(8, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for k, fn in enumerate((criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8), 1):
        try:
            ok, detail = fn()[:2]
        except Exception as e:  # report and keep going
            ok, detail = False, f"{type(e).__name__}: {e}"
        report(k, ok, detail)
        failed += not ok
    sys.exit(1 if failed else 0)
