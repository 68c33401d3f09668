"""Command-line front end.

Exit codes: 0 success, 1 bad input, 2 refuted certificate or failed battery,
3 invalid move / forfeit / divergence, 4 scan cap or quotient stream exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import contfrac as cf
from .errors import (
    ConfigMismatch,
    DivergenceError,
    ForfeitError,
    RationalThetaError,
    ScanCapExceeded,
    SchmidtError,
    StreamExhausted,
)
from .game import GameConfig, ball_to_json, dumps, loads, moves_digest, transcript_to_json, validate_transcript
from .theta import LinearForm, ThetaSpec, ball
from .verifier import check_certificate, default_scan_cap, run_fact_battery

EXIT_OK, EXIT_INPUT, EXIT_REFUTED, EXIT_INVALID, EXIT_CAP = 0, 1, 2, 3, 4


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _emit(obj) -> None:
    print(json.dumps(obj, indent=1, sort_keys=True))


def rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational p/q, got {text!r}") from None


def theta_arg(text: str) -> ThetaSpec:
    try:
        return ThetaSpec.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def initial_arg(text: str) -> tuple:
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected center:radius, got {text!r}")
    return rational(parts[0]), rational(parts[1])


def _cap(args) -> int:
    return args.scan_cap if args.scan_cap is not None else default_scan_cap()


# -- play -------------------------------------------------------------------


def _white(meta: dict, scan_cap: int):
    from .strategy import build_white

    return build_white(meta["kind"], meta.get("thetas"), scan_cap)


def _certificates_json(tr, scan_cap: int) -> tuple[list, bool]:
    out, ok = [], True
    for cl, cert in zip(tr.claims, tr.certificates()):
        v = check_certificate(cert, scan_cap)
        ok = ok and v.verified
        out.append(
            {
                "label": cl.label,
                "theta": str(cl.theta),
                "W_final": ball_to_json(cert.W_final),
                "empty_range": cert.q_hi <= cert.q_lo,
                **v.to_json(),
            }
        )
    return out, ok


def cmd_play(args) -> int:
    from .adversaries import AdversarySpec, build_black
    from .game import run_game

    cap = _cap(args)
    thetas = [args.theta]
    if args.thetas:
        thetas = [theta_arg(t) for t in args.thetas.split(",")]
    theta = thetas[0]
    center, radius = args.initial
    cfg = GameConfig(args.alpha, args.beta, theta, args.rounds, ball(LinearForm.const(center), radius, theta))
    spec = AdversarySpec(args.adversary, seed=args.seed, source=args.source, lookahead_generations=args.lookahead)
    recorded = None
    if spec.kind == "replay":
        if not args.source:
            raise InputError("--adversary replay needs --source")
        recorded = loads(Path(args.source).read_text())
    if spec.kind == "scripted":
        if not args.script:
            raise InputError("--adversary scripted needs --script")
        spec = AdversarySpec.from_json({"kind": "scripted", "moves": json.loads(Path(args.script).read_text())})
    white_meta = {
        "kind": "two-sided" if args.two_sided else "dodge",
        "thetas": [str(t) for t in thetas],
        "scan_cap": cap,
    }
    mixed = len(set(thetas)) > 1
    black = build_black(spec, cap, recorded, rational=mixed)
    meta = {"white": white_meta, "adversary": spec.to_json()}
    tr = run_game(black, _white(white_meta, cap), cfg, args.seed, meta)
    Path(args.out).write_text(dumps(tr))
    certs, ok = _certificates_json(tr, cap)
    cert_path = args.cert or str(Path(args.out).with_suffix(".cert.json"))
    Path(cert_path).write_text(json.dumps(certs, indent=1, sort_keys=True) + "\n")
    cases = sorted({n.split("case=")[1][0] for n in (m.note for m in tr.moves) if "case=" in n})
    _emit({"transcript": args.out, "certificates": certs, "cases": cases, "status": "verified" if ok else "refuted"})
    return EXIT_OK if ok else EXIT_REFUTED


# -- verify -----------------------------------------------------------------


def cmd_verify(args) -> int:
    cap = _cap(args)
    raw = json.loads(Path(args.path).read_text())
    tr = loads(json.dumps(raw))
    report = {"path": args.path}
    stored = raw.get("digest")
    moves = transcript_to_json(tr)["moves"]
    if stored is not None and stored != moves_digest(moves):
        report.update(status="invalid", law="integrity", detail="moves do not match the stored digest")
        _emit(report)
        return EXIT_INVALID
    bad = validate_transcript(tr)
    if bad is not None:
        k, v = bad
        m = tr.moves[k]
        report.update(status="invalid", move=k, mover=m.mover, round=m.round, law=v.law, detail=v.detail)
        _emit(report)
        return EXIT_INVALID
    certs, ok = _certificates_json(tr, cap)
    report["certificates"] = certs
    if not ok:
        first = next(c for c in certs if c["verdict"] == "refuted")
        report.update(status="refuted", q=first["q"])
        _emit(report)
        return EXIT_REFUTED
    white = tr.meta.get("white") if isinstance(tr.meta, dict) else None
    if white and not args.no_replay:
        from .adversaries import ReplayBlack
        from .game import run_game

        w = _white(white, int(white.get("scan_cap", cap)))
        live = run_game(ReplayBlack(tr), w, tr.config, tr.seed, tr.meta)
        if transcript_to_json(live) != transcript_to_json(tr):
            rnd = next(
                (a.round for a, b in zip(live.moves, tr.moves) if (a.ball, a.note) != (b.ball, b.note)),
                live.moves[-1].round,
            )
            report.update(status="invalid", law="replay", round=rnd, detail="White's moves or claims differ from a fresh run")
            _emit(report)
            return EXIT_INVALID
        report["replayed"] = True
    report["status"] = "verified"
    _emit(report)
    return EXIT_OK


# -- replay -----------------------------------------------------------------


def cmd_replay(args) -> int:
    from .adversaries import ReplayBlack
    from .game import run_game

    tr = loads(Path(args.path).read_text())
    cap = _cap(args)
    white = dict(tr.meta.get("white") or {"kind": "dodge", "thetas": [str(tr.config.theta)]})
    if args.white:
        white["kind"] = args.white
    live = run_game(ReplayBlack(tr), _white(white, cap), tr.config, tr.seed, tr.meta)
    same = dumps(live) == dumps(tr)
    if args.out:
        Path(args.out).write_text(dumps(live))
    _emit({"path": args.path, "identical": same})
    return EXIT_OK if same else EXIT_INVALID


# -- facts / lemmas ---------------------------------------------------------


def cmd_facts(args) -> int:
    rows = cf.facts_table(args.theta, args.depth, args.digits)
    if args.json:
        _emit([{k: str(v) if isinstance(v, Fraction) else v for k, v in r.items()} for r in rows])
        return EXIT_OK
    print(f"theta = {args.theta}")
    print(f"{'i':>3} {'a_i':>5} {'p_i':>14} {'q_i':>14}  Delta_i")
    for r in rows:
        print(f"{r['i']:>3} {r['a']:>5} {r['p']:>14} {r['q']:>14}  {r['delta']}")
    return EXIT_OK


def cmd_lemmas(args) -> int:
    rep = run_fact_battery(args.theta, args.depth, _cap(args))
    if args.json:
        _emit(rep.to_json())
    else:
        counts = {}
        for chk in rep.checks:
            n, bad = counts.get(chk["fact"], (0, 0))
            counts[chk["fact"]] = (n + 1, bad + (not chk["pass"]))
        print(f"theta = {args.theta}, depth {args.depth}")
        for fact, (n, bad) in counts.items():
            print(f"  {fact:<20} {n - bad}/{n} pass")
        for f in rep.failures():
            print(f"  FAIL {f}")
        print("all pass" if rep.all_pass else "FAILURES")
    return EXIT_OK if rep.all_pass else EXIT_REFUTED


# -- entry ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="schmidt", description="Exact Schmidt games on the circle against the orbit of theta.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def caps(sp):
        sp.add_argument("--scan-cap", type=int, default=None, help="orbit scan cap (default 10^6 or $SCHMIDT_SCAN_CAP)")

    pl = sub.add_parser("play", help="play one game and certify the outcome")
    pl.add_argument("--theta", type=theta_arg, default=ThetaSpec.parse("cfper:[|1]"))
    pl.add_argument("--thetas", default=None, help="comma separated; dovetails one strategy per theta")
    pl.add_argument("--alpha", type=rational, default=Fraction(1, 8))
    pl.add_argument("--beta", type=rational, required=True)
    pl.add_argument("--rounds", type=int, default=40)
    pl.add_argument("--adversary", default="random", choices=["random", "greedy_orbit", "replay", "scripted"])
    pl.add_argument("--seed", type=int, default=0)
    pl.add_argument("--lookahead", type=int, default=2)
    pl.add_argument("--source", default=None, help="transcript to replay Black from")
    pl.add_argument("--script", default=None, help="JSON list of Black balls")
    pl.add_argument("--initial", type=initial_arg, default=(Fraction(1, 2), Fraction(1, 2)), help="center:radius")
    pl.add_argument("--two-sided", action="store_true")
    pl.add_argument("--out", default="transcript.json")
    pl.add_argument("--cert", default=None)
    caps(pl)
    pl.set_defaults(func=cmd_play)

    v = sub.add_parser("verify", help="referee, certify and replay a stored transcript")
    v.add_argument("path")
    v.add_argument("--no-replay", action="store_true")
    caps(v)
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("facts", help="continued fraction table")
    f.add_argument("--theta", type=theta_arg, required=True)
    f.add_argument("--depth", type=int, default=10)
    f.add_argument("--digits", type=int, default=30)
    f.add_argument("--json", action="store_true")
    f.set_defaults(func=cmd_facts)

    lm = sub.add_parser("lemmas", help="run the fact and lemma battery")
    lm.add_argument("--theta", type=theta_arg, required=True)
    lm.add_argument("--depth", type=int, default=12)
    lm.add_argument("--json", action="store_true")
    caps(lm)
    lm.set_defaults(func=cmd_lemmas)

    r = sub.add_parser("replay", help="re-run White against a transcript's Black moves")
    r.add_argument("path")
    r.add_argument("--white", choices=["dodge", "two-sided"], default=None)
    r.add_argument("--out", default=None)
    caps(r)
    r.set_defaults(func=cmd_replay)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (InputError, RationalThetaError, ConfigMismatch, json.JSONDecodeError, OSError, ValueError, KeyError) as e:
        _emit({"error": "input", "detail": str(e)})
        return EXIT_INPUT
    except ForfeitError as e:
        _emit({"error": "forfeit", "player": e.player, "round": e.round, "law": e.violation.law, "detail": str(e)})
        return EXIT_INVALID
    except DivergenceError as e:
        _emit({"error": "divergence", "round": e.round, "detail": str(e)})
        return EXIT_INVALID
    except ScanCapExceeded as e:
        _emit({"error": "scan-cap", "needed": e.needed, "cap": e.cap, "detail": str(e)})
        return EXIT_CAP
    except StreamExhausted as e:
        _emit({"error": "stream-exhausted", "needed": e.needed, "depth": e.depth, "detail": str(e)})
        return EXIT_CAP
    except SchmidtError as e:
        _emit({"error": type(e).__name__, "detail": str(e)})
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
