"""Command-line front end.

Exit codes: 0 success (or the checked claim holds), 1 the claim fails,
2 usage, parse or input errors.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Optional, TextIO

from .distinguisher import Budget, certify
from .errors import ParseError, SemijoinError
from .evaluator import evaluate
from .game import DUPLICATOR, LEFT, RIGHT, SPOILER, Configuration, SemijoinGame, game
from .model import Database
from .parser import parse_database, parse_expression, parse_tuple, render_database, render_expression, render_tuple

OK, CLAIM_FAILS, USAGE = 0, 1, 2


class CliError(Exception):
    """Reported as ``error: ...`` with exit code 2."""


def _rank_text(rank, machine: bool) -> str:
    if rank == math.inf:
        return "inf" if machine else "∞"
    return str(int(rank))


class Output:
    """Human text or stable ``key value`` lines."""

    def __init__(self, stream: TextIO, machine: bool):
        self.stream, self.machine = stream, machine

    def text(self, line: str = "") -> None:
        if not self.machine:
            print(line, file=self.stream)

    def field(self, key: str, value) -> None:
        if self.machine:
            print(f"{key} {value}", file=self.stream)


# --------------------------------------------------------------------------
# input helpers


def load_database(path: str) -> Database:
    try:
        src = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        return parse_database(src)
    except ParseError as exc:
        raise CliError(f"{path}: {exc}") from None


def load_pair(args) -> tuple[Database, Database]:
    if args.corpus:
        if args.left_db or args.right_db:
            raise CliError("give either two database files or --corpus, not both")
        from .corpus import CORPUS

        entry = CORPUS.get(args.corpus)
        if entry is None or not entry.is_pair:
            pairs = ", ".join(n for n, e in CORPUS.items() if e.is_pair)
            raise CliError(f"unknown database pair {args.corpus!r}; choose from: {pairs}")
        return entry.build()
    if not (args.left_db and args.right_db):
        raise CliError("two database files (or --corpus NAME) are required")
    return load_database(args.left_db), load_database(args.right_db)


def parse_position(text: str, g: SemijoinGame, side: str) -> tuple:
    try:
        t = parse_tuple(text)
    except ParseError as exc:
        raise CliError(f"bad tuple {text!r}: {exc}") from None
    if t not in g.index[side]:
        name = "A" if side == LEFT else "B"
        valid = " ".join(render_tuple(u) for u in g.positions[side])
        raise CliError(f"{render_tuple(t)} is not in the tuple space of {name}; valid tuples: {valid}")
    return t


# --------------------------------------------------------------------------
# commands


def cmd_eval(args, out: Output) -> int:
    D = load_database(args.database)
    if (args.expression is None) == (args.expr_file is None):
        raise CliError("give exactly one of an expression or --expr-file")
    if args.expr_file is not None:
        try:
            src = Path(args.expr_file).read_text()
        except OSError as exc:
            raise CliError(f"cannot read {args.expr_file}: {exc.strerror or exc}") from None
    else:
        src = args.expression
    try:
        e = parse_expression(src, D.schema, D.vocab)
    except ParseError as exc:
        raise CliError(f"expression: {exc}") from None
    result = evaluate(e, D)
    for t in result:
        out.text(render_tuple(t))
        out.field("tuple", render_tuple(t))
    out.field("arity", result.arity)
    out.field("count", len(result))
    if args.empty_check:
        return OK if result else CLAIM_FAILS
    return OK


def cmd_game(args, out: Output) -> int:
    A, B = load_pair(args)
    g = game(A, B)
    left = parse_position(args.left, g, LEFT)
    right = parse_position(args.right, g, RIGHT)
    rounds = _parse_rounds(args.rounds)
    if args.interactive:
        return play(g, Configuration(left, right), rounds, args.play, sys.stdin, out.stream)
    verdict = g.solve(left, right, rounds, certificate=args.strategy)
    # the exact survival rank, also when the duplicator wins a finite game
    rank = g.survival_rank(left, right)
    if verdict.winner == DUPLICATOR:
        out.text(f"duplicator, rank {_rank_text(rank, False)}")
    else:
        out.text(f"spoiler, rank {rank} (wins in {verdict.spoiler_rounds} round(s))")
    out.field("winner", verdict.winner)
    out.field("rank", _rank_text(rank, True))
    out.field("rounds", _rank_text(rounds, True))
    if args.strategy:
        if verdict.winner == SPOILER:
            lines = verdict.strategy.lines()
            out.text("strategy:")
        else:
            lines = [str(c) for c in sorted(verdict.strategy, key=lambda c: _cfg_key(g, c))]
            out.text(f"winning region ({len(lines)} configurations):")
        for line in lines:
            out.text(f"  {line}")
            out.field("strategy", line)
    if args.expect is not None:
        return OK if verdict.winner == args.expect else CLAIM_FAILS
    return OK


def _cfg_key(g: SemijoinGame, c: Configuration):
    return g.index[LEFT][c.left], g.index[RIGHT][c.right]


def _parse_rounds(text: str):
    if text in ("inf", "infinity", "∞"):
        return math.inf
    try:
        m = int(text)
    except ValueError:
        raise CliError(f"--rounds must be a non-negative integer or 'inf', got {text!r}") from None
    if m < 0:
        raise CliError("--rounds must be non-negative")
    return m


def cmd_distinguish(args, out: Output) -> int:
    A, B = load_pair(args)
    g = game(A, B)
    left = parse_position(args.left, g, LEFT)
    right = parse_position(args.right, g, RIGHT)
    cert = certify(A, B, left, right, Budget(args.max_rounds, args.max_types))
    if cert.distinguishable and args.expr_out:
        try:
            Path(args.expr_out).write_text(render_expression(cert.expression) + "\n")
        except OSError as exc:
            raise CliError(f"cannot write {args.expr_out}: {exc.strerror or exc}") from None
    out.text(cert.report(include_expression=not args.expr_out))
    out.field("distinguishable", str(cert.distinguishable).lower())
    if cert.distinguishable:
        out.field("rounds", cert.rounds)
        out.field("built-from", cert.built_from)
        if not args.expr_out:
            out.field("expression", render_expression(cert.expression))
        out.field("in-left", str(cert.in_left).lower())
        out.field("in-right", str(cert.in_right).lower())
    else:
        out.field("region-size", len(cert.region))
    if args.expect is not None:
        want = args.expect == "distinguishable"
        return OK if cert.distinguishable == want else CLAIM_FAILS
    return OK


def cmd_corpus(args, out: Output) -> int:
    from .corpus import CORPUS

    if args.action == "list":
        for name, entry in CORPUS.items():
            kind = entry.claim.get("kind", "")
            out.text(f"{name:<24} {kind:<20} {entry.description}".rstrip())
            out.field("entry", f"{name} {kind}")
        return OK
    if args.name is None:
        raise CliError("corpus emit needs an entry name")
    entry = CORPUS.get(args.name)
    if entry is None:
        raise CliError(f"unknown corpus entry {args.name!r}; see 'semijoin corpus list'")
    outdir = Path(args.out)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        if entry.is_pair:
            A, B = entry.build()
            files = {f"{entry.name}-A.db": render_database(A), f"{entry.name}-B.db": render_database(B)}
        else:
            files = {f"{entry.name}.sa": render_expression(entry.build()) + "\n"}
        for fname, text in files.items():
            (outdir / fname).write_text(text)
            out.text(f"wrote {outdir / fname}")
            out.field("wrote", outdir / fname)
    except OSError as exc:
        raise CliError(f"cannot write to {outdir}: {exc.strerror or exc}") from None
    return OK


def cmd_check(args, out: Output) -> int:
    from . import acceptance

    if args.suite == "paper":
        numbers = args.only or None
        unknown = sorted(set(numbers or ()) - set(acceptance.CHECKS))
        if unknown:
            raise CliError(f"no such check: {unknown}")
        results = []
        for n in sorted(numbers or acceptance.CHECKS):
            r = acceptance.CHECKS[n]()
            results.append(r)
            out.text(r.line())
            out.field("check", f"{r.number} {'pass' if r.passed else 'fail'} {r.seconds:.3f}")
    else:
        results = []
        for name in acceptance.CORPUS:
            r = acceptance.check_corpus_entry(name)
            results.append(r)
            status = "PASS" if r.passed else "FAIL"
            out.text(f"[{status}] {name}: {r.detail}")
            out.field("claim", f"{name} {'pass' if r.passed else 'fail'}")
    passed = sum(r.passed for r in results)
    out.text(f"{passed}/{len(results)} passed")
    out.field("passed", f"{passed}/{len(results)}")
    return OK if passed == len(results) else CLAIM_FAILS


# --------------------------------------------------------------------------
# interactive play


def play(g: SemijoinGame, cfg: Configuration, rounds, human: str, inp: TextIO, outp: TextIO) -> int:
    """Turn-based game; the engine takes the role the human does not."""

    def say(line: str = "") -> None:
        print(line, file=outp, flush=True)

    def ask(prompt: str) -> Optional[str]:
        outp.write(prompt)
        outp.flush()
        line = inp.readline()
        if not line:
            say()
            return None
        line = line.strip()
        return None if line in ("quit", "exit") else line

    say(f"You play the {human}; tuples are written like (a,1), the empty tuple as ().")
    if not g.win0(cfg.left, cfg.right):
        say(f"start {cfg}: the 0-round conditions fail, so the spoiler wins.")
        return OK
    played = 0
    while True:
        say(f"round {played + 1}, configuration {cfg}")
        if played >= rounds:
            say(f"the duplicator survived {played} round(s) and wins.")
            return OK
        if human == SPOILER:
            move = _read_spoiler_move(g, ask, say)
            if move is None:
                say("game abandoned.")
                return OK
            side, c = move
            answer = g.best_duplicator_move(cfg, side, c)
            if answer is None:
                say(f"the duplicator has no legal answer to {render_tuple(c)}: you win.")
                return OK
            say(f"duplicator answers {render_tuple(answer)}")
        else:
            side, c = g.engine_spoiler_move(cfg)
            say(f"spoiler plays {render_tuple(c)} on the {side}")
            legal = g.legal_answers(cfg, side, c)
            if not legal:
                say("you have no legal answer: the spoiler wins.")
                return OK
            answer = _read_answer(legal, ask, say)
            if answer is None:
                say("game abandoned.")
                return OK
        cfg = Configuration(c, answer) if side == LEFT else Configuration(answer, c)
        played += 1


def _read_spoiler_move(g: SemijoinGame, ask, say) -> Optional[tuple[str, tuple]]:
    while True:
        line = ask("spoiler> ")
        if line is None:
            return None
        side, _, rest = line.partition(" ")
        if side not in (LEFT, RIGHT):
            say("enter a move as 'left TUPLE' or 'right TUPLE' (or 'quit')")
            continue
        try:
            t = parse_tuple(rest)
        except ParseError as exc:
            say(f"bad tuple: {exc}")
            continue
        if t not in g.space[side]:
            say(f"illegal move; valid tuples on the {side}: " + " ".join(render_tuple(u) for u in g.space[side]))
            continue
        return side, t


def _read_answer(legal: list[tuple], ask, say) -> Optional[tuple]:
    while True:
        line = ask("duplicator> ")
        if line is None:
            return None
        try:
            t = parse_tuple(line)
        except ParseError as exc:
            say(f"bad tuple: {exc}")
            continue
        if t not in legal:
            say("illegal answer; legal answers: " + " ".join(render_tuple(u) for u in legal))
            continue
        return t


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--machine", action="store_true", help="stable 'key value' lines instead of prose")

    parser = argparse.ArgumentParser(prog="semijoin", description="Semijoin algebra workbench.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate an expression on a database")
    p.add_argument("database")
    p.add_argument("expression", nargs="?")
    p.add_argument("--expr-file")
    p.add_argument("--empty-check", action="store_true", help="exit 0 iff the result is nonempty")
    p.set_defaults(func=cmd_eval)

    def pair_args(p):
        p.add_argument("left_db", nargs="?", metavar="A")
        p.add_argument("right_db", nargs="?", metavar="B")
        p.add_argument("--corpus", metavar="NAME", help="use a corpus database pair instead of files")
        p.add_argument("--left", default="()", help="tuple in A, e.g. '(a,1)' (default '()')")
        p.add_argument("--right", default="()", help="tuple in B (default '()')")

    p = sub.add_parser("game", parents=[common], help="solve the semijoin game")
    pair_args(p)
    p.add_argument("--rounds", default="inf", help="number of rounds, or 'inf' (default)")
    p.add_argument("--strategy", action="store_true", help="print the winning strategy or region")
    p.add_argument("--expect", choices=[SPOILER, DUPLICATOR], help="exit 1 unless this player wins")
    p.add_argument("--interactive", action="store_true", help="play against the engine")
    p.add_argument("--play", choices=[SPOILER, DUPLICATOR], default=SPOILER, help="your role when interactive")
    p.set_defaults(func=cmd_game)

    p = sub.add_parser("distinguish", parents=[common], help="separating expression or certificate")
    pair_args(p)
    p.add_argument("--max-rounds", type=int, default=Budget.max_rounds)
    p.add_argument("--max-types", type=int, default=Budget.max_types)
    p.add_argument("--expr-out", metavar="FILE", help="write the expression here instead of printing it")
    p.add_argument("--expect", choices=["distinguishable", "indistinguishable"])
    p.set_defaults(func=cmd_distinguish)

    p = sub.add_parser("corpus", parents=[common], help="list or export corpus entries")
    p.add_argument("action", choices=["list", "emit"])
    p.add_argument("name", nargs="?")
    p.add_argument("--out", default=".", help="output directory for emit")
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("check", parents=[common], help="run the acceptance suite")
    p.add_argument("--suite", choices=["paper", "corpus"], default="paper")
    p.add_argument("--only", type=int, nargs="+", metavar="N", help="run only these numbered checks")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    out = Output(sys.stdout, args.machine)
    try:
        return args.func(args, out)
    except (CliError, SemijoinError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
