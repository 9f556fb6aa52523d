"""The acceptance matrix: numbered claims, each checked against an oracle.

Every check returns a ``CheckResult``. A check passes only if its claim
holds and it finishes within its time limit (when it has one). Random
instances come from fixed seeds, so reruns are identical.
"""
from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Optional

from .corpus import (
    CORPUS,
    cycle_db,
    disjoint_copies,
    expr_at_least,
    expr_cycle,
    expr_path,
    expr_simple_path2,
    expr_T_subset_RxS,
    expr_two_distinct,
    figure1,
    figure2,
    ordered_composition_dbs,
    ordered_product_dbs,
    unary_db,
)
from .distinguisher import Synthesizer, certify, distinguishing_expression
from .evaluator import evaluate, is_empty
from .expr import Semijoin
from .game import DUPLICATOR, LEFT, RIGHT, SPOILER, Configuration, game, solve_finite, solve_infinite
from .model import EQUALITY, ORDERED, Database, Vocabulary, sorted_tuples
from .oracle import (
    EnumerationBounds,
    ExpressionClosure,
    cartesian_contains,
    composition,
    count_at_least,
    has_cycle,
    has_path,
    has_simple_path,
    random_condition,
    random_database,
    random_expression,
    random_pair,
    random_schema,
    within_cartesian,
)
from .parser import parse_database, parse_expression, render_database, render_expression


@dataclass
class CheckResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float
    limit: Optional[float] = None

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        limit = f" (limit {self.limit:g}s)" if self.limit is not None else ""
        return f"[{status}] {self.number:>2}. {self.title}: {self.detail} [{self.seconds:.2f}s{limit}]"


class _Tally:
    """Collects failures; keeps the first few messages."""

    def __init__(self):
        self.checked = 0
        self.failures: list[str] = []

    def expect(self, ok: bool, message: str) -> None:
        self.checked += 1
        if not ok:
            self.failures.append(message)

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self, what: str = "checks") -> str:
        if self.ok:
            return f"{self.checked} {what}, 0 violations"
        shown = "; ".join(self.failures[:3])
        return f"{len(self.failures)} of {self.checked} {what} failed: {shown}"


def _timed(number: int, title: str, limit: Optional[float], body: Callable[[], tuple[bool, str]]) -> CheckResult:
    game.cache_clear()
    start = time.perf_counter()
    try:
        ok, detail = body()
    except Exception as exc:  # a crash is a failed check, reported with its cause
        ok, detail = False, f"raised {type(exc).__name__}: {exc}"
    seconds = time.perf_counter() - start
    if limit is not None and seconds > limit:
        ok = False
        detail += f"; took {seconds:.1f}s, over the limit"
    return CheckResult(number, title, ok, detail, seconds, limit)


EMPTY = ()

# seeds for the random suites
PROPERTY_SEED = 20240601
QUERY_SEED = 7
STRUCTURE_SEED = 11
RELABEL_SEED = 13


# --------------------------------------------------------------------------
# 1-5: worked examples


def check_figure1() -> CheckResult:
    def body():
        A, B = figure1()
        t = _Tally()
        v = solve_infinite(A, B, EMPTY, EMPTY, certificate=False)
        t.expect(v.winner == DUPLICATOR, f"winner {v.winner}")
        t.expect(cartesian_contains(A["T"], A["R"], A["S"]), "A should satisfy T >= R x S")
        t.expect(not cartesian_contains(B["T"], B["R"], B["S"]), "B should violate T >= R x S")
        e = expr_T_subset_RxS()
        for name, D in (("A", A), ("B", B)):
            t.expect(within_cartesian(D["T"], D["R"], D["S"]), f"{name} should satisfy T <= R x S")
            t.expect(is_empty(e, D), f"containment expression nonempty on {name}")
        return t.ok, f"duplicator wins; T >= RxS in A only; T <= RxS expression empty on both ({t.summary()})"

    return _timed(1, "figure 1", 1.0, body)


def check_figure2() -> CheckResult:
    def body():
        A, B = figure2()
        t = _Tally()
        v = solve_infinite(A, B, EMPTY, EMPTY, certificate=False)
        t.expect(v.winner == DUPLICATOR, f"winner {v.winner}")
        t.expect(composition(A["R"], A["S"]) == A["T"], "A(T) should equal R o S")
        comp = composition(B["R"], B["S"])
        t.expect(not comp <= B["T"], "B: R o S should not be inside T")
        t.expect(not B["T"] <= comp, "B: T should not be inside R o S")
        return t.ok, f"duplicator wins; T = R o S in A, neither inclusion in B ({t.summary()})"

    return _timed(2, "figure 2", 1.0, body)


def check_cycles() -> CheckResult:
    def body():
        t = _Tally()
        for k in (4, 5, 6):
            v = solve_infinite(cycle_db(k), cycle_db(k + 1), EMPTY, EMPTY, certificate=False)
            t.expect(v.winner == DUPLICATOR, f"D{k} vs D{k + 1}: {v.winner}")
        copies, d4 = disjoint_copies(cycle_db(3), 2), cycle_db(4)
        v = solve_infinite(copies, d4, EMPTY, EMPTY, certificate=False)
        t.expect(v.winner == DUPLICATOR, f"two D3 vs D4: {v.winner}")
        d3 = cycle_db(3)
        positions = len(game(d3, d4).positions[LEFT]) * len(game(d3, d4).positions[RIGHT])
        v = solve_finite(d3, d4, EMPTY, EMPTY, positions, certificate=False)
        t.expect(v.winner == SPOILER, f"D3 vs D4: {v.winner}")
        r = v.spoiler_rounds
        if r is not None:
            e = distinguishing_expression(d3, EMPTY, r)
            t.expect(EMPTY in evaluate(e, d3), "E misses <> on D3")
            t.expect(EMPTY not in evaluate(e, d4), "E contains <> on D4")
        return t.ok, f"D3 vs D4 spoiler in {r} rounds (rank {v.rank}), separated by E^{r} ({t.summary()})"

    return _timed(3, "cycles", 5.0, body)


def check_cardinality() -> CheckResult:
    def body():
        t = _Tally()
        for k in (3, 4, 5):
            v = solve_infinite(unary_db(2), unary_db(k), EMPTY, EMPTY, certificate=False)
            t.expect(v.winner == DUPLICATOR, f"2 vs {k}: {v.winner}")
        pool = [1, 2, 3, 10, "a", "b", "z"]
        subsets = [c for n in range(0, 7) for c in combinations(pool, n)]
        for k in range(1, 6):
            e = expr_at_least(k)
            for values in subsets:
                D = Database({"S": [(v,) for v in values]}, {"S": 1}, ORDERED)
                t.expect(is_empty(e, D) == (len(values) < k), f"at_least({k}) on {values}")
        return t.ok, f"duplicator wins 2 vs 3,4,5; at_least(k) exact on all |S| <= 6 ({t.summary()})"

    return _timed(4, "cardinality", 1.0, body)


def check_ordered_games() -> CheckResult:
    def body():
        t = _Tally()
        tight = []
        for n in (1, 2, 3):
            m = 2 * n + 1
            for label, build in (("product", ordered_product_dbs), ("composition", ordered_composition_dbs)):
                A, B = build(m)
                v = solve_finite(A, B, EMPTY, EMPTY, n, certificate=False)
                t.expect(v.winner == DUPLICATOR, f"{label} m={m}: {v.winner}")
                after = solve_finite(A, B, EMPTY, EMPTY, n + 1, certificate=False).winner
                tight.append(after == SPOILER)
        note = "bound is tight in every case" if all(tight) else "bound not tight in some case"
        return t.ok, f"duplicator wins n rounds for n = 1,2,3 (both families); {note} ({t.summary()})"

    return _timed(5, "ordered games", 30.0, body)


# --------------------------------------------------------------------------
# 6-7: game/expression correspondence on random instances


def _relabel(rng: random.Random, D: Database, values: int) -> Database:
    """An isomorphic copy under a random injective renaming into ``1..values``."""
    from .model import active_domain

    dom = sorted_tuples((v,) for v in active_domain(D))
    image = rng.sample(range(1, values + 1), len(dom))
    rename = {v: w for (v,), w in zip(dom, image)}
    return Database({n: [tuple(rename[v] for v in t) for t in D[n]] for n in D.schema}, D.schema, D.vocab)


def _mutate(rng: random.Random, D: Database, values: int, max_tuples: int) -> Database:
    """Add or remove one tuple in one relation."""
    from itertools import product

    name = rng.choice(sorted(D.schema))
    rel = set(D[name])
    missing = [t for t in product(range(1, values + 1), repeat=D.schema[name]) if t not in rel]
    if rel and (rng.random() < 0.5 or len(rel) >= max_tuples or not missing):
        rel.remove(rng.choice(sorted_tuples(rel)))
    elif missing:
        rel.add(rng.choice(missing))
    rels = {n: (rel if n == name else D[n]) for n in D.schema}
    return Database(rels, D.schema, D.vocab)


def property_instances(count: int = 100, seed: int = PROPERTY_SEED) -> list[tuple[Database, Database]]:
    """Random pairs within the oracle bounds (4 values, 2 relations, arity 2, 4 tuples).

    A third are independent, a third are isomorphic copies, a third differ
    in one tuple, so that both players win plenty of positions.
    """
    rng = random.Random(seed)
    out = []
    for i in range(count):
        A, B = random_pair(rng)
        if i % 3 == 1:
            B = _relabel(rng, A, 4)
        elif i % 3 == 2:
            B = _mutate(rng, A, 4, 4)
        out.append((A, B))
    return out


def agreement_violations(A: Database, B: Database, max_rounds: int = 2) -> tuple[int, int, list[str]]:
    """Check: duplicator wins G_m => agreement on every expression up to depth m.

    Returns the number of won positions checked, the number of lost
    positions the enumeration separates (how much the oracle can see), and
    the violations.
    """
    g = game(A, B)
    closure = ExpressionClosure(A, B, EnumerationBounds(depth=max_rounds))
    checked, separated, bad = 0, 0, []
    for m in range(max_rounds + 1):
        left, right = closure.agreement_classes(m)
        won = g.region(m)
        for a in g.positions[LEFT]:
            for b in g.positions[RIGHT]:
                agree = len(a) == len(b) and left.get(a, 0) == right.get(b, 0)
                if Configuration(a, b) not in won:
                    separated += not agree
                    continue
                checked += 1
                if not agree:
                    sig = closure.separating(a, b, m)
                    witness = render_expression(closure.witness(sig)) if sig else "?"
                    bad.append(f"m={m} {Configuration(a, b)}: separated by {witness}")
    return checked, separated, bad


def check_agreement(instances=None) -> CheckResult:
    def body():
        pairs = instances if instances is not None else property_instances()
        checked, separated, bad = 0, 0, []
        for A, B in pairs:
            c, s, b = agreement_violations(A, B)
            checked += c
            separated += s
            bad.extend(b)
        detail = (
            f"{len(pairs)} instances, m = 0..2: {checked} duplicator-won positions agree, "
            f"{separated} spoiler-won positions separated, {len(bad)} violations"
        )
        if bad:
            detail += ": " + "; ".join(bad[:3])
        return not bad, detail

    return _timed(6, "duplicator wins G_m implies agreement to depth m", 300.0, body)


def synthesis_violations(A: Database, B: Database, max_rounds: Optional[int] = None) -> tuple[int, list[str]]:
    """E_a^r contains a, and contains b exactly when the duplicator survives r rounds; built on both sides."""
    g = game(A, B)
    g.compute()
    finite = [r for row in g._rank for r in row if r is not None and r != math.inf]
    top = max(finite, default=-1) + 1
    if max_rounds is not None:
        top = min(top, max_rounds)
    checked, bad = 0, []
    for here, there, side in ((A, B, LEFT), (B, A, RIGHT)):
        syn = Synthesizer(here)
        memo_here: dict = {}
        memo_there: dict = {}
        others = g.positions[RIGHT if side == LEFT else LEFT]
        for a in syn.space:
            for r in range(top + 1):
                e = syn.expression(a, r)
                checked += 1
                if a not in evaluate(e, here, memo_here, check=False):
                    bad.append(f"{side} {a} not in its own E^{r}")
                got = evaluate(e, there, memo_there, check=False)
                for b in others:
                    cfg = (a, b) if side == LEFT else (b, a)
                    wins = g.survival_rank(*cfg, r) >= r
                    if (b in got) != wins:
                        bad.append(f"{side} E^{r} for {a}: {b} membership {b in got}, duplicator wins {wins}")
    return checked, bad


def check_synthesis(instances=None) -> CheckResult:
    def body():
        pairs = instances if instances is not None else property_instances()
        checked, bad = 0, []
        for A, B in pairs:
            c, b = synthesis_violations(A, B)
            checked += c
            bad.extend(b)
        detail = f"{len(pairs)} instances, {checked} expressions E_a^r, {len(bad)} violations"
        if bad:
            detail += ": " + "; ".join(bad[:3])
        return not bad, detail

    return _timed(7, "E_a^r contains exactly the tuples surviving r rounds", None, body)


# --------------------------------------------------------------------------
# 8: expressible queries vs direct oracles


def _random_graph(rng: random.Random, values: list) -> list[tuple]:
    pool = [(u, v) for u in values for v in values]
    return rng.sample(pool, rng.randint(0, min(len(pool), 7)))


def _random_product_db(rng: random.Random, p: int, q: int) -> Database:
    """T drawn mostly from R x S so that both outcomes of the containment occur."""
    values = [1, 2, 3, "a", "b"]
    universe = lambda k: [tuple(rng.choice(values) for _ in range(k)) for _ in range(rng.randint(0, 3))]
    R, S = universe(p), universe(q)
    inside = [r + s for r in R for s in S]
    T = rng.sample(inside, rng.randint(0, len(inside)))
    if rng.random() < 0.5:
        T += universe(p + q)
    return Database({"T": T, "R": R, "S": S}, {"T": p + q, "R": p, "S": q})


def query_cases() -> list[tuple[str, Callable]]:
    """(label, instance builder -> (expression, database, oracle verdict))."""
    values = [1, 2, 3, 4, "a"]

    def graph(expr, oracle):
        def build(rng):
            D = Database({"R": _random_graph(rng, values[: rng.randint(1, 5)])}, {"R": 2})
            return expr, D, oracle(D["R"])
        return build

    def unary(expr, k):
        def build(rng):
            S = rng.sample(values, rng.randint(0, len(values)))
            D = Database({"S": [(v,) for v in S]}, {"S": 1})
            return expr, D, count_at_least(D["S"], k)
        return build

    def product_case(p, q):
        def build(rng):
            D = _random_product_db(rng, p, q)
            # the expression is empty exactly when T lies inside R x S
            return expr_T_subset_RxS(p, q), D, not within_cartesian(D["T"], D["R"], D["S"])
        return build

    cases = [(f"path({k})", graph(expr_path(k), lambda R, k=k: has_path(R, k))) for k in (1, 2, 3, 4)]
    cases += [
        ("simple-path-2", graph(expr_simple_path2(), lambda R: has_simple_path(R, 2))),
        ("T <= R x S", product_case(1, 1)),
        ("T <= R x S (2+2)", product_case(2, 2)),
        ("two-distinct", unary(expr_two_distinct(), 2)),
        ("cycle(1)", graph(expr_cycle(1), lambda R: has_cycle(R, 1))),
        ("cycle(2)", graph(expr_cycle(2), lambda R: has_cycle(R, 2))),
    ]
    return cases


def check_expressible(per_query: int = 250) -> CheckResult:
    def body():
        rng = random.Random(QUERY_SEED)
        t = _Tally()
        both = 0
        for label, build in query_cases():
            outcomes = set()
            for _ in range(per_query):
                e, D, expected = build(rng)
                outcomes.add(expected)
                t.expect((not is_empty(e, D)) == expected, f"{label} on {render_database(D).strip()!r}")
            both += len(outcomes) == 2
        cases = len(query_cases())
        return t.ok, f"{cases} queries x {per_query} databases, both outcomes seen for {both}; {t.summary('instances')}"

    return _timed(8, "expressible queries agree with direct oracles", None, body)


# --------------------------------------------------------------------------
# 9: structural properties


def check_structure(samples: int = 300) -> CheckResult:
    def body():
        rng = random.Random(STRUCTURE_SEED)
        size, chain, closure, trip = _Tally(), _Tally(), _Tally(), _Tally()
        for _ in range(samples):
            vocab = Vocabulary(order=rng.random() < 0.5)
            schema = random_schema(rng, 3, 3)
            D = random_database(rng, schema, vocab, values=4, max_tuples=5)
            left = random_expression(rng, schema, vocab, 2)
            right = random_expression(rng, schema, vocab, 2)
            e = Semijoin(random_condition(rng, left.arity, right.arity, vocab), left, right)
            got, base = evaluate(e, D).tuples, evaluate(left, D).tuples
            size.expect(len(got) <= len(base) and got <= base, f"{render_expression(e)}")
            for expr in (e, random_expression(rng, schema, vocab, 4)):
                text = render_expression(expr)
                trip.expect(parse_expression(text, schema, vocab) == expr, text)
            trip.expect(parse_database(render_database(D)) == D, render_database(D))
        for A, B in property_instances(60, STRUCTURE_SEED):
            g = game(A, B)
            g.compute()
            prev = g.region(0)
            m = 1
            while True:
                cur = g.region(m)
                chain.expect(cur <= prev, f"W_{m} not inside W_{m - 1}")
                if cur == prev:
                    chain.expect(cur == g.region(math.inf), f"W stops at {m - 1} but differs from fixpoint")
                    break
                prev, m = cur, m + 1
            for a in g.positions[LEFT]:
                for b in g.positions[RIGHT]:
                    cfg = Configuration(a, b)
                    for side, move in g.spoiler_moves():
                        for d in g.legal_answers(cfg, side, move):
                            succ = (move, d) if side == LEFT else (d, move)
                            closure.expect(g.win0(*succ), f"{cfg} -> {succ}")
        parts = [
            f"semijoin bound {size.summary()}",
            f"antitone chain {chain.summary()}",
            f"answer closure {closure.summary()}",
            f"round-trip {trip.summary()}",
        ]
        return all(t.ok for t in (size, chain, closure, trip)), "; ".join(parts)

    return _timed(9, "structural properties", None, body)


# --------------------------------------------------------------------------
# 10: order invariance of at_least(k)


def check_order_invariance(relabelings: int = 50) -> CheckResult:
    def body():
        rng = random.Random(RELABEL_SEED)
        labels = list(range(-20, 21)) + [f"v{i}" for i in range(20)]
        t = _Tally()
        instances = 0
        for n in range(0, 7):
            values = rng.sample(labels, n)
            for k in range(1, 6):
                instances += 1
                e = expr_at_least(k)
                D = Database({"S": [(v,) for v in values]}, {"S": 1}, ORDERED)
                reference = is_empty(e, D)
                t.expect(reference == (n < k), f"at_least({k}) on {values}")
                for _ in range(relabelings):
                    image = rng.sample(labels, n)
                    E = Database({"S": [(v,) for v in image]}, {"S": 1}, ORDERED)
                    t.expect(is_empty(e, E) == reference, f"at_least({k}) on {image}")
        return t.ok, f"{instances} instances x {relabelings} relabelings; {t.summary()}"

    return _timed(10, "at_least(k) is order-invariant", None, body)


CHECKS: dict[int, Callable[[], CheckResult]] = {
    1: check_figure1,
    2: check_figure2,
    3: check_cycles,
    4: check_cardinality,
    5: check_ordered_games,
    6: check_agreement,
    7: check_synthesis,
    8: check_expressible,
    9: check_structure,
    10: check_order_invariance,
}


def run_suite(numbers=None) -> list[CheckResult]:
    chosen = sorted(CHECKS) if numbers is None else sorted(numbers)
    return [CHECKS[n]() for n in chosen]


# --------------------------------------------------------------------------
# corpus claims


def check_corpus_entry(name: str) -> CheckResult:
    """Machine check of one corpus entry's recorded claim."""
    entry = CORPUS[name]
    claim = entry.claim

    def body():
        if not entry.is_pair:
            return _expressible_claim(entry)
        A, B = entry.build()
        kind = claim["kind"]
        if kind == "duplicator-infinite":
            v = solve_infinite(A, B, EMPTY, EMPTY, certificate=False)
            return v.winner == DUPLICATOR, f"{v.winner}, rank {v.rank}"
        if kind == "duplicator-rounds":
            v = solve_finite(A, B, EMPTY, EMPTY, claim["rounds"], certificate=False)
            return v.winner == DUPLICATOR, f"{v.winner} in {claim['rounds']} round(s)"
        cert = certify(A, B, EMPTY, EMPTY)
        ok = cert.distinguishable and cert.in_left != cert.in_right
        return ok, f"spoiler in {cert.rounds} round(s), expression separates: {ok}"

    return _timed(0, name, None, body)


def _expressible_claim(entry) -> tuple[bool, str]:
    oracle = {"has_path": has_path, "has_simple_path": has_simple_path, "has_cycle": has_cycle,
              "count_at_least": count_at_least}.get(entry.claim["oracle"])
    e = entry.build()
    rng = random.Random(QUERY_SEED)
    t = _Tally()
    for _ in range(200):
        if entry.claim["oracle"] == "within_cartesian":
            D = _random_product_db(rng, 1, 1)
            expected = not within_cartesian(D["T"], D["R"], D["S"])
        else:
            name, arity = next(iter(e_schema(e).items()))
            vocab = ORDERED if "at-least" in entry.name else EQUALITY
            if arity == 1:
                S = rng.sample([1, 2, 3, 4, 5, "a"], rng.randint(0, 6))
                D = Database({name: [(v,) for v in S]}, {name: 1}, vocab)
            else:
                D = Database({name: _random_graph(rng, [1, 2, 3, 4])}, {name: 2}, vocab)
            expected = oracle(D[name], entry.claim["k"])
        t.expect((not is_empty(e, D)) == expected, render_database(D).strip())
    return t.ok, t.summary("databases")


def e_schema(e) -> dict:
    from .expr import Rel, walk

    return {n.name: n.arity for n in walk(e) if isinstance(n, Rel)}


def run_corpus_suite() -> list[CheckResult]:
    return [check_corpus_entry(name) for name in CORPUS]


def format_table(results: list[CheckResult]) -> str:
    return "\n".join(r.line() for r in results)
