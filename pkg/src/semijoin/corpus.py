"""Databases and expressions from the expressiveness results, as constructors."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .errors import ValidationError
from .expr import Diff, Expression, Rel, Select, Semijoin
from .model import EQUALITY, ORDERED, Database, Vocabulary, active_domain, conj, eq, lt, neq, x, y


def figure1() -> tuple[Database, Database]:
    """T = R x S holds in A but not in B."""
    A = Database({
        "R": [("a",), ("b",)],
        "S": [(1,), (2,)],
        "T": [("a", 1), ("a", 2), ("b", 1), ("b", 2)],
    })
    B = Database({
        "R": [("a",), ("b",), ("c",)],
        "S": [(1,), (2,), (3,)],
        "T": [("a", 1), ("a", 2), ("b", 2), ("b", 3), ("c", 1), ("c", 3)],
    })
    return A, B


def figure2() -> tuple[Database, Database]:
    """T = R o S holds in A; in B neither inclusion holds."""
    A = Database({
        "R": [(1, "a"), (3, "b")],
        "S": [("a", 2), ("b", 4)],
        "T": [(1, 2), (3, 4)],
    })
    B = Database({
        "R": [(1, "a"), (3, "b")],
        "S": [("b", 2), ("a", 4)],
        "T": [(1, 2), (3, 4)],
    })
    return A, B


def cycle_db(k: int, vocab: Vocabulary = EQUALITY) -> Database:
    """The directed k-cycle 1 -> 2 -> ... -> k -> 1 as binary relation R."""
    if k < 1:
        raise ValidationError("cycle length must be positive")
    return Database({"R": [(i, i % k + 1) for i in range(1, k + 1)]}, {"R": 2}, vocab)


def disjoint_copies(D: Database, n: int) -> Database:
    """``n`` copies of ``D`` on pairwise disjoint fresh values."""
    if n < 1:
        raise ValidationError("need at least one copy")
    values = sorted(active_domain(D), key=lambda v: (isinstance(v, str), v))
    width = len(values)
    fresh = {(c, v): c * width + i + 1 for c in range(n) for i, v in enumerate(values)}
    rels = {
        name: [tuple(fresh[(c, v)] for v in t) for c in range(n) for t in D.relations[name]]
        for name in D.schema
    }
    return Database(rels, D.schema, D.vocab)


def _middle(m: int) -> int:
    if m < 3 or m % 2 == 0:
        raise ValidationError(f"m must be odd and at least 3, got {m}")
    return (m + 1) // 2


def ordered_product_dbs(m: int) -> tuple[Database, Database]:
    """R = {1..m}, S = {m+1..2m}, A(T) = R x S and B(T) misses one middle pair."""
    h = _middle(m)
    R = [(i,) for i in range(1, m + 1)]
    S = [(i,) for i in range(m + 1, 2 * m + 1)]
    T = [(r, s) for (r,) in R for (s,) in S]
    A = Database({"R": R, "S": S, "T": T}, vocab=ORDERED)
    B = Database({"R": R, "S": S, "T": [t for t in T if t != (h, m + h)]}, vocab=ORDERED)
    return A, B


def ordered_composition_dbs(m: int) -> tuple[Database, Database]:
    """R = {1..m} x {2m+1}, S = {2m+1} x {m+1..2m}, A(T) = R o S, B(T) misses one pair."""
    h = _middle(m)
    hub = 2 * m + 1
    R = [(i, hub) for i in range(1, m + 1)]
    S = [(hub, i) for i in range(m + 1, 2 * m + 1)]
    T = [(i, j) for i in range(1, m + 1) for j in range(m + 1, 2 * m + 1)]
    A = Database({"R": R, "S": S, "T": T}, vocab=ORDERED)
    B = Database({"R": R, "S": S, "T": [t for t in T if t != (h, m + h)]}, vocab=ORDERED)
    return A, B


def unary_db(k: int, ordered: bool = False) -> Database:
    """Unary relation S = {1..k}."""
    return Database({"S": [(i,) for i in range(1, k + 1)]}, {"S": 1}, ORDERED if ordered else EQUALITY)


# --------------------------------------------------------------------------
# expressions


def expr_path(k: int, name: str = "R") -> Expression:
    """Nonempty iff R has a (not necessarily simple) path of k edges."""
    if k < 1:
        raise ValidationError("path length must be positive")
    R = Rel(name, 2)
    e: Expression = R
    for _ in range(k - 1):
        e = Semijoin(eq(x(2), y(1)), R, e)
    return e


def expr_at_least(k: int, name: str = "S") -> Expression:
    """Nonempty iff unary S has at least k elements. Needs order."""
    if k < 1:
        raise ValidationError("k must be positive")
    S = Rel(name, 1)
    e: Expression = S
    for _ in range(k - 1):
        e = Semijoin(lt(x(1), y(1)), S, e)
    return e


def expr_simple_path2_literal(name: str = "R") -> Expression:
    """``R semijoin[x2=y1 & x2!=x1 & y2!=x2] R`` exactly as usually stated.

    Also accepts a 2-cycle ``u -> v -> u``, which is not a simple path.
    """
    R = Rel(name, 2)
    return Semijoin(conj(eq(x(2), y(1)), neq(x(2), x(1)), neq(y(2), x(2))), R, R)


def expr_simple_path2(name: str = "R") -> Expression:
    """Nonempty iff R has a path through three distinct vertices."""
    R = Rel(name, 2)
    cond = conj(eq(x(2), y(1)), neq(x(2), x(1)), neq(y(2), x(2)), neq(x(1), y(2)))
    return Semijoin(cond, R, R)


def expr_T_subset_RxS(p: int = 1, q: int = 1) -> Expression:
    """``T - ((T semijoin R) semijoin S)``: empty iff T is contained in R x S.

    T has arity p + q, R arity p, S arity q.
    """
    T, R, S = Rel("T", p + q), Rel("R", p), Rel("S", q)
    on_R = conj(*[eq(x(i), y(i)) for i in range(1, p + 1)])
    on_S = conj(*[eq(x(p + j), y(j)) for j in range(1, q + 1)])
    return Diff(T, Semijoin(on_S, Semijoin(on_R, T, R), S))


def expr_two_distinct(name: str = "S") -> Expression:
    S = Rel(name, 1)
    return Semijoin(neq(x(1), y(1)), S, S)


def expr_cycle(k: int, name: str = "R") -> Expression:
    """Nonempty iff R has a cycle of exactly k distinct vertices (k <= 2)."""
    R = Rel(name, 2)
    if k == 1:
        return Select(eq(x(1), x(2)), R)
    if k == 2:
        return Semijoin(conj(eq(x(1), y(2)), eq(x(2), y(1)), neq(x(1), x(2))), R, R)
    raise ValidationError("cycles of length 3 or more are not expressible")


# --------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class CorpusEntry:
    """A named database pair or expression, with the claim made about it.

    ``claim`` keys: ``kind`` is one of ``duplicator-infinite``,
    ``duplicator-rounds`` (with ``rounds``), ``spoiler`` or ``expressible``
    (with ``oracle`` naming a direct combinatorial check).
    """

    name: str
    build: Callable
    claim: dict = field(default_factory=dict)
    description: str = ""

    @property
    def is_pair(self) -> bool:
        return self.claim.get("kind") != "expressible"


def _entries() -> list[CorpusEntry]:
    out = [
        CorpusEntry("figure1", figure1, {"kind": "duplicator-infinite"},
                    "T = R x S in A, not in B"),
        CorpusEntry("figure2", figure2, {"kind": "duplicator-infinite"},
                    "T = R o S in A, neither inclusion in B"),
        CorpusEntry("cycles-3-4", lambda: (cycle_db(3), cycle_db(4)), {"kind": "spoiler"},
                    "D3 and D4 are distinguishable"),
        CorpusEntry("copies-3-vs-4", lambda: (disjoint_copies(cycle_db(3), 2), cycle_db(4)),
                    {"kind": "duplicator-infinite"},
                    "two disjoint 3-cycles vs one 4-cycle"),
    ]
    for k in (4, 5, 6):
        out.append(CorpusEntry(f"cycles-{k}-{k + 1}", lambda k=k: (cycle_db(k), cycle_db(k + 1)),
                               {"kind": "duplicator-infinite"}, f"D{k} vs D{k + 1}"))
    for k in (3, 4, 5):
        out.append(CorpusEntry(f"unary-2-{k}", lambda k=k: (unary_db(2), unary_db(k)),
                               {"kind": "duplicator-infinite"},
                               f"2 vs {k} elements, equality only"))
    out.append(CorpusEntry("unary-ordered-2-3", lambda: (unary_db(2, True), unary_db(3, True)),
                           {"kind": "spoiler"}, "2 vs 3 elements with order"))
    for n in (1, 2, 3):
        m = 2 * n + 1
        out.append(CorpusEntry(f"ordered-product-m{m}", lambda m=m: ordered_product_dbs(m),
                               {"kind": "duplicator-rounds", "rounds": n},
                               f"R x S subset of T, ordered, m={m}"))
        out.append(CorpusEntry(f"ordered-composition-m{m}", lambda m=m: ordered_composition_dbs(m),
                               {"kind": "duplicator-rounds", "rounds": n},
                               f"R o S subset of T, ordered, m={m}"))
    for k in (1, 2, 3, 4):
        out.append(CorpusEntry(f"path-{k}", lambda k=k: expr_path(k),
                               {"kind": "expressible", "oracle": "has_path", "k": k}))
    for k in (1, 2, 3, 4, 5):
        out.append(CorpusEntry(f"at-least-{k}", lambda k=k: expr_at_least(k),
                               {"kind": "expressible", "oracle": "count_at_least", "k": k}))
    out += [
        CorpusEntry("simple-path-2", expr_simple_path2,
                    {"kind": "expressible", "oracle": "has_simple_path", "k": 2}),
        CorpusEntry("T-subset-RxS", expr_T_subset_RxS,
                    {"kind": "expressible", "oracle": "within_cartesian"}),
        CorpusEntry("two-distinct", expr_two_distinct,
                    {"kind": "expressible", "oracle": "count_at_least", "k": 2}),
        CorpusEntry("cycle-1", lambda: expr_cycle(1),
                    {"kind": "expressible", "oracle": "has_cycle", "k": 1}),
        CorpusEntry("cycle-2", lambda: expr_cycle(2),
                    {"kind": "expressible", "oracle": "has_cycle", "k": 2}),
    ]
    return out


CORPUS: dict[str, CorpusEntry] = {e.name: e for e in _entries()}


def entry(name: str) -> CorpusEntry:
    try:
        return CORPUS[name]
    except KeyError:
        raise KeyError(f"unknown corpus entry {name!r}") from None
