"""Brute-force ground truth.

Two independent routes to "which expressions separate a from b":

* ``enumerate_expressions`` streams syntactic expressions level by level up
  to a semijoin/projection nesting depth, to be evaluated one by one.
* ``ExpressionClosure`` computes the same family for one fixed pair of
  databases, but tracks only what each expression evaluates to on A and on
  B (as bitmasks over the tuple spaces). Expressions with equal results are
  interchangeable as sub-expressions, so this is exact for the bounds and
  far cheaper.

Plus direct combinatorial implementations of the queries from the
expressiveness table, written without the algebra.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from typing import Iterable, Iterator, Mapping, Optional

from .expr import Diff, Expression, Project, Rel, Select, Semijoin, Union, children
from .model import (
    And,
    Atom,
    Condition,
    Database,
    Not,
    Or,
    Var,
    Vocabulary,
    column_subsets,
    joint_atomic_type,
    atomic_type,
    project,
    sorted_tuples,
    tuple_space,
    type_key,
    type_patterns,
)


def sj_depth(e: Expression) -> int:
    """Largest number of semijoins and projections on a root-to-leaf path."""
    memo: dict[int, int] = {}

    def go(node) -> int:
        if id(node) in memo:
            return memo[id(node)]
        sub = max((go(c) for c in children(node)), default=0)
        d = sub + (1 if isinstance(node, (Semijoin, Project)) else 0)
        memo[id(node)] = d
        return d

    return go(e)


@dataclass(frozen=True)
class EnumerationBounds:
    """Bounds for expression enumeration.

    ``depth`` caps semijoin/projection nesting. ``max_leaves`` caps how many
    operands a union/difference combination takes at each level (1 disables
    combinations). Conditions are disjunctions of up to ``condition_terms``
    satisfiable atomic types.
    """

    depth: int = 1
    max_leaves: int = 2
    condition_terms: int = 1

    def __post_init__(self):
        if self.depth < 0 or self.max_leaves < 1 or self.condition_terms < 1:
            raise ValueError("bounds must be non-negative (leaves and terms at least 1)")
        if self.max_leaves > 2:
            raise ValueError("combinations of more than two operands are not enumerated")


@lru_cache(maxsize=None)
def condition_pool(n_left: int, n_right: int, vocab: Vocabulary, terms: int = 1) -> tuple:
    """Conditions as tuples of type patterns (read as a disjunction)."""
    pats = list(type_patterns(n_left + n_right, vocab))
    pool = []
    for k in range(1, terms + 1):
        pool.extend(combinations(pats, k))
    return tuple(pool)


def _pattern_condition(pats: tuple, n_left: int, vocab: Vocabulary):
    conds = [
        joint_atomic_type(p[:n_left], p[n_left:], vocab) if len(p) > n_left
        else atomic_type(p, vocab)
        for p in pats
    ]
    return conds[0] if len(conds) == 1 else Or(tuple(conds))


# --------------------------------------------------------------------------
# syntactic enumeration


def _canonical(e: Expression) -> Expression:
    if isinstance(e, Union):
        l, r = e.left, e.right
        if str(r) < str(l):
            return Union(r, l)
    return e


def enumerate_expressions(
    schema: Mapping[str, int], vocab: Vocabulary, bounds: EnumerationBounds
) -> Iterator[Expression]:
    """Yield every expression allowed by ``bounds``, shallowest levels first.

    Level 0 holds the relation names. Level d adds projections of level d-1
    expressions and semijoins ``E semijoin[theta] F`` (E un-combined, F any
    level d-1 expression). Each level is then closed under one selection and
    one union/difference of two operands. Duplicates are dropped structurally.
    """
    seen: set = set()

    def fresh(e: Expression) -> bool:
        e = _canonical(e)
        if e in seen:
            return False
        seen.add(e)
        return True

    def close(base: list[Expression]) -> tuple[list[Expression], list[Expression]]:
        q = list(base)
        for e in base:
            for pats in condition_pool(e.arity, 0, vocab, bounds.condition_terms):
                s = Select(_pattern_condition(pats, e.arity, vocab), e)
                if fresh(s):
                    q.append(s)
                    yield_buffer.append(s)
        level = list(q)
        if bounds.max_leaves >= 2:
            for e, f in product(q, repeat=2):
                if e.arity != f.arity:
                    continue
                for combo in (_canonical(Union(e, f)), Diff(e, f)):
                    if fresh(combo):
                        level.append(combo)
                        yield_buffer.append(combo)
        return q, level

    yield_buffer: list[Expression] = []
    base = [Rel(n, a) for n, a in schema.items()]
    for e in base:
        fresh(e)
        yield e
    q_prev, l_prev = close(base)
    yield from yield_buffer
    for _ in range(bounds.depth):
        yield_buffer = []
        new: list[Expression] = list(l_prev)
        for f in l_prev:
            for cols in column_subsets(f.arity):
                p = Project(cols, f)
                if fresh(p):
                    new.append(p)
                    yield_buffer.append(p)
        for e in q_prev:
            for f in l_prev:
                for pats in condition_pool(e.arity, f.arity, vocab, bounds.condition_terms):
                    s = Semijoin(_pattern_condition(pats, e.arity, vocab), e, f)
                    if fresh(s):
                        new.append(s)
                        yield_buffer.append(s)
        q_prev, l_prev = close(new)
        yield from yield_buffer


# --------------------------------------------------------------------------
# per-instance closure


class _Side:
    def __init__(self, D: Database, max_arity: int):
        self.D = D
        space = tuple_space(D)
        self.by_arity = {n: sorted_tuples(t for t in space if len(t) == n) for n in range(max_arity + 1)}
        self.index = {n: {t: i for i, t in enumerate(ts)} for n, ts in self.by_arity.items()}

    def mask(self, ts: Iterable[tuple], n: int) -> int:
        m = 0
        for t in ts:
            m |= 1 << self.index[n][t]
        return m

    def members(self, mask: int, n: int) -> list[tuple]:
        ts = self.by_arity[n]
        return [ts[i] for i in range(len(ts)) if mask >> i & 1]


class ExpressionClosure:
    """Everything the bounded enumeration can express on (A, B), by result.

    ``sigs`` maps ``(arity, mask_A, mask_B)`` to the nesting level where the
    result first appears; ``witness`` rebuilds one expression producing it.
    """

    def __init__(self, A: Database, B: Database, bounds: EnumerationBounds):
        if dict(A.schema) != dict(B.schema) or A.vocab != B.vocab:
            raise ValueError("databases must share schema and vocabulary")
        self.A, self.B, self.bounds = A, B, bounds
        self.vocab = A.vocab
        self.schema = dict(A.schema)
        s = max(self.schema.values(), default=0)
        self.sides = (_Side(A, s), _Side(B, s))
        self.level: dict[tuple, int] = {}
        self._recipe: dict[tuple, tuple] = {}
        self._select_masks: dict = {}
        self._types: dict = {}
        self._build()

    # masks

    def _sel(self, n: int, pats: tuple) -> tuple[int, int]:
        key = (n, pats)
        if key not in self._select_masks:
            wanted = set(pats)
            self._select_masks[key] = tuple(
                side.mask([t for t in side.by_arity[n] if type_key(t, self.vocab) in wanted], n)
                for side in self.sides
            )
        return self._select_masks[key]

    def _joint(self, side_no: int, n: int, m: int) -> list[list]:
        key = (side_no, n, m)
        if key not in self._types:
            side = self.sides[side_no]
            self._types[key] = [
                [type_key(a + b, self.vocab) for b in side.by_arity[m]] for a in side.by_arity[n]
            ]
        return self._types[key]

    def _semijoin_masks(self, f: tuple, n: int) -> dict:
        """pattern -> (mask_A, mask_B) of arity-n tuples with a partner in f."""
        m = f[0]
        out: dict = {}
        for s in (0, 1):
            table = self._joint(s, n, m)
            fm = f[1 + s]
            bs = [i for i in range(len(self.sides[s].by_arity[m])) if fm >> i & 1]
            for ai, row in enumerate(table):
                for bi in bs:
                    pat = row[bi]
                    cur = out.setdefault(pat, [0, 0])
                    cur[s] |= 1 << ai
        return out

    def _project(self, sig: tuple, cols: tuple) -> tuple:
        n = sig[0]
        masks = []
        for s, side in enumerate(self.sides):
            masks.append(side.mask((project(t, cols) for t in side.members(sig[1 + s], n)), len(cols)))
        return (len(cols), masks[0], masks[1])

    # levels

    def _add(self, sig: tuple, level: int, recipe: tuple, bucket: list) -> None:
        if sig not in self.level:
            self.level[sig] = level
            self._recipe[sig] = recipe
            bucket.append(sig)

    def _close(self, base: list[tuple], level: int) -> tuple[list, list]:
        new: list = []
        q = list(base)
        for sig in base:
            n = sig[0]
            for pats in condition_pool(n, 0, self.vocab, self.bounds.condition_terms):
                mA, mB = self._sel(n, pats)
                out = (n, sig[1] & mA, sig[2] & mB)
                self._add(out, level, ("select", pats, sig), new)
                if out not in q:
                    q.append(out)
        q = list(dict.fromkeys(q))
        full = list(q)
        if self.bounds.max_leaves >= 2:
            by_arity: dict = {}
            for sig in q:
                by_arity.setdefault(sig[0], []).append(sig)
            for n, sigs in by_arity.items():
                for e in sigs:
                    for f in sigs:
                        u = (n, e[1] | f[1], e[2] | f[2])
                        d = (n, e[1] & ~f[1], e[2] & ~f[2])
                        self._add(u, level, ("union", e, f), new)
                        self._add(d, level, ("diff", e, f), new)
                        full.append(u)
                        full.append(d)
        return q, list(dict.fromkeys(full))

    def _build(self) -> None:
        base = []
        for name, arity in self.schema.items():
            sig = (arity,) + tuple(
                side.mask(side.D.relations[name], arity) for side in self.sides
            )
            self._add(sig, 0, ("rel", name), [])
            base.append(sig)
        base = list(dict.fromkeys(base))
        q_prev, l_prev = self._close(base, 0)
        for d in range(1, self.bounds.depth + 1):
            new = list(l_prev)
            for f in l_prev:
                for cols in column_subsets(f[0]):
                    p = self._project(f, cols)
                    self._add(p, d, ("project", cols, f), [])
                    new.append(p)
            by_arity: dict = {}
            for e in q_prev:
                by_arity.setdefault(e[0], []).append(e)
            for f in l_prev:
                for n, lefts in by_arity.items():
                    per_type = self._semijoin_masks(f, n)
                    for pats in condition_pool(n, f[0], self.vocab, self.bounds.condition_terms):
                        mA = mB = 0
                        for p in pats:
                            got = per_type.get(p)
                            if got:
                                mA |= got[0]
                                mB |= got[1]
                        for e in lefts:
                            out = (n, e[1] & mA, e[2] & mB)
                            self._add(out, d, ("semijoin", pats, e, f), [])
                            new.append(out)
            new = list(dict.fromkeys(new))
            q_prev, l_prev = self._close(new, d)

    # queries

    def witness(self, sig: tuple) -> Expression:
        memo: dict = {}

        def build(s):
            if s in memo:
                return memo[s]
            r = self._recipe[s]
            kind = r[0]
            if kind == "rel":
                e = Rel(r[1], self.schema[r[1]])
            elif kind == "select":
                e = Select(_pattern_condition(r[1], s[0], self.vocab), build(r[2]))
            elif kind == "union":
                e = Union(build(r[1]), build(r[2]))
            elif kind == "diff":
                e = Diff(build(r[1]), build(r[2]))
            elif kind == "project":
                e = Project(r[1], build(r[2]))
            else:
                e = Semijoin(_pattern_condition(r[1], s[0], self.vocab), build(r[2]), build(r[3]))
            memo[s] = e
            return e

        return build(sig)

    def separating(self, a, b, depth: Optional[int] = None) -> Optional[tuple]:
        """A result signature containing exactly one of a, b, or None."""
        a, b = tuple(a), tuple(b)
        depth = self.bounds.depth if depth is None else depth
        if len(a) != len(b):
            # some relation projection contains one of them (if either is in its space)
            for sig, lvl in self.level.items():
                if lvl <= depth and (self._has(0, sig, a) or self._has(1, sig, b)):
                    return sig
            return None
        for sig, lvl in self.level.items():
            if lvl <= depth and sig[0] == len(a) and self._has(0, sig, a) != self._has(1, sig, b):
                return sig
        return None

    def _has(self, s: int, sig: tuple, t: tuple) -> bool:
        idx = self.sides[s].index.get(sig[0], {}).get(t)
        return idx is not None and sig[0] == len(t) and bool(sig[1 + s] >> idx & 1)

    def agreement_classes(self, depth: int) -> tuple[dict, dict]:
        """For each tuple, the bitset of signatures (level <= depth) containing it.

        ``a`` and ``b`` of equal arity agree on every expression iff their
        bitsets are equal.
        """
        sigs = [s for s, lvl in self.level.items() if lvl <= depth]
        cols = ({}, {})
        for k, sig in enumerate(sigs):
            n = sig[0]
            for s in (0, 1):
                for t in self.sides[s].members(sig[1 + s], n):
                    cols[s][t] = cols[s].get(t, 0) | (1 << k)
        return cols


def indistinguishable_bruteforce(A: Database, B: Database, a, b, bounds: EnumerationBounds) -> bool:
    """True iff no enumerated expression contains exactly one of a (in A) and b (in B)."""
    return ExpressionClosure(A, B, bounds).separating(a, b) is None


def separating_expression(A: Database, B: Database, a, b, bounds: EnumerationBounds) -> Optional[Expression]:
    closure = ExpressionClosure(A, B, bounds)
    sig = closure.separating(a, b)
    return None if sig is None else closure.witness(sig)


# --------------------------------------------------------------------------
# direct oracles


def cartesian_contains(T: Iterable[tuple], R: Iterable[tuple], S: Iterable[tuple]) -> bool:
    """T contains every concatenation r + s with r in R, s in S."""
    T = set(T)
    return all(r + s in T for r in R for s in S)


def within_cartesian(T: Iterable[tuple], R: Iterable[tuple], S: Iterable[tuple]) -> bool:
    """Every tuple of T splits as r + s with r in R and s in S."""
    R, S = set(R), set(S)
    if not R:
        return not T
    p = len(next(iter(R)))
    return all(t[:p] in R and t[p:] in S for t in T)


def composition(R: Iterable[tuple], S: Iterable[tuple]) -> frozenset:
    return frozenset((a, d) for (a, b) in R for (c, d) in S if b == c)


def _succ(R) -> dict:
    out: dict = {}
    for u, v in R:
        out.setdefault(u, []).append(v)
    return out


def has_path(R: Iterable[tuple], k: int) -> bool:
    """Some walk of exactly k edges exists (vertices may repeat)."""
    succ = _succ(R)

    def walk(u, left):
        if left == 0:
            return True
        return any(walk(v, left - 1) for v in succ.get(u, ()))

    return any(walk(u, k) for u in list(succ))


def has_simple_path(R: Iterable[tuple], k: int) -> bool:
    """Some path of k edges through k + 1 distinct vertices exists."""
    succ = _succ(R)

    def walk(u, left, seen):
        if left == 0:
            return True
        return any(walk(v, left - 1, seen | {v}) for v in succ.get(u, ()) if v not in seen)

    return any(walk(u, k, {u}) for u in list(succ))


def has_cycle(R: Iterable[tuple], k: int) -> bool:
    """Some cycle through exactly k distinct vertices exists."""
    succ = _succ(R)

    def walk(start, u, left, seen):
        if left == 1:
            return start in succ.get(u, ())
        return any(walk(start, v, left - 1, seen | {v}) for v in succ.get(u, ()) if v not in seen)

    return any(walk(u, u, k, {u}) for u in list(succ))


def count_at_least(S: Iterable[tuple], k: int) -> bool:
    return len(set(S)) >= k


# --------------------------------------------------------------------------
# random instances


def random_database(
    rng: random.Random,
    schema: Mapping[str, int],
    vocab: Vocabulary,
    values: int = 4,
    max_tuples: int = 4,
) -> Database:
    universe = list(range(1, values + 1))
    rels = {}
    for name, arity in schema.items():
        pool = list(product(universe, repeat=arity))
        rels[name] = rng.sample(pool, rng.randint(0, min(max_tuples, len(pool))))
    return Database(rels, schema, vocab)


def random_schema(rng: random.Random, max_relations: int = 2, max_arity: int = 2) -> dict:
    names = ["R", "S", "T", "U"][: rng.randint(1, max_relations)]
    return {n: rng.randint(1, max_arity) for n in names}


def random_pair(
    rng: random.Random,
    values: int = 4,
    max_relations: int = 2,
    max_arity: int = 2,
    max_tuples: int = 4,
    ordered: Optional[bool] = None,
) -> tuple[Database, Database]:
    """Two random databases over a shared random schema."""
    schema = random_schema(rng, max_relations, max_arity)
    if ordered is None:
        ordered = rng.random() < 0.5
    vocab = Vocabulary(order=ordered)
    n = rng.randint(1, values)
    return (
        random_database(rng, schema, vocab, n, max_tuples),
        random_database(rng, schema, vocab, rng.randint(1, values), max_tuples),
    )


def random_condition(
    rng: random.Random, n_left: int, n_right: int, vocab: Vocabulary, size: int = 2
) -> Condition:
    """A random condition over ``x1..x{n_left}`` and ``y1..y{n_right}``."""
    variables = [Var("x", i) for i in range(1, n_left + 1)] + [Var("y", j) for j in range(1, n_right + 1)]
    if not variables or size <= 0 or rng.random() < 0.1:
        return And(()) if rng.random() < 0.5 or not variables else Or(())
    if size == 1:
        preds = ["="] + (["<"] if vocab.order else []) + [p.name for p in vocab.predicates]
        pred = rng.choice(preds)
        atom = Atom(pred, tuple(rng.choice(variables) for _ in range(vocab.arity_of(pred))))
        return Not(atom) if rng.random() < 0.4 else atom
    kind = rng.choice(["and", "or", "not", "atom"])
    if kind == "atom":
        return random_condition(rng, n_left, n_right, vocab, 1)
    if kind == "not":
        return Not(random_condition(rng, n_left, n_right, vocab, size - 1))
    parts = tuple(random_condition(rng, n_left, n_right, vocab, size - 1) for _ in range(rng.randint(2, 3)))
    return And(parts) if kind == "and" else Or(parts)


def random_expression(
    rng: random.Random,
    schema: Mapping[str, int],
    vocab: Vocabulary,
    depth: int = 3,
    arity: Optional[int] = None,
) -> Expression:
    """A random well-formed expression; ``arity`` fixes the result arity."""
    fits = [(n, a) for n, a in schema.items() if arity is None or a == arity]
    wider = [(n, a) for n, a in schema.items() if arity is None or a >= arity]
    if depth <= 0 or rng.random() < 0.2:
        if fits and (rng.random() < 0.7 or arity is None):
            return Rel(*rng.choice(fits))
        name, a = rng.choice(wider)
        k = rng.randint(0, a) if arity is None else arity
        return Project(tuple(sorted(rng.sample(range(1, a + 1), k))), Rel(name, a))
    kind = rng.choice(["union", "diff", "project", "select", "semijoin"])
    if kind == "project":
        child = random_expression(rng, schema, vocab, depth - 1,
                                  None if arity is None else rng.choice([a for _, a in wider]))
        k = rng.randint(0, child.arity) if arity is None else arity
        return Project(tuple(sorted(rng.sample(range(1, child.arity + 1), k))), child)
    left = random_expression(rng, schema, vocab, depth - 1, arity)
    if kind in ("union", "diff"):
        right = random_expression(rng, schema, vocab, depth - 1, left.arity)
        return Union(left, right) if kind == "union" else Diff(left, right)
    if kind == "select":
        return Select(random_condition(rng, left.arity, 0, vocab), left)
    right = random_expression(rng, schema, vocab, depth - 1)
    return Semijoin(random_condition(rng, left.arity, right.arity, vocab), left, right)
