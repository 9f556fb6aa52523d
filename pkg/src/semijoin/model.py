"""Values, vocabularies, databases, conditions and atomic types."""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations, permutations, product
from types import MappingProxyType
from typing import Callable, Iterable, Iterator, Mapping, Union

from .errors import ValidationError

Value = Union[int, str]

IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
BUILTIN_PREDICATES = frozenset({"=", "<"})


def value_key(v: Value):
    """Total order on values: integers numerically, then symbols lexicographically."""
    if isinstance(v, int):
        return (0, v, "")
    return (1, 0, v)


def tuple_key(t: tuple):
    """Canonical tuple order: shorter first, then by values."""
    return (len(t), tuple(value_key(v) for v in t))


def _check_value(v) -> None:
    if isinstance(v, bool) or not isinstance(v, (int, str)):
        raise ValidationError(f"value {v!r} is neither an integer nor a symbol")
    if isinstance(v, str) and not IDENT.match(v):
        raise ValidationError(f"symbol {v!r} is not an identifier")


# --------------------------------------------------------------------------
# Vocabulary


@dataclass(frozen=True)
class Predicate:
    """An extra interpreted predicate, given extensionally."""

    name: str
    arity: int
    extension: frozenset = frozenset()

    def __post_init__(self):
        if not IDENT.match(self.name):
            raise ValidationError(f"bad predicate name {self.name!r}")
        if self.arity < 1:
            raise ValidationError(f"predicate {self.name} must have positive arity")
        ext = frozenset(tuple(t) for t in self.extension)
        for t in ext:
            if len(t) != self.arity:
                raise ValidationError(
                    f"predicate {self.name}/{self.arity} holds tuple {t} of wrong length"
                )
            for v in t:
                _check_value(v)
        object.__setattr__(self, "extension", ext)


@dataclass(frozen=True)
class Vocabulary:
    """Interpreted predicates usable in conditions. Equality is always present."""

    order: bool = False
    predicates: tuple[Predicate, ...] = ()

    def __post_init__(self):
        preds = tuple(sorted(self.predicates, key=lambda p: p.name))
        names = [p.name for p in preds]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate predicate name in vocabulary")
        object.__setattr__(self, "predicates", preds)

    @property
    def names(self) -> frozenset[str]:
        base = {"=", "<"} if self.order else {"="}
        return frozenset(base | {p.name for p in self.predicates})

    def predicate(self, name: str) -> Predicate:
        for p in self.predicates:
            if p.name == name:
                return p
        raise KeyError(name)

    def arity_of(self, name: str) -> int:
        if name in BUILTIN_PREDICATES:
            return 2
        return self.predicate(name).arity


EQUALITY = Vocabulary()
ORDERED = Vocabulary(order=True)


# --------------------------------------------------------------------------
# Conditions


@dataclass(frozen=True)
class Var:
    side: str  # "x" (left tuple) or "y" (right tuple)
    index: int  # 1-based

    def __str__(self):
        return f"{self.side}{self.index}"


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Var, ...]


@dataclass(frozen=True)
class Not:
    arg: "Condition"


@dataclass(frozen=True)
class And:
    args: tuple["Condition", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["Condition", ...]


Condition = Union[Atom, Not, And, Or]

TRUE = And(())
FALSE = Or(())


def x(i: int) -> Var:
    return Var("x", i)


def y(j: int) -> Var:
    return Var("y", j)


def eq(u: Var, v: Var) -> Atom:
    return Atom("=", (u, v))


def neq(u: Var, v: Var) -> Not:
    return Not(Atom("=", (u, v)))


def lt(u: Var, v: Var) -> Atom:
    return Atom("<", (u, v))


def conj(*parts: Condition) -> Condition:
    if len(parts) == 1:
        return parts[0]
    return And(tuple(parts))


def condition_vars(cond: Condition) -> Iterator[Var]:
    if isinstance(cond, Atom):
        yield from cond.args
    elif isinstance(cond, Not):
        yield from condition_vars(cond.arg)
    else:
        for c in cond.args:
            yield from condition_vars(c)


def condition_predicates(cond: Condition) -> Iterator[Atom]:
    if isinstance(cond, Atom):
        yield cond
    elif isinstance(cond, Not):
        yield from condition_predicates(cond.arg)
    else:
        for c in cond.args:
            yield from condition_predicates(c)


def check_condition(cond: Condition, n_left: int, n_right: int, vocab: Vocabulary) -> None:
    """Raise ValidationError unless ``cond`` fits the given arities and vocabulary."""
    for v in condition_vars(cond):
        bound = n_left if v.side == "x" else n_right
        if v.side not in ("x", "y") or not 1 <= v.index <= bound:
            raise ValidationError(
                f"variable {v} out of range (left arity {n_left}, right arity {n_right})"
            )
    for atom in condition_predicates(cond):
        if atom.pred == "<" and not vocab.order:
            raise ValidationError("condition uses '<' but the vocabulary has no order")
        if atom.pred not in vocab.names:
            raise ValidationError(f"unknown predicate {atom.pred!r}")
        if len(atom.args) != vocab.arity_of(atom.pred):
            raise ValidationError(
                f"predicate {atom.pred} expects {vocab.arity_of(atom.pred)} arguments"
            )


def _getter(v: Var) -> Callable:
    i = v.index - 1
    if v.side == "x":
        return lambda l, r: l[i]
    return lambda l, r: r[i]


@lru_cache(maxsize=65536)
def compile_condition(cond: Condition, vocab: Vocabulary) -> Callable[[tuple, tuple], bool]:
    """Turn a condition into a ``f(left, right) -> bool`` closure. No validation."""
    if isinstance(cond, Atom):
        getters = [_getter(v) for v in cond.args]
        if cond.pred == "=":
            g, h = getters
            return lambda l, r: g(l, r) == h(l, r)
        if cond.pred == "<":
            g, h = getters
            return lambda l, r: value_key(g(l, r)) < value_key(h(l, r))
        ext = vocab.predicate(cond.pred).extension
        return lambda l, r: tuple(g(l, r) for g in getters) in ext
    if isinstance(cond, Not):
        f = compile_condition(cond.arg, vocab)
        return lambda l, r: not f(l, r)
    fs = [compile_condition(c, vocab) for c in cond.args]
    if isinstance(cond, And):
        return lambda l, r: all(f(l, r) for f in fs)
    return lambda l, r: any(f(l, r) for f in fs)


def eval_condition(cond: Condition, left: tuple, right: tuple, vocab: Vocabulary = EQUALITY) -> bool:
    check_condition(cond, len(left), len(right), vocab)
    return compile_condition(cond, vocab)(tuple(left), tuple(right))


# --------------------------------------------------------------------------
# Atomic types


def _type_vars(n_left: int, n_right: int) -> list[Var]:
    return [x(i + 1) for i in range(n_left)] + [y(j + 1) for j in range(n_right)]


def _atomic_literals(values: tuple, variables: list[Var], vocab: Vocabulary) -> list[Condition]:
    n = len(values)
    lits: list[Condition] = []
    for i, j in combinations(range(n), 2):
        atom = eq(variables[i], variables[j])
        lits.append(atom if values[i] == values[j] else Not(atom))
    if vocab.order:
        keys = [value_key(v) for v in values]
        for i, j in permutations(range(n), 2):
            atom = lt(variables[i], variables[j])
            lits.append(atom if keys[i] < keys[j] else Not(atom))
    for p in vocab.predicates:
        for idx in product(range(n), repeat=p.arity):
            atom = Atom(p.name, tuple(variables[i] for i in idx))
            holds = tuple(values[i] for i in idx) in p.extension
            lits.append(atom if holds else Not(atom))
    return lits


def atomic_type(t: tuple, vocab: Vocabulary = EQUALITY) -> Condition:
    """Conjunction of the atomic and negated atomic facts true of ``t`` (x-variables)."""
    t = tuple(t)
    lits = _atomic_literals(t, _type_vars(len(t), 0), vocab)
    return lits[0] if len(lits) == 1 else And(tuple(lits))


def joint_atomic_type(t1: tuple, t2: tuple, vocab: Vocabulary = EQUALITY) -> Condition:
    """Atomic type of ``t1`` (as x-variables) together with ``t2`` (as y-variables)."""
    t1, t2 = tuple(t1), tuple(t2)
    lits = _atomic_literals(t1 + t2, _type_vars(len(t1), len(t2)), vocab)
    return lits[0] if len(lits) == 1 else And(tuple(lits))


def type_key(values: tuple, vocab: Vocabulary = EQUALITY) -> tuple:
    """Hashable summary of the atomic type of ``values``.

    Two tuples of equal length have equal keys exactly when their canonical
    atomic types coincide. Equality alone is captured by first-occurrence
    labels, order by dense ranks.
    """
    if vocab.order:
        ranks = {k: i for i, k in enumerate(sorted({value_key(v) for v in values}))}
        pattern = tuple(ranks[value_key(v)] for v in values)
    else:
        seen: dict = {}
        pattern = tuple(seen.setdefault(v, len(seen)) for v in values)
    if not vocab.predicates:
        return pattern
    bits = tuple(
        tuple(values[i] for i in idx) in p.extension
        for p in vocab.predicates
        for idx in product(range(len(values)), repeat=p.arity)
    )
    return (pattern, bits)


def _set_partitions(n: int) -> Iterator[tuple[int, ...]]:
    """Restricted growth strings of length n."""
    if n == 0:
        yield ()
        return

    def rec(prefix, top):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for b in range(top + 2):
            yield from rec(prefix + [b], max(top, b))

    yield from rec([0], 0)


def type_patterns(n: int, vocab: Vocabulary = EQUALITY) -> Iterator[tuple[int, ...]]:
    """All satisfiable equality (or order) patterns on n variables.

    Over ``{=}`` these are set partitions; with order, weak orders. The
    pattern doubles as a witness tuple of small integers.
    """
    if vocab.predicates:
        raise ValidationError("type enumeration is undefined for extensional predicates")
    for rgs in _set_partitions(n):
        if not vocab.order:
            yield rgs
            continue
        k = max(rgs, default=-1) + 1
        for perm in permutations(range(k)):
            yield tuple(perm[b] for b in rgs)


def count_type_patterns(n: int, vocab: Vocabulary = EQUALITY) -> int:
    """Bell number (equality) or ordered Bell number (order) of n."""
    # Stirling numbers of the second kind
    s = [[0] * (n + 1) for _ in range(n + 1)]
    s[0][0] = 1
    for i in range(1, n + 1):
        for k in range(1, i + 1):
            s[i][k] = k * s[i - 1][k] + s[i - 1][k - 1]
    total = 0
    fact = 1
    for k in range(0, n + 1):
        if k:
            fact *= k
        total += s[n][k] * (fact if vocab.order else 1)
    return total


# --------------------------------------------------------------------------
# Databases


def project(t: tuple, cols: tuple[int, ...]) -> tuple:
    """Projection onto 1-based column indices."""
    return tuple(t[i - 1] for i in cols)


def column_subsets(arity: int) -> list[tuple[int, ...]]:
    return [c for k in range(arity + 1) for c in combinations(range(1, arity + 1), k)]


class Database:
    """A finite database: schema, vocabulary and relation contents.

    ``relations`` maps names to iterables of tuples. The schema defaults to
    the arities read off the tuples; pass it explicitly for empty relations.
    """

    def __init__(
        self,
        relations: Mapping[str, Iterable[tuple]],
        schema: Mapping[str, int] | None = None,
        vocab: Vocabulary = EQUALITY,
    ):
        contents = {name: frozenset(tuple(t) for t in ts) for name, ts in relations.items()}
        if schema is None:
            schema = {}
            for name, ts in contents.items():
                if not ts:
                    raise ValidationError(f"cannot infer arity of empty relation {name}")
                schema[name] = len(next(iter(ts)))
        schema = dict(schema)
        for name in schema:
            contents.setdefault(name, frozenset())
        if set(contents) != set(schema):
            raise ValidationError("relations and schema name different relations")
        for name, arity in schema.items():
            if not IDENT.match(name):
                raise ValidationError(f"bad relation name {name!r}")
            if name in vocab.names:
                raise ValidationError(f"relation name {name} collides with a vocabulary predicate")
            if not isinstance(arity, int) or arity < 1:
                raise ValidationError(f"relation {name} must have positive arity")
            for t in contents[name]:
                if len(t) != arity:
                    raise ValidationError(f"tuple {t} in {name} does not have arity {arity}")
                for v in t:
                    _check_value(v)
        order = sorted(schema)
        self._schema = MappingProxyType({n: schema[n] for n in order})
        self._contents = MappingProxyType({n: contents[n] for n in order})
        self.vocab = vocab

    @property
    def schema(self) -> Mapping[str, int]:
        return self._schema

    @property
    def relations(self) -> Mapping[str, frozenset]:
        return self._contents

    def __getitem__(self, name: str) -> frozenset:
        return self._contents[name]

    def __eq__(self, other):
        if not isinstance(other, Database):
            return NotImplemented
        return (
            self.vocab == other.vocab
            and dict(self._schema) == dict(other._schema)
            and dict(self._contents) == dict(other._contents)
        )

    @cached_property
    def _hash(self) -> int:
        return hash((self.vocab, tuple(self._schema.items()), tuple(self._contents.items())))

    def __hash__(self):
        return self._hash

    def __repr__(self):
        rels = ", ".join(
            f"{n}/{a}:{len(self._contents[n])}" for n, a in self._schema.items()
        )
        return f"Database({rels}{', ordered' if self.vocab.order else ''})"

    @property
    def max_arity(self) -> int:
        return max(self._schema.values(), default=0)

    @cached_property
    def projections(self) -> Mapping[tuple[str, tuple[int, ...]], frozenset]:
        """All ``pi_X(D(R))`` keyed by ``(R, X)``, including ``X = ()``."""
        out = {}
        for name, arity in self._schema.items():
            for cols in column_subsets(arity):
                out[(name, cols)] = frozenset(project(t, cols) for t in self._contents[name])
        return MappingProxyType(out)

    def profile(self, t: tuple) -> frozenset:
        """The set of ``(R, X)`` with ``t`` in ``pi_X(D(R))``."""
        t = tuple(t)
        return frozenset(
            key for key, rel in self.projections.items() if len(key[1]) == len(t) and t in rel
        )


def tuple_space(D: Database) -> frozenset:
    """Every tuple of D together with all of its projections."""
    out: set = set()
    for rel in D.projections.values():
        out |= rel
    return frozenset(out)


def active_domain(D: Database) -> frozenset:
    return frozenset(v for rel in D.relations.values() for t in rel for v in t)


def sorted_tuples(ts: Iterable[tuple]) -> list[tuple]:
    return sorted(ts, key=tuple_key)
