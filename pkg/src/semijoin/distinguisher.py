"""Synthesis of distinguishing expressions from lost games.

``base_expression(A, a)`` contains exactly the tuples that agree with ``a``
on every projection membership and on the atomic type.
``distinguishing_expression(A, a, r)`` additionally encodes ``r`` rounds of
play: on any database B it contains ``b`` iff the duplicator wins the
r-round game from ``(a, b)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .errors import BudgetExceeded, ValidationError
from .evaluator import evaluate
from .expr import Diff, Expression, Project, Rel, Select, Semijoin, intersect, intersect_all, union_all
from .game import DUPLICATOR, LEFT, RIGHT, game
from .model import (
    Database,
    Vocabulary,
    atomic_type,
    column_subsets,
    count_type_patterns,
    joint_atomic_type,
    sorted_tuples,
    tuple_space,
    type_key,
    type_patterns,
)


@dataclass(frozen=True)
class Budget:
    max_rounds: int = 8
    max_types: int = 20000  # atomic types enumerated per (a, j)


def _projection_expr(name: str, arity: int, cols: tuple[int, ...]) -> Expression:
    R = Rel(name, arity)
    return R if len(cols) == arity else Project(cols, R)


def tuple_space_expr(schema: Mapping[str, int], k: int) -> Optional[Expression]:
    """Union of every ``pi_X(R)`` with ``|X| = k``; None if there is none."""
    parts = [
        _projection_expr(name, arity, cols)
        for name, arity in schema.items()
        for cols in column_subsets(arity)
        if len(cols) == k
    ]
    return union_all(parts) if parts else None


def complement_expr(e: Expression, schema: Mapping[str, int], k: Optional[int] = None) -> Expression:
    """Complement of ``e`` relative to the arity-k part of the tuple space."""
    k = e.arity if k is None else k
    if k != e.arity:
        raise ValidationError(f"expression has arity {e.arity}, not {k}")
    universe = tuple_space_expr(schema, k)
    if universe is None:
        raise ValidationError(f"no relation has arity {k} or more")
    return Diff(universe, e)


class Synthesizer:
    """Builds the expressions for one database, sharing sub-expressions."""

    def __init__(self, A: Database, budget: Budget = Budget()):
        if A.vocab.predicates:
            raise ValidationError(
                "synthesis does not support extensional predicates in the vocabulary"
            )
        self.A = A
        self.vocab: Vocabulary = A.vocab
        self.budget = budget
        self.space = sorted_tuples(tuple_space(A))
        self._space_set = frozenset(self.space)
        self._cache: dict[tuple[tuple, int], Expression] = {}
        self._universe: dict[int, Expression] = {}
        self._compl: dict[tuple[tuple, int], Expression] = {}

    def _check(self, a: tuple) -> tuple:
        a = tuple(a)
        if a not in self._space_set:
            raise ValidationError(f"{a} is not in the tuple space of the database")
        return a

    def base(self, a) -> Expression:
        a = self._check(a)
        key = (a, 0)
        if key in self._cache:
            return self._cache[key]
        A = self.A
        inside, outside = [], []
        for (name, cols), rel in A.projections.items():
            if len(cols) != len(a):
                continue
            part = _projection_expr(name, A.schema[name], cols)
            (inside if a in rel else outside).append(part)
        e: Expression = Select(atomic_type(a, self.vocab), intersect_all(inside))
        if outside:
            e = Diff(e, union_all(outside))
        self._cache[key] = e
        return e

    def universe(self, k: int) -> Expression:
        if k not in self._universe:
            self._universe[k] = tuple_space_expr(self.A.schema, k)
        return self._universe[k]

    def _complement(self, c: tuple, r: int) -> Expression:
        key = (c, r)
        if key not in self._compl:
            self._compl[key] = Diff(self.universe(len(c)), self.expression(c, r))
        return self._compl[key]

    def _types(self, a: tuple, j: int) -> list[tuple[int, ...]]:
        n = len(a) + j
        if count_type_patterns(n, self.vocab) > self.budget.max_types:
            raise BudgetExceeded(
                f"{count_type_patterns(n, self.vocab)} atomic types on {n} variables "
                f"exceed the budget of {self.budget.max_types}"
            )
        own = type_key(a, self.vocab)
        # types disagreeing with a on the x-variables only yield empty semijoins
        return [
            p for p in type_patterns(n, self.vocab)
            if type_key(p[: len(a)], self.vocab) == own
        ]

    def expression(self, a, r: int) -> Expression:
        a = self._check(a)
        if r < 0:
            raise ValueError("r must be non-negative")
        if r > self.budget.max_rounds:
            raise BudgetExceeded(f"{r} rounds exceed the budget of {self.budget.max_rounds}")
        if r == 0:
            return self.base(a)
        key = (a, r)
        if key in self._cache:
            return self._cache[key]
        base = self.base(a)
        vocab = self.vocab
        # every move c on this side has an answer surviving r - 1 more rounds
        forth = [
            Semijoin(joint_atomic_type(a, c, vocab), base, self.expression(c, r - 1))
            for c in self.space
        ]
        # no move on the other side is left without a surviving answer
        by_type: dict = {}
        for c in self.space:
            if c:
                by_type.setdefault(type_key(a + c, vocab), []).append(c)
        back = []
        for j in range(1, self.A.max_arity + 1):
            for pattern in self._types(a, j):
                matching = by_type.get(type_key(pattern, vocab), [])
                matching = [c for c in matching if len(c) == j]
                if matching:
                    target = intersect_all(self._complement(c, r - 1) for c in matching)
                else:
                    target = self.universe(j)
                theta = joint_atomic_type(pattern[: len(a)], pattern[len(a):], vocab)
                back.append(Semijoin(theta, base, target))
        e = intersect_all(forth)
        if back:
            e = intersect(e, Diff(base, union_all(back)))
        self._cache[key] = e
        return e


def base_expression(A: Database, a) -> Expression:
    return Synthesizer(A).base(a)


def distinguishing_expression(A: Database, a, r: int, budget: Budget = Budget()) -> Expression:
    return Synthesizer(A, budget).expression(a, r)


@dataclass
class Certificate:
    """Outcome of ``certify``.

    For a spoiler win, ``expression`` was built on ``built_from`` and contains
    that side's tuple but not the other's. For a duplicator win the winning
    region of the infinite game is attached.
    """

    distinguishable: bool
    config: tuple[tuple, tuple]
    rounds: Optional[int] = None
    built_from: Optional[str] = None
    expression: Optional[Expression] = None
    in_left: Optional[bool] = None
    in_right: Optional[bool] = None
    region: frozenset = field(default_factory=frozenset)

    def report(self, include_expression: bool = True) -> str:
        from .expr import node_count
        from .parser import render_expression, render_tuple

        a, b = self.config
        if not self.distinguishable:
            return (
                f"indistinguishable: duplicator wins the infinite game from "
                f"<{render_tuple(a)}, {render_tuple(b)}>\n"
                f"winning region size: {len(self.region)}"
            )
        text = render_expression(self.expression)
        lines = [
            f"distinguishable in {self.rounds} round(s); expression built on the {self.built_from} database",
            f"size: {node_count(self.expression)} distinct nodes, {len(text)} characters when written out",
        ]
        if include_expression:
            lines.append(f"expression: {text}")
        lines += [
            f"{render_tuple(a)} in E(A): {str(self.in_left).lower()}",
            f"{render_tuple(b)} in E(B): {str(self.in_right).lower()}",
        ]
        return "\n".join(lines)


def certify(A: Database, B: Database, a, b, budget: Budget = Budget()) -> Certificate:
    """Separate ``a`` from ``b`` by an expression, or certify that nothing can."""
    a, b = tuple(a), tuple(b)
    g = game(A, B)
    verdict = g.solve(a, b, math.inf, certificate=False)
    if verdict.winner == DUPLICATOR:
        return Certificate(False, (a, b), region=g.region(math.inf))
    r = verdict.spoiler_rounds
    if a in g.space[LEFT]:
        side, e = LEFT, Synthesizer(A, budget).expression(a, r)
    elif b in g.space[RIGHT]:
        side, e = RIGHT, Synthesizer(B, budget).expression(b, r)
    else:  # both tuples empty and both databases empty: the duplicator wins
        raise AssertionError("unreachable")  # pragma: no cover
    in_a = a in evaluate(e, A, check=False)
    in_b = b in evaluate(e, B, check=False)
    return Certificate(True, (a, b), r, side, e, in_a, in_b)
