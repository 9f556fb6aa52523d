"""Semijoin-algebra expression trees.

Nodes are immutable and may be shared, so an expression is in general a
DAG. Every node knows its arity. Equality is structural; hashes are cached
because synthesized expressions share sub-terms heavily.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import typing
from typing import Iterable, Iterator, Mapping

from .errors import ValidationError
from .model import Condition, Vocabulary, check_condition


class _Node:
    arity: int

    @cached_property
    def _hash(self) -> int:
        return hash((type(self).__name__,) + tuple(getattr(self, f) for f in self._fields))

    def __hash__(self):
        return self._hash

    def __str__(self):
        from .parser import render_expression

        return render_expression(self)


@dataclass(frozen=True, eq=True)
class Rel(_Node):
    name: str
    arity: int
    _fields = ("name", "arity")

    def __post_init__(self):
        if self.arity < 1:
            raise ValidationError(f"relation {self.name} must have positive arity")


@dataclass(frozen=True, eq=True)
class Union(_Node):
    left: "Expression"
    right: "Expression"
    arity: int = field(init=False, compare=False)
    _fields = ("left", "right")

    def __post_init__(self):
        if self.left.arity != self.right.arity:
            raise ValidationError(
                f"union of arities {self.left.arity} and {self.right.arity}"
            )
        object.__setattr__(self, "arity", self.left.arity)


@dataclass(frozen=True, eq=True)
class Diff(_Node):
    left: "Expression"
    right: "Expression"
    arity: int = field(init=False, compare=False)
    _fields = ("left", "right")

    def __post_init__(self):
        if self.left.arity != self.right.arity:
            raise ValidationError(
                f"difference of arities {self.left.arity} and {self.right.arity}"
            )
        object.__setattr__(self, "arity", self.left.arity)


@dataclass(frozen=True, eq=True)
class Project(_Node):
    columns: tuple[int, ...]
    child: "Expression"
    arity: int = field(init=False, compare=False)
    _fields = ("columns", "child")

    def __post_init__(self):
        cols = tuple(self.columns)
        if any(not 1 <= c <= self.child.arity for c in cols):
            raise ValidationError(
                f"projection columns {list(cols)} out of range for arity {self.child.arity}"
            )
        if len(set(cols)) != len(cols):
            raise ValidationError(f"duplicate projection column in {list(cols)}")
        object.__setattr__(self, "columns", tuple(sorted(cols)))
        object.__setattr__(self, "arity", len(cols))


@dataclass(frozen=True, eq=True)
class Select(_Node):
    cond: Condition
    child: "Expression"
    arity: int = field(init=False, compare=False)
    _fields = ("cond", "child")

    def __post_init__(self):
        _check_vars(self.cond, self.child.arity, 0)
        object.__setattr__(self, "arity", self.child.arity)


@dataclass(frozen=True, eq=True)
class Semijoin(_Node):
    cond: Condition
    left: "Expression"
    right: "Expression"
    arity: int = field(init=False, compare=False)
    _fields = ("cond", "left", "right")

    def __post_init__(self):
        _check_vars(self.cond, self.left.arity, self.right.arity)
        object.__setattr__(self, "arity", self.left.arity)


Expression = typing.Union[Rel, Union, Diff, Project, Select, Semijoin]

# dataclass(eq=True, frozen=True) installs a recursive field hash; keep the cached one
for _cls in (Rel, Union, Diff, Project, Select, Semijoin):
    _cls.__hash__ = _Node.__hash__


def _check_vars(cond: Condition, n_left: int, n_right: int) -> None:
    # vocabulary checks happen in validate(); permissive vocabulary here
    from .model import condition_vars

    for v in condition_vars(cond):
        bound = n_left if v.side == "x" else n_right
        if not 1 <= v.index <= bound:
            raise ValidationError(
                f"variable {v} out of range (left arity {n_left}, right arity {n_right})"
            )


def children(e: Expression) -> tuple:
    if isinstance(e, Rel):
        return ()
    if isinstance(e, (Project, Select)):
        return (e.child,)
    return (e.left, e.right)


def walk(e: Expression) -> Iterator[Expression]:
    """Each distinct node (by identity) once, children before parents."""
    seen: set[int] = set()
    stack = [(e, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in seen:
            continue
        if expanded:
            seen.add(id(node))
            yield node
            continue
        stack.append((node, True))
        for c in children(node):
            if id(c) not in seen:
                stack.append((c, False))


def validate(e: Expression, schema: Mapping[str, int], vocab: Vocabulary) -> None:
    """Check relation names against ``schema`` and conditions against ``vocab``."""
    for node in walk(e):
        if isinstance(node, Rel):
            if node.name not in schema:
                raise ValidationError(f"unknown relation {node.name}")
            if schema[node.name] != node.arity:
                raise ValidationError(
                    f"relation {node.name} has arity {schema[node.name]}, not {node.arity}"
                )
        elif isinstance(node, Select):
            check_condition(node.cond, node.child.arity, 0, vocab)
        elif isinstance(node, Semijoin):
            check_condition(node.cond, node.left.arity, node.right.arity, vocab)


def node_count(e: Expression) -> int:
    return sum(1 for _ in walk(e))


# --------------------------------------------------------------------------
# derived operators


def intersect(a: Expression, b: Expression) -> Expression:
    """``a - (a - b)``: intersection is not primitive."""
    return Diff(a, Diff(a, b))


def _balanced(op, items: list) -> Expression:
    if len(items) == 1:
        return items[0]
    mid = len(items) // 2
    return op(_balanced(op, items[:mid]), _balanced(op, items[mid:]))


def union_all(items: Iterable[Expression]) -> Expression:
    items = list(items)
    if not items:
        raise ValueError("empty union")
    return _balanced(Union, items)


def intersect_all(items: Iterable[Expression]) -> Expression:
    items = list(items)
    if not items:
        raise ValueError("empty intersection")
    return _balanced(intersect, items)


def union_or_none(items: Iterable[Expression]):
    items = list(items)
    return union_all(items) if items else None


def diff_if(e: Expression, minus) -> Expression:
    return e if minus is None else Diff(e, minus)
