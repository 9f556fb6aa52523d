"""Bottom-up evaluation of semijoin-algebra expressions."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .expr import Diff, Expression, Project, Rel, Select, Semijoin, Union, children, validate
from .model import And, Atom, Condition, Database, compile_condition, project, sorted_tuples


@dataclass(frozen=True)
class Relation:
    arity: int
    tuples: frozenset

    def __iter__(self) -> Iterator[tuple]:
        return iter(sorted_tuples(self.tuples))

    def __len__(self) -> int:
        return len(self.tuples)

    def __contains__(self, t) -> bool:
        return tuple(t) in self.tuples

    def __bool__(self) -> bool:
        return bool(self.tuples)


def _equi_pairs(cond: Condition) -> list[tuple[int, int]]:
    """Positions (i, j) with a top-level conjunct ``xi = yj``."""
    atoms = cond.args if isinstance(cond, And) else (cond,)
    pairs = []
    for a in atoms:
        if isinstance(a, Atom) and a.pred == "=":
            u, v = a.args
            if u.side == "x" and v.side == "y":
                pairs.append((u.index - 1, v.index - 1))
            elif u.side == "y" and v.side == "x":
                pairs.append((v.index - 1, u.index - 1))
    return pairs


def semijoin(cond: Condition, left: frozenset, right: frozenset, vocab) -> frozenset:
    if not left or not right:
        return frozenset()
    f = compile_condition(cond, vocab)
    pairs = _equi_pairs(cond)
    if not pairs:
        return frozenset(a for a in left if any(f(a, b) for b in right))
    li = [i for i, _ in pairs]
    buckets: dict = {}
    for b in right:
        buckets.setdefault(tuple(b[j] for _, j in pairs), []).append(b)
    out = []
    for a in left:
        cands = buckets.get(tuple(a[i] for i in li))
        if cands and any(f(a, b) for b in cands):
            out.append(a)
    return frozenset(out)


def _step(node: Expression, D: Database, memo: dict) -> frozenset:
    if isinstance(node, Rel):
        return D.relations[node.name]
    if isinstance(node, Union):
        return memo[id(node.left)][1] | memo[id(node.right)][1]
    if isinstance(node, Diff):
        return memo[id(node.left)][1] - memo[id(node.right)][1]
    if isinstance(node, Project):
        return frozenset(project(t, node.columns) for t in memo[id(node.child)][1])
    if isinstance(node, Select):
        f = compile_condition(node.cond, D.vocab)
        return frozenset(t for t in memo[id(node.child)][1] if f(t, ()))
    if isinstance(node, Semijoin):
        return semijoin(node.cond, memo[id(node.left)][1], memo[id(node.right)][1], D.vocab)
    raise TypeError(f"not an expression: {node!r}")


def evaluate(e: Expression, D: Database, memo: dict | None = None, check: bool = True) -> Relation:
    """Evaluate ``e`` over ``D``.

    Shared sub-expressions are computed once; the memo table is keyed by node
    identity and holds a reference to each node so ids stay valid. Passing the
    same ``memo`` to several calls on the same database reuses results.
    """
    if check:
        validate(e, D.schema, D.vocab)
    if memo is None:
        memo = {}
    stack = [(e, False)]
    while stack:
        node, ready = stack.pop()
        if id(node) in memo:
            continue
        if ready:
            memo[id(node)] = (node, _step(node, D, memo))
            continue
        stack.append((node, True))
        stack.extend((c, False) for c in children(node) if id(c) not in memo)
    return Relation(e.arity, memo[id(e)][1])


def is_empty(e: Expression, D: Database) -> bool:
    return not evaluate(e, D).tuples
