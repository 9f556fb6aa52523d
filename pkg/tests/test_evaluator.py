import random

from hypothesis import given, settings
from hypothesis import strategies as st

from semijoin.corpus import cycle_db, expr_at_least, expr_path, expr_T_subset_RxS, figure1, unary_db
from semijoin.evaluator import evaluate, is_empty, semijoin
from semijoin.expr import Diff, Project, Rel, Select, Semijoin, Union, intersect
from semijoin.model import EQUALITY, ORDERED, Database, eq, eval_condition, neq, project, x, y
from semijoin.oracle import random_condition, random_database, random_expression, random_schema
from semijoin.parser import parse_expression


def naive(e, D):
    """Reference semantics, straight from the definitions."""
    if isinstance(e, Rel):
        return set(D[e.name])
    if isinstance(e, Union):
        return naive(e.left, D) | naive(e.right, D)
    if isinstance(e, Diff):
        return naive(e.left, D) - naive(e.right, D)
    if isinstance(e, Project):
        return {project(t, e.columns) for t in naive(e.child, D)}
    if isinstance(e, Select):
        return {t for t in naive(e.child, D) if eval_condition(e.cond, t, (), D.vocab)}
    right = naive(e.right, D)
    return {t for t in naive(e.left, D) if any(eval_condition(e.cond, t, u, D.vocab) for u in right)}


def test_path2_on_three_cycle():
    assert set(evaluate(expr_path(2), cycle_db(3))) == {(1, 2), (2, 3), (3, 1)}


def test_containment_expressions():
    A, _ = figure1()
    src = "(T diff ((T semijoin[x1=y1 & x2=y2] R) semijoin[x3=y1 & x4=y2] S))"
    D = Database({"T": [("a", 1, "b", 2)], "R": [("a", 1)], "S": [("b", 2)]})
    assert is_empty(parse_expression(src, D.schema), D)
    assert is_empty(expr_T_subset_RxS(), A)


def test_nullary_projection():
    R = Rel("R", 2)
    assert set(evaluate(Project((), R), cycle_db(3))) == {()}
    assert not evaluate(Project((), R), Database({"R": []}, {"R": 2}))


def test_two_distinct_elements():
    e = Semijoin(neq(x(1), y(1)), Rel("S", 1), Rel("S", 1))
    assert not evaluate(e, Database({"S": [("v",)]}))
    assert set(evaluate(e, Database({"S": [("v",), ("w",)]}))) == {("v",), ("w",)}


def test_at_least_three():
    assert is_empty(expr_at_least(3), unary_db(2, True))
    assert not is_empty(expr_at_least(3), unary_db(3, True))


def test_empty_database():
    D = Database({"R": []}, {"R": 2})
    for e in (expr_path(3), Project((), Rel("R", 2)), Select(eq(x(1), x(2)), Rel("R", 2))):
        assert is_empty(e, D)


def test_result_is_sorted_canonically():
    D = Database({"S": [("b",), (3,), ("a",), (1,)]})
    assert list(evaluate(Rel("S", 1), D)) == [(1,), (3,), ("a",), ("b",)]


def test_intersection_sugar():
    D = Database({"R": [(1,), (2,)], "S": [(2,), (3,)]})
    assert set(evaluate(intersect(Rel("R", 1), Rel("S", 1)), D)) == {(2,)}


def test_shared_dag_is_evaluated_once():
    # a chain of 60 doublings would be astronomically large as a tree
    e = Rel("R", 2)
    for _ in range(60):
        e = Union(e, e)
    memo = {}
    assert set(evaluate(e, cycle_db(3), memo)) == set(cycle_db(3)["R"])
    assert len(memo) == 61


def test_hash_join_matches_nested_loop():
    rng = random.Random(5)
    for _ in range(300):
        left = frozenset((rng.randint(1, 3), rng.randint(1, 3)) for _ in range(rng.randint(0, 6)))
        right = frozenset((rng.randint(1, 3),) for _ in range(rng.randint(0, 4)))
        cond = random_condition(rng, 2, 1, ORDERED, 2)
        for c in (cond, eq(x(2), y(1))):
            want = {a for a in left if any(eval_condition(c, a, b, ORDERED) for b in right)}
            assert semijoin(c, left, right, ORDERED) == want


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**6))
def test_matches_reference_semantics(seed):
    rng = random.Random(seed)
    vocab = ORDERED if seed % 2 else EQUALITY
    schema = random_schema(rng, 3, 3)
    D = random_database(rng, schema, vocab, values=4, max_tuples=6)
    e = random_expression(rng, schema, vocab, 4)
    got = evaluate(e, D)
    assert set(got) == naive(e, D)
    assert got.arity == e.arity and all(len(t) == e.arity for t in got)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6))
def test_semijoin_output_is_inside_left_operand(seed):
    rng = random.Random(seed)
    schema = random_schema(rng, 2, 2)
    D = random_database(rng, schema, ORDERED, max_tuples=5)
    left = random_expression(rng, schema, ORDERED, 2)
    right = random_expression(rng, schema, ORDERED, 2)
    e = Semijoin(random_condition(rng, left.arity, right.arity, ORDERED), left, right)
    assert evaluate(e, D).tuples <= evaluate(left, D).tuples
