import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semijoin.corpus import expr_path, figure1
from semijoin.distinguisher import base_expression
from semijoin.errors import ParseError
from semijoin.expr import Diff, Project, Rel, Semijoin
from semijoin.model import EQUALITY, ORDERED, Database, conj, eq, neq, x, y
from semijoin.oracle import random_database, random_expression, random_schema
from semijoin.parser import (
    parse_condition,
    parse_database,
    parse_expression,
    parse_tuple,
    render_condition,
    render_database,
    render_expression,
    tokenize,
)

FIG1_A = "rel R/1 { (a) (b) } rel S/1 { (1) (2) } rel T/2 { (a,1) (a,2) (b,1) (b,2) }"


def test_parse_figure1_database():
    A, _ = figure1()
    assert parse_database(FIG1_A) == A


def test_parse_empty_relation_and_vocab():
    D = parse_database("rel R/2 { }")
    assert D.schema == {"R": 2} and not D["R"]
    D = parse_database("vocab { order } rel S/1 { (1) (2) (3) }")
    assert D.vocab.order and len(D["S"]) == 3


def test_comments_and_predicates():
    D = parse_database("# a comment\npred P/1 { (1) }\nrel S/1 { (1) (2) }  # trailing\n")
    assert D.vocab.predicates[0].name == "P"
    e = parse_expression("select[P(x1)](S)", D.schema, D.vocab)
    assert parse_database(render_database(D)) == D
    assert render_expression(e) == "select[P(x1)](S)"


def test_parse_expression_examples():
    assert parse_expression("(R semijoin[x2 = y1] R)", {"R": 2}) == expr_path(2)
    e = parse_expression("project[1](R)", {"R": 2})
    assert e == Project((1,), Rel("R", 2)) and e.arity == 1
    src = "(T diff ((T semijoin[x1=y1 & x2=y2] R) semijoin[x3=y1 & x4=y2] S))"
    e = parse_expression(src, {"T": 4, "R": 2, "S": 2})
    T, R, S = Rel("T", 4), Rel("R", 2), Rel("S", 2)
    inner = Semijoin(conj(eq(x(1), y(1)), eq(x(2), y(2))), T, R)
    assert e == Diff(T, Semijoin(conj(eq(x(3), y(1)), eq(x(4), y(2))), inner, S))


def test_isect_desugars_to_differences():
    e = parse_expression("(R isect S)", {"R": 1, "S": 1})
    R, S = Rel("R", 1), Rel("S", 1)
    assert e == Diff(R, Diff(R, S))


@pytest.mark.parametrize("src", ["project[1](R)", "(R semijoin[x1 != y1] R)", "project[](R)",
                                 "select[!(x1 = x2 | x1 < x2)](R)", "(R union select[true](R))"])
def test_round_trip_examples(src):
    schema = {"R": 2}
    e = parse_expression(src, schema, ORDERED)
    assert parse_expression(render_expression(e), schema, ORDERED) == e


def test_round_trip_synthesized_base_expression():
    A, _ = figure1()
    e = base_expression(A, ("a", 1))
    assert parse_expression(render_expression(e), A.schema, A.vocab) == e


@pytest.mark.parametrize("src, where", [
    ("(R semijoin[x3 = y1] R)", "x3"),
    ("(Q union R)", "Q"),
    ("(R union project[1](R))", "arities 2 and 1"),
    ("select[x1 < x2](R)", "order"),
    ("(R semijoin[x1 = ] R)", "line 1"),
    ("project[2,2](R)", "column"),
])
def test_expression_errors(src, where):
    with pytest.raises(ParseError) as info:
        parse_expression(src, {"R": 2}, EQUALITY)
    assert where in str(info.value)


def test_database_errors_carry_positions():
    with pytest.raises(ParseError) as info:
        parse_database("rel R/2 {\n  (1,2)\n  (3)\n}")
    assert info.value.line == 3
    with pytest.raises(ParseError):
        parse_database("rel R/1 { (1) } rel R/1 { }")
    with pytest.raises(ParseError):
        parse_database("rel union/1 { }")


def test_tuples_and_conditions():
    assert parse_tuple("()") == ()
    assert parse_tuple("(a,1)") == ("a", 1)
    assert parse_tuple("(-2)") == (-2,)
    c = parse_condition("x1 != y2 & (x1 = y1 | true)")
    assert parse_condition(render_condition(c)) == c
    assert [t.kind for t in tokenize("R")][-1] == "eof"


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10**6))
def test_random_expression_round_trip(seed):
    rng = random.Random(seed)
    vocab = ORDERED if seed % 2 else EQUALITY
    schema = random_schema(rng, 3, 3)
    e = random_expression(rng, schema, vocab, 4)
    assert parse_expression(render_expression(e), schema, vocab) == e


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_random_database_round_trip(seed):
    rng = random.Random(seed)
    vocab = ORDERED if seed % 2 else EQUALITY
    D = random_database(rng, random_schema(rng, 3, 3), vocab)
    assert parse_database(render_database(D)) == D


@given(st.lists(st.tuples(st.sampled_from(["a", "b", "z9", "_x"]), st.integers(-50, 50)), max_size=6))
def test_mixed_value_database_round_trip(rows):
    D = Database({"T": rows}, {"T": 2})
    assert parse_database(render_database(D)) == D
