import random

import pytest

from semijoin.corpus import CORPUS, cycle_db, disjoint_copies, figure1, figure2, unary_db
from semijoin.distinguisher import (
    Budget,
    Synthesizer,
    base_expression,
    certify,
    complement_expr,
    distinguishing_expression,
    tuple_space_expr,
)
from semijoin.errors import BudgetExceeded, ValidationError
from semijoin.evaluator import evaluate
from semijoin.expr import Project, Rel
from semijoin.game import LEFT, RIGHT, game
from semijoin.model import Database, Predicate, Vocabulary, tuple_space
from semijoin.oracle import random_pair, sj_depth
from semijoin.parser import parse_expression, render_expression


def _contains(e, D, t):
    return tuple(t) in evaluate(e, D, check=False)


def test_base_expression_on_figure1():
    A, B = figure1()
    assert _contains(base_expression(A, ()), B, ())
    e = base_expression(A, ("a", 1))
    assert set(evaluate(e, A)) == set(A["T"])
    assert set(evaluate(e, B)) == set(B["T"])


def test_base_expression_on_a_single_tuple():
    D = Database({"R": [(1, 2)]})
    assert set(evaluate(base_expression(D, (1, 2)), D)) == {(1, 2)}
    assert set(evaluate(base_expression(D, (1,)), D)) == {(1,)}
    assert set(evaluate(base_expression(D, (2,)), D)) == {(2,)}


def test_zero_rounds_is_the_base_expression():
    A, _ = figure1()
    s = Synthesizer(A)
    for a in tuple_space(A):
        assert s.expression(a, 0) is s.base(a)


def test_unknown_tuple_is_rejected():
    A, _ = figure1()
    with pytest.raises(ValidationError):
        base_expression(A, ("z",))
    with pytest.raises(ValueError):
        distinguishing_expression(A, (), -1)


def _check_both_directions(A, B, max_r):
    """E^r built on A contains b in B exactly when the duplicator survives r rounds."""
    g = game(A, B)
    sa, sb = Synthesizer(A), Synthesizer(B)
    for r in range(max_r + 1):
        for a in g.space[LEFT]:
            e = sa.expression(a, r)
            got = evaluate(e, B, check=False)
            for b in g.space[RIGHT]:
                assert (b in got) == (g.survival_rank(a, b) >= r), (a, b, r)
        for b in g.space[RIGHT]:
            e = sb.expression(b, r)
            got = evaluate(e, A, check=False)
            for a in g.space[LEFT]:
                assert (a in got) == (g.survival_rank(a, b) >= r), (a, b, r)


@pytest.mark.parametrize("name", ["figure2", "cycles-3-4", "unary-2-3", "unary-ordered-2-3",
                                  "ordered-product-m3"])
def test_expressions_track_the_game_on_corpus_pairs(name):
    A, B = CORPUS[name].build()
    _check_both_directions(A, B, 2 if name.startswith("ordered") else 3)


def test_expressions_track_the_game_on_random_pairs():
    rng = random.Random(3)
    for _ in range(15):
        A, B = random_pair(rng, values=3, max_tuples=3)
        _check_both_directions(A, B, 3)


def test_expressions_contain_their_own_tuple():
    A, _ = figure2()
    s = Synthesizer(A)
    for a in tuple_space(A):
        for r in range(3):
            assert _contains(s.expression(a, r), A, a)


def test_copies_and_four_cycle_never_separate():
    A, B = CORPUS["copies-3-vs-4"].build()
    s = Synthesizer(A)
    for r in range(4):
        assert _contains(s.expression((), r), B, ())
    assert not certify(A, B, (), ()).distinguishable


def test_complement_examples():
    R = Rel("R", 2)
    assert not evaluate(complement_expr(R, {"R": 2}), cycle_db(3))
    D = Database({"R": [(1, 2)], "S": [(3,)]})
    assert set(evaluate(complement_expr(Project((1,), R), D.schema), D)) == {(2,), (3,)}
    assert tuple_space_expr({"R": 1}, 2) is None
    with pytest.raises(ValidationError):
        complement_expr(R, {"R": 2}, 1)
    with pytest.raises(ValidationError):
        complement_expr(Project((1, 2), R), {"S": 1})


def test_certify_indistinguishable_pairs():
    A, B = figure2()
    c = certify(A, B, (), ())
    assert not c.distinguishable and len(c.region) > 0
    assert "indistinguishable" in c.report()
    assert not certify(unary_db(2), unary_db(5), (), ()).distinguishable


def test_certify_distinguishable_pairs():
    c = certify(unary_db(2, True), unary_db(3, True), (), ())
    assert c.distinguishable and c.rounds == 2 and c.built_from == LEFT
    assert c.in_left and not c.in_right
    c = certify(cycle_db(3), cycle_db(4), (), ())
    assert c.in_left and not c.in_right
    assert "distinct nodes" in c.report(include_expression=False)
    assert "expression:" not in c.report(include_expression=False)


def test_certify_builds_on_the_right_when_the_left_tuple_is_absent():
    A = Database({"R": []}, {"R": 1})
    B = Database({"R": [(1,)]})
    c = certify(A, B, (), ())
    assert c.distinguishable and c.built_from == RIGHT
    assert c.in_right and not c.in_left


def test_budget_is_enforced():
    D = cycle_db(3)
    with pytest.raises(BudgetExceeded):
        distinguishing_expression(D, (), 3, Budget(max_rounds=2))
    with pytest.raises(BudgetExceeded):
        distinguishing_expression(D, (), 1, Budget(max_types=1))


def test_extensional_predicates_are_refused():
    vocab = Vocabulary(predicates=(Predicate("P", 1, frozenset({(1,)})),))
    D = Database({"S": [(1,), (2,)]}, vocab=vocab)
    with pytest.raises(ValidationError, match="predicates"):
        base_expression(D, (1,))


@pytest.mark.parametrize("D, a", [(cycle_db(3), (1, 2)), (unary_db(2, True), (1,)),
                                  (figure1()[0], ("a", 1)), (cycle_db(3), ())])
def test_nesting_grows_linearly_with_rounds(D, a):
    s = Synthesizer(D)
    depths = [sj_depth(s.expression(a, r)) for r in range(5)]
    assert depths == sorted(depths)
    # the base expression nests at most one projection
    assert all(d <= r + 1 for r, d in enumerate(depths))


def test_shared_nodes_keep_expressions_small():
    s = Synthesizer(cycle_db(4))
    e = s.expression((), 4)
    from semijoin.expr import node_count

    assert node_count(e) < 2000


def test_rendered_expressions_parse_back():
    for D, a in [(cycle_db(3), (1, 2)), (unary_db(2, True), ()), (disjoint_copies(cycle_db(2), 2), (1,))]:
        e = distinguishing_expression(D, a, 2)
        back = parse_expression(render_expression(e), D.schema, D.vocab)
        assert back == e
        assert set(evaluate(back, D)) == set(evaluate(e, D))
