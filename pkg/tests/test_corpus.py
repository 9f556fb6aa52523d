from pathlib import Path

import pytest

from semijoin.corpus import (
    CORPUS,
    cycle_db,
    disjoint_copies,
    entry,
    expr_at_least,
    expr_cycle,
    expr_path,
    expr_simple_path2,
    expr_simple_path2_literal,
    expr_T_subset_RxS,
    figure1,
    ordered_composition_dbs,
    ordered_product_dbs,
    unary_db,
)
from semijoin.errors import ValidationError
from semijoin.evaluator import evaluate, is_empty
from semijoin.expr import Rel, Semijoin
from semijoin.model import Database, active_domain, eq, x, y
from semijoin.oracle import has_simple_path
from semijoin.parser import parse_database, parse_expression, render_database, render_expression

GOLDEN = Path(__file__).parent / "golden"

FIGURE1_A = """\
rel R/1 { (a) (b) }
rel S/1 { (1) (2) }
rel T/2 { (a,1) (a,2) (b,1) (b,2) }
"""

FIGURE1_B = """\
rel R/1 { (a) (b) (c) }
rel S/1 { (1) (2) (3) }
rel T/2 { (a,1) (a,2) (b,2) (b,3) (c,1) (c,3) }
"""


def test_figure1_matches_hand_written_text():
    A, B = figure1()
    assert parse_database(FIGURE1_A) == A
    assert parse_database(FIGURE1_B) == B
    assert render_database(A) == FIGURE1_A


@pytest.mark.parametrize("name", [n for n, e in CORPUS.items() if e.is_pair])
def test_pair_entries_match_golden_files(name):
    A, B = CORPUS[name].build()
    for side, D in (("A", A), ("B", B)):
        text = (GOLDEN / f"{name}-{side}.db").read_text()
        assert render_database(D) == text
        assert parse_database(text) == D


@pytest.mark.parametrize("name", [n for n, e in CORPUS.items() if not e.is_pair])
def test_expression_entries_match_golden_files(name):
    e = CORPUS[name].build()
    text = (GOLDEN / f"{name}.sa").read_text()
    assert render_expression(e) + "\n" == text
    schema = {r.name: r.arity for r in _relations(e)}
    assert parse_expression(text, schema, _vocab_for(name)) == e


def _relations(e):
    from semijoin.expr import walk

    return [n for n in walk(e) if isinstance(n, Rel)]


def _vocab_for(name):
    from semijoin.model import EQUALITY, ORDERED

    return ORDERED if name.startswith("at-least") else EQUALITY


def test_every_golden_file_belongs_to_an_entry():
    names = {p.name for p in GOLDEN.iterdir()}
    expected = set()
    for n, e in CORPUS.items():
        expected |= {f"{n}-A.db", f"{n}-B.db"} if e.is_pair else {f"{n}.sa"}
    assert names == expected


def test_ordered_constructions():
    A, B = ordered_product_dbs(5)
    assert len(A["T"]) == 25 and len(B["T"]) == 24
    assert set(A["T"]) - set(B["T"]) == {(3, 8)}
    assert A.vocab.order
    C, D = ordered_composition_dbs(5)
    assert len(C["T"]) == 25 and set(C["T"]) - set(D["T"]) == {(3, 8)}
    assert set(C["R"]) == {(i, 11) for i in range(1, 6)}
    for build in (ordered_product_dbs, ordered_composition_dbs):
        for bad in (2, 4, 1):
            with pytest.raises(ValidationError):
                build(bad)


def test_path_and_count_expressions():
    assert expr_path(1) == Rel("R", 2)
    assert expr_at_least(1) == Rel("S", 1)
    R = Rel("R", 2)
    assert expr_path(3) == Semijoin(eq(x(2), y(1)), R, Semijoin(eq(x(2), y(1)), R, R))
    with pytest.raises(ValidationError):
        expr_path(0)
    with pytest.raises(ValidationError):
        expr_at_least(0)


def test_simple_path_on_a_two_cycle():
    D = cycle_db(2)
    assert not has_simple_path(D["R"], 2)
    # the commonly stated condition forgets that the endpoints must differ
    assert not is_empty(expr_simple_path2_literal(), D)
    assert is_empty(expr_simple_path2(), D)
    assert not is_empty(expr_simple_path2(), cycle_db(3))


def test_cycle_expressions():
    assert not is_empty(expr_cycle(1), Database({"R": [(1, 1)]}))
    assert is_empty(expr_cycle(1), cycle_db(2))
    assert not is_empty(expr_cycle(2), cycle_db(2))
    assert is_empty(expr_cycle(2), cycle_db(3))
    with pytest.raises(ValidationError):
        expr_cycle(3)


def test_containment_expression_with_wider_factors():
    D = Database({"T": [(1, 2, 3, 4)], "R": [(1, 2)], "S": [(3, 4)]})
    assert is_empty(expr_T_subset_RxS(2, 2), D)
    D = Database({"T": [(1, 2, 3, 5)], "R": [(1, 2)], "S": [(3, 4)]})
    assert set(evaluate(expr_T_subset_RxS(2, 2), D)) == {(1, 2, 3, 5)}


def test_disjoint_copies():
    D = cycle_db(3)
    two = disjoint_copies(D, 2)
    assert len(two["R"]) == 6
    assert active_domain(two) == set(range(1, 7))
    assert disjoint_copies(D, 1) == D
    with pytest.raises(ValidationError):
        disjoint_copies(D, 0)


def test_cycle_and_unary_constructors():
    assert set(cycle_db(1)["R"]) == {(1, 1)}
    with pytest.raises(ValidationError):
        cycle_db(0)
    assert len(unary_db(4)["S"]) == 4 and unary_db(2, True).vocab.order


def test_registry_lookup():
    assert entry("figure1").is_pair and not entry("path-2").is_pair
    with pytest.raises(KeyError):
        entry("nope")
