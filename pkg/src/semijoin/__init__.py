"""Semijoin algebra workbench: evaluation, games and distinguishing expressions."""
from .errors import BudgetExceeded, NoWinningMove, ParseError, SemijoinError, ValidationError
from .model import (
    EQUALITY,
    ORDERED,
    Database,
    Predicate,
    Vocabulary,
    active_domain,
    atomic_type,
    eval_condition,
    joint_atomic_type,
    tuple_space,
)
from .expr import Diff, Expression, Project, Rel, Select, Semijoin, Union, intersect
from .evaluator import Relation, evaluate, is_empty
from .parser import (
    parse_condition,
    parse_database,
    parse_expression,
    parse_tuple,
    render_condition,
    render_database,
    render_expression,
)
from .game import (
    DUPLICATOR,
    LEFT,
    RIGHT,
    SPOILER,
    Configuration,
    GameVerdict,
    SemijoinGame,
    best_duplicator_move,
    best_spoiler_move,
    legal_answers,
    solve_finite,
    solve_infinite,
    win0,
)
from .distinguisher import (
    Budget,
    Certificate,
    base_expression,
    certify,
    complement_expr,
    distinguishing_expression,
)

__version__ = "0.1.0"
