"""The semijoin game: 0-round conditions, legal answers, finite and infinite solving.

A position is a pair of tuples, one from each database's tuple space (or the
empty tuple). ``W_0`` holds the positions satisfying the 0-round conditions;
``W_{k+1}`` keeps the positions of ``W_k`` where every spoiler move has a
legal answer landing back in ``W_k``. The survival rank of a position is the
largest ``k`` with the position in ``W_k``: ``-1`` when the 0-round
conditions already fail, ``math.inf`` when it lies in the greatest fixpoint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional, Union

from .errors import NoWinningMove, ValidationError
from .model import Database, sorted_tuples, tuple_key, tuple_space, type_key

LEFT, RIGHT = "left", "right"
SPOILER, DUPLICATOR = "spoiler", "duplicator"
Rank = Union[int, float]


@dataclass(frozen=True)
class Configuration:
    left: tuple
    right: tuple

    def __str__(self):
        from .parser import render_tuple

        return f"<{render_tuple(self.left)}, {render_tuple(self.right)}>"


@dataclass
class SpoilerStrategy:
    """A spoiler move tree. ``move`` is None when the 0-round conditions fail."""

    config: Configuration
    rank: int
    move: Optional[tuple[str, tuple]] = None
    replies: dict = field(default_factory=dict)

    def depth(self) -> int:
        if self.move is None:
            return 0
        return 1 + max((r.depth() for r in self.replies.values()), default=0)

    def lines(self, indent: int = 0) -> list[str]:
        from .parser import render_tuple

        pad = "  " * indent
        if self.move is None:
            return [f"{pad}{self.config}: 0-round conditions fail"]
        side, t = self.move
        out = [f"{pad}{self.config}: spoiler plays {render_tuple(t)} on the {side}"]
        if not self.replies:
            out.append(f"{pad}  no legal answer")
        for answer, sub in self.replies.items():
            out.append(f"{pad}  answer {render_tuple(answer)}:")
            out.extend(sub.lines(indent + 2))
        return out


@dataclass
class GameVerdict:
    winner: str
    rank: Rank
    rounds: Rank
    config: Configuration
    strategy: Union[SpoilerStrategy, frozenset, None] = None

    @property
    def spoiler_rounds(self) -> Optional[int]:
        """Rounds the spoiler needs to win (``rank + 1``), or None."""
        if self.winner != SPOILER:
            return None
        return int(self.rank) + 1


class SemijoinGame:
    """Game arena for a pair of databases over the same schema and vocabulary.

    Rank iteration is lazy: ``W_k`` is only computed as far as some query
    needs it, and results are kept for later queries.
    """

    def __init__(self, A: Database, B: Database):
        if dict(A.schema) != dict(B.schema):
            raise ValidationError("databases have different schemas")
        if A.vocab != B.vocab:
            raise ValidationError("databases have different vocabularies")
        self.A, self.B = A, B
        self.vocab = A.vocab
        self.space = {LEFT: sorted_tuples(tuple_space(A)), RIGHT: sorted_tuples(tuple_space(B))}
        self.positions = {s: sorted_tuples(set(ts) | {()}) for s, ts in self.space.items()}
        self.index = {s: {t: i for i, t in enumerate(ts)} for s, ts in self.positions.items()}
        dbs = {LEFT: A, RIGHT: B}
        # membership profiles, indexed by position
        self.profile = {s: [dbs[s].profile(t) for t in self.positions[s]] for s in dbs}
        self._moves = {s: self._move_table(s) for s in dbs}
        n_left, n_right = len(self.positions[LEFT]), len(self.positions[RIGHT])
        self._rank = [[None] * n_right for _ in range(n_left)]
        self._alive = set()
        for i, a in enumerate(self.positions[LEFT]):
            for j, b in enumerate(self.positions[RIGHT]):
                if self._win0_idx(i, j):
                    self._alive.add((i, j))
                else:
                    self._rank[i][j] = -1
        self._sweeps = 0
        self._stable = False

    # ------------------------------------------------------------------
    # building blocks

    def _move_table(self, side: str) -> list[dict]:
        """For each position tuple p: (profile(c), joint type of p and c) -> [c]."""
        ts = self.positions[side]
        prof = self.profile[side]
        moves = [self.index[side][c] for c in self.space[side]]
        table = []
        for p in ts:
            groups: dict = {}
            for k in moves:
                c = ts[k]
                key = (len(c), prof[k], type_key(p + c, self.vocab))
                groups.setdefault(key, []).append(k)
            table.append(groups)
        return table

    def _win0_idx(self, i: int, j: int) -> bool:
        a, b = self.positions[LEFT][i], self.positions[RIGHT][j]
        return (
            len(a) == len(b)
            and self.profile[LEFT][i] == self.profile[RIGHT][j]
            and type_key(a, self.vocab) == type_key(b, self.vocab)
        )

    def _idx(self, side: str, t) -> int:
        t = tuple(t)
        try:
            return self.index[side][t]
        except KeyError:
            from .parser import render_tuple

            valid = ", ".join(render_tuple(u) for u in self.positions[side])
            raise ValidationError(
                f"{render_tuple(t)} is not in the {side} tuple space; valid tuples: {valid}"
            ) from None

    def _pos(self, a, b) -> tuple[int, int]:
        return self._idx(LEFT, a), self._idx(RIGHT, b)

    def _survives(self, i: int, j: int, alive: set) -> bool:
        mA, mB = self._moves[LEFT], self._moves[RIGHT]
        for key, cs in mA[i].items():
            ds = mB[j].get(key, ())
            for c in cs:
                if not any((c, d) in alive for d in ds):
                    return False
        for key, ds in mB[j].items():
            cs = mA[i].get(key, ())
            for d in ds:
                if not any((c, d) in alive for c in cs):
                    return False
        return True

    def _sweep(self) -> bool:
        """Compute W_{k+1} from W_k. Returns False once stable."""
        if self._stable:
            return False
        alive = self._alive
        removed = [p for p in sorted(alive) if not self._survives(*p, alive)]
        for i, j in removed:
            self._rank[i][j] = self._sweeps
        self._alive = alive.difference(removed)
        self._sweeps += 1
        if not removed:
            self._stable = True
            for i, j in self._alive:
                self._rank[i][j] = math.inf
        return bool(removed)

    def compute(self, rounds: Rank = math.inf) -> None:
        """Run sweeps until W_rounds is known (or the fixpoint is reached)."""
        while not self._stable and self._sweeps < rounds:
            self._sweep()

    def _rank_idx(self, i: int, j: int, rounds: Rank = math.inf) -> Rank:
        """Exact survival rank if below ``rounds``, else at least ``rounds``."""
        self.compute(rounds)
        r = self._rank[i][j]
        if r is None:
            return rounds
        return r

    # ------------------------------------------------------------------
    # public queries

    def win0(self, a, b) -> bool:
        i, j = self._pos(a, b)
        return self._win0_idx(i, j)

    def legal_answers(self, cfg: Configuration, side: str, move) -> list[tuple]:
        """Legal duplicator answers, in canonical order."""
        other = RIGHT if side == LEFT else LEFT
        move = tuple(move)
        if move not in set(self.space[side]):
            raise ValidationError(f"{move} is not a move in the {side} tuple space")
        i, j = self._pos(cfg.left, cfg.right)
        here, there = (i, j) if side == LEFT else (j, i)
        k = self.index[side][move]
        key = (len(move), self.profile[side][k], type_key(self.positions[side][here] + move, self.vocab))
        return [self.positions[other][d] for d in self._moves[other][there].get(key, ())]

    def survival_rank(self, a, b, rounds: Rank = math.inf) -> Rank:
        i, j = self._pos(a, b)
        return self._rank_idx(i, j, rounds)

    def region(self, rounds: Rank = math.inf) -> frozenset:
        """Positions in W_rounds (the fixpoint for ``math.inf``)."""
        self.compute(rounds)
        L, R = self.positions[LEFT], self.positions[RIGHT]
        out = set()
        for i in range(len(L)):
            for j in range(len(R)):
                r = self._rank[i][j]
                if r is None or r >= rounds:
                    out.add(Configuration(L[i], R[j]))
        return frozenset(out)

    def solve(self, a, b, rounds: Rank = math.inf, certificate: bool = True) -> GameVerdict:
        i, j = self._pos(a, b)
        r = self._rank_idx(i, j, rounds)
        cfg = Configuration(tuple(a), tuple(b))
        if r >= rounds:
            strategy = self.region(rounds) if certificate else None
            return GameVerdict(DUPLICATOR, min(r, rounds), rounds, cfg, strategy)
        strategy = self.spoiler_strategy(a, b) if certificate else None
        return GameVerdict(SPOILER, r, rounds, cfg, strategy)

    def _answers_idx(self, i: int, j: int, side: str, k: int) -> list[int]:
        other = RIGHT if side == LEFT else LEFT
        here, there = (i, j) if side == LEFT else (j, i)
        p = self.positions[side][here]
        c = self.positions[side][k]
        key = (len(c), self.profile[side][k], type_key(p + c, self.vocab))
        return list(self._moves[other][there].get(key, ()))

    def _succ(self, i, j, side, k, d) -> tuple[int, int]:
        return (k, d) if side == LEFT else (d, k)

    def spoiler_moves(self) -> list[tuple[str, tuple]]:
        return [(s, t) for s in (LEFT, RIGHT) for t in self.space[s]]

    def best_duplicator_move(self, cfg: Configuration, side: str, move) -> Optional[tuple]:
        """Legal answer with the highest successor rank; ties in canonical order."""
        i, j = self._pos(cfg.left, cfg.right)
        if tuple(move) not in set(self.space[side]):
            raise ValidationError(f"{move} is not a move in the {side} tuple space")
        k = self._idx(side, move)
        other = RIGHT if side == LEFT else LEFT
        best, best_rank = None, None
        for d in self._answers_idx(i, j, side, k):
            r = self._rank_idx(*self._succ(i, j, side, k, d))
            if best_rank is None or r > best_rank:
                best, best_rank = d, r
        return None if best is None else self.positions[other][best]

    def _best_spoiler_idx(self, i: int, j: int) -> tuple[str, int]:
        r = self._rank_idx(i, j)
        if r == math.inf:
            raise NoWinningMove("the duplicator wins from this configuration")
        for side in (LEFT, RIGHT):
            for t in self.space[side]:
                k = self.index[side][t]
                if all(
                    self._rank_idx(*self._succ(i, j, side, k, d)) <= r - 1
                    for d in self._answers_idx(i, j, side, k)
                ):
                    return side, k
        raise AssertionError("rank iteration is inconsistent")  # pragma: no cover

    def best_spoiler_move(self, cfg: Configuration) -> tuple[str, tuple]:
        """A move after which every legal answer has rank at most ``rank - 1``.

        Raises NoWinningMove when the duplicator wins the infinite game, and
        ValueError when the 0-round conditions already fail (no move needed).
        """
        i, j = self._pos(cfg.left, cfg.right)
        if self._rank_idx(i, j) == -1:
            raise ValueError("the spoiler has already won: 0-round conditions fail")
        side, k = self._best_spoiler_idx(i, j)
        return side, self.positions[side][k]

    def engine_spoiler_move(self, cfg: Configuration) -> tuple[str, tuple]:
        """Winning move if there is one, else the most awkward move for the duplicator.

        Losing moves are ranked by the best answer's rank, then by preferring
        non-empty tuples, then by how few answers reach that rank; remaining
        ties go to canonical order.
        """
        i, j = self._pos(cfg.left, cfg.right)
        if self._rank_idx(i, j) != math.inf:
            return self.best_spoiler_move(cfg)
        best, best_key = None, None
        for side, t in self.spoiler_moves():
            k = self.index[side][t]
            ranks = [self._rank_idx(*self._succ(i, j, side, k, d)) for d in self._answers_idx(i, j, side, k)]
            top = max(ranks, default=-1)
            key = (top, len(t) == 0, ranks.count(top))
            if best_key is None or key < best_key:
                best, best_key = (side, t), key
        return best

    def spoiler_strategy(self, a, b) -> SpoilerStrategy:
        """Winning move tree for the spoiler from a position of finite rank."""
        memo: dict = {}

        def build(i, j) -> SpoilerStrategy:
            if (i, j) in memo:
                return memo[(i, j)]
            r = self._rank_idx(i, j)
            cfg = Configuration(self.positions[LEFT][i], self.positions[RIGHT][j])
            node = SpoilerStrategy(cfg, r)
            memo[(i, j)] = node
            if r == -1:
                return node
            side, k = self._best_spoiler_idx(i, j)
            node.move = (side, self.positions[side][k])
            other = RIGHT if side == LEFT else LEFT
            for d in self._answers_idx(i, j, side, k):
                node.replies[self.positions[other][d]] = build(*self._succ(i, j, side, k, d))
            return node

        i, j = self._pos(a, b)
        if self._rank_idx(i, j) == math.inf:
            raise NoWinningMove("the duplicator wins from this configuration")
        return build(i, j)


@lru_cache(maxsize=64)
def game(A: Database, B: Database) -> SemijoinGame:
    """Shared arena per database pair."""
    return SemijoinGame(A, B)


def win0(A: Database, B: Database, a, b) -> bool:
    return game(A, B).win0(a, b)


def legal_answers(A: Database, B: Database, cfg: Configuration, side: str, move) -> set:
    return set(game(A, B).legal_answers(cfg, side, move))


def solve_finite(A: Database, B: Database, a, b, m: int, certificate: bool = True) -> GameVerdict:
    if m < 0:
        raise ValueError("number of rounds must be non-negative")
    return game(A, B).solve(a, b, m, certificate)


def solve_infinite(A: Database, B: Database, a, b, certificate: bool = True) -> GameVerdict:
    return game(A, B).solve(a, b, math.inf, certificate)


def best_duplicator_move(A, B, cfg: Configuration, side: str, move) -> Optional[tuple]:
    return game(A, B).best_duplicator_move(cfg, side, move)


def best_spoiler_move(A, B, cfg: Configuration) -> tuple[str, tuple]:
    return game(A, B).best_spoiler_move(cfg)


def canonical(ts: Iterable[tuple]) -> list[tuple]:
    return sorted(ts, key=tuple_key)
