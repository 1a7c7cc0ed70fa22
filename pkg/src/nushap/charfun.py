"""Characteristic functions over feature subsets, marginal contributions and criticality."""

from __future__ import annotations

from typing import Callable

from nushap._bits import as_mask, members
from nushap.errors import DegenerateProblemError, ValidationError

AXP = "axp"
EXPECTATION = "expectation"
CUSTOM = "custom"

# entries kept per game; permutation sampling over many features would otherwise grow without bound
MEMO_LIMIT = 1 << 21


class Game:
    """A cooperative game on players ``0..n-1`` with ``value(empty) == 0``.

    ``value_fn`` receives a bitmask.  Values are memoised by bitmask; plain
    dict reads and writes are atomic under the interpreter lock, and any
    two writers for one key store the same value, so concurrent use is safe.
    """

    def __init__(self, n: int, value_fn: Callable[[int], float], kind: str = CUSTOM,
                 problem=None, simple: bool = False, offset: float = 0.0, check_empty: bool = True):
        if n < 1:
            raise ValidationError("a game needs at least one player")
        self.n = n
        self.kind = kind
        self.problem = problem
        self.simple = simple
        self.offset = offset
        self._fn = value_fn
        self._memo: dict[int, float] = {}
        empty = self.value_mask(0)
        if check_empty and empty != 0:
            raise ValidationError(f"characteristic function must vanish on the empty set, got {empty}")

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def value_mask(self, mask: int) -> float:
        v = self._memo.get(mask)
        if v is None:
            v = self._fn(mask)
            if len(self._memo) < MEMO_LIMIT:
                self._memo[mask] = v
        return v

    def value(self, S) -> float:
        return self.value_mask(as_mask(S, self.n))

    def raw_value(self, S) -> float:
        """Value before the empty-set shift (differs only for expectation games)."""
        return self.value(S) + self.offset

    def __call__(self, S) -> float:
        return self.value(S)

    def __repr__(self):
        return f"Game(n={self.n}, kind={self.kind!r})"


def _check_nondegenerate(problem) -> None:
    if problem.is_weak_axp(0):
        raise DegenerateProblemError(
            "the empty set is already a weak AXp: no disagreeing point exists, so nu_a(empty) = 1")


def cf_axp(problem, S) -> int:
    """1 if fixing the features in S to the instance's values suffices for the prediction, else 0."""
    _check_nondegenerate(problem)
    return int(problem.is_weak_axp(S))


def axp_game(problem) -> Game:
    _check_nondegenerate(problem)
    return Game(problem.n_features, lambda mask: float(problem.is_weak_axp(mask)),
                kind=AXP, problem=problem, simple=True)


def cf_exp(problem, S) -> float:
    """Mean prediction over the points (or rows) similar to the instance on S."""
    return problem.expected_value(S)


def expectation_game(problem) -> Game:
    """Expectation game shifted by its empty-set value so that ``value(empty) == 0``."""
    base = problem.expected_value(0)
    return Game(problem.n_features, lambda mask: problem.expected_value(mask) - base if mask else 0.0,
                kind=EXPECTATION, problem=problem, offset=base)


def raw_expectation_game(problem) -> Game:
    """Unshifted expectation game.  Accepted by the exact engines, rejected by the estimator."""
    return Game(problem.n_features, problem.expected_value, kind=EXPECTATION,
                problem=problem, check_empty=False)


def delta(game: Game, i: int, S) -> float:
    """Marginal contribution of player i to coalition S (i must not be in S)."""
    mask = as_mask(S, game.n)
    if not 0 <= i < game.n:
        raise IndexError(f"player {i} out of range")
    if mask >> i & 1:
        raise ValidationError(f"player {i} already belongs to {members(mask)}")
    return game.value_mask(mask | 1 << i) - game.value_mask(mask)


def crit(problem_or_game, i: int, S) -> bool:
    """Feature i turns the non-sufficient fixed set S into a sufficient one."""
    game = problem_or_game if isinstance(problem_or_game, Game) else axp_game(problem_or_game)
    if game.kind != AXP:
        raise ValidationError("criticality is defined for axp games only")
    mask = as_mask(S, game.n)
    if mask >> i & 1:
        raise ValidationError(f"feature {i} already belongs to {members(mask)}")
    return game.value_mask(mask | 1 << i) == 1 and game.value_mask(mask) == 0
