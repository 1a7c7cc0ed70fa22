"""Exact Shapley values and the permutation-sampling estimator with (epsilon, alpha) guarantees."""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from nushap._bits import from_mask
from nushap.charfun import AXP, EXPECTATION, Game
from nushap.errors import CapExceededError, ValidationError

SUBSETS_CAP = 20
PERMUTATIONS_CAP = 8
BLOCK_SIZE = 256
PILOT_RUNS = 64

KIND_PREFIX = {AXP: "axp", EXPECTATION: "exp"}


@dataclass(frozen=True)
class ScoreReport:
    """Per-feature scores (0-based positions) plus provenance.

    ``kind`` is one of ``axp-exact``, ``axp-estimated``, ``exp-exact``,
    ``exp-estimated`` (or ``custom-*`` for hand-built games).
    """

    scores: tuple[float, ...]
    kind: str
    epsilon: float | None = None
    alpha: float | None = None
    runs: int | None = None
    seed: int | None = None
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "scores", tuple(float(s) for s in self.scores))
        if not all(math.isfinite(s) for s in self.scores):
            raise ValidationError("scores must be finite")

    def __len__(self):
        return len(self.scores)

    def __getitem__(self, i: int) -> float:
        return self.scores[i]

    @property
    def estimated(self) -> bool:
        return self.kind.endswith("estimated")

    def to_dict(self) -> dict:
        out = {"scores": {str(i + 1): s for i, s in enumerate(self.scores)}, "kind": self.kind}
        if self.estimated:
            out.update(epsilon=self.epsilon, alpha=self.alpha, r=self.runs, seed=self.seed)
        out.update(self.extra)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ScoreReport":
        try:
            raw = data["scores"]
            keys = sorted(raw, key=int)
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed score report: {exc}") from None
        if [int(k) for k in keys] != list(range(1, len(keys) + 1)):
            raise ValidationError(f"score report keys must be 1..n, got {keys}")
        return cls(tuple(raw[k] for k in keys), data.get("kind", "unknown"),
                   data.get("epsilon"), data.get("alpha"), data.get("r"), data.get("seed"))


@dataclass(frozen=True)
class EstimatorParams:
    epsilon: float
    alpha: float
    seed: int | None = None
    runs: int | None = None
    value_range: float | None = None
    union_bound: bool = False
    threads: int | None = None

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValidationError(f"epsilon must be > 0, got {self.epsilon}")
        if not 0 < self.alpha < 1:
            raise ValidationError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.runs is not None and self.runs < 1:
            raise ValidationError(f"runs must be >= 1, got {self.runs}")
        if self.value_range is not None and not self.value_range > 0:
            raise ValidationError(f"value range must be > 0, got {self.value_range}")


def required_runs(epsilon: float, alpha: float, value_range: float = 1.0,
                  n_features: int = 1, union_bound: bool = False) -> int:
    """Hoeffding sample size: ceil(ln(2/alpha) * range^2 / (2 epsilon^2)).

    With ``union_bound`` the failure probability is split evenly across
    ``n_features`` so the guarantee holds for all features simultaneously.
    """
    if not epsilon > 0:
        raise ValidationError(f"epsilon must be > 0, got {epsilon}")
    if not 0 < alpha < 1:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
    if not value_range > 0:
        raise ValidationError(f"value range must be > 0, got {value_range}")
    if union_bound:
        alpha = alpha / n_features
    x = math.log(2 / alpha) * value_range**2 / (2 * epsilon**2)
    # ln() of an exact power of e may land one ulp above the integer
    return max(1, math.ceil(x * (1 - 1e-12)))


def _kind(game: Game, mode: str) -> str:
    return f"{KIND_PREFIX.get(game.kind, 'custom')}-{mode}"


def _weights(n: int) -> list[Fraction]:
    return [Fraction(math.factorial(s) * math.factorial(n - s - 1), math.factorial(n)) for s in range(n)]


def _all_values(game: Game) -> np.ndarray:
    size = 1 << game.n
    values = np.empty(size, dtype=float)
    # Gray-code order: consecutive coalitions differ by one player
    for k in range(size):
        g = k ^ (k >> 1)
        values[g] = game.value_mask(g)
    return values


def shapley_exact_subsets(game: Game, cap: int = SUBSETS_CAP) -> ScoreReport:
    """Weighted sum of marginal contributions over every coalition not containing the player.

    Contributions of each coalition size are summed with ``math.fsum`` and
    combined with the exact rational weights, so integer-valued games give
    exactly rounded results.
    """
    n = game.n
    if n > cap:
        raise CapExceededError(f"{n} players exceed the subset-enumeration cap {cap}")
    values = _all_values(game)
    masks = np.arange(1 << n)
    sizes = np.array([bin(k).count("1") for k in range(1 << n)])
    weights = _weights(n)
    scores = []
    for i in range(n):
        bit = 1 << i
        without = masks[(masks & bit) == 0]
        deltas = values[without | bit] - values[without]
        by_size = sizes[without]
        total = Fraction(0)
        for s in range(n):
            group = deltas[by_size == s]
            if group.size:
                total += weights[s] * Fraction(math.fsum(group.tolist()))
        scores.append(float(total))
    return ScoreReport(tuple(scores), _kind(game, "exact"))


def shapley_exact_permutations(game: Game, cap: int = PERMUTATIONS_CAP) -> ScoreReport:
    """Average marginal contribution over all n! orderings."""
    n = game.n
    if n > cap:
        raise CapExceededError(f"{n} players exceed the permutation-enumeration cap {cap}")
    contributions: list[list[float]] = [[] for _ in range(n)]
    for order in itertools.permutations(range(n)):
        mask, prev = 0, game.value_mask(0)
        for i in order:
            mask |= 1 << i
            cur = game.value_mask(mask)
            contributions[i].append(cur - prev)
            prev = cur
    count = math.factorial(n)
    scores = tuple(float(Fraction(math.fsum(c)) / count) for c in contributions)
    return ScoreReport(scores, _kind(game, "exact"))


def prefixes(order: Sequence[int]) -> dict[int, frozenset[int]]:
    """Map each element of a permutation to the set of elements preceding it."""
    if sorted(order) != list(range(min(order, default=0), min(order, default=0) + len(order))):
        raise ValidationError(f"{list(order)} is not a permutation")
    return {x: frozenset(order[:k]) for k, x in enumerate(order)}


def cgt_trace(game: Game, order: Sequence[int]) -> list[tuple[int, frozenset[int], float]]:
    """(element, prefix, marginal contribution) for one permutation, in permutation order."""
    trace = []
    mask = 0
    for i in order:
        trace.append((i, from_mask(mask), game.value_mask(mask | 1 << i) - game.value_mask(mask)))
        mask |= 1 << i
    return trace


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0, block)))


def _run_block(game: Game, seed: int, block: int, count: int) -> list[float]:
    n = game.n
    rng = _block_rng(seed, block)
    orders = rng.permuted(np.tile(np.arange(n), (count, 1)), axis=1)
    acc = [0.0] * n
    stop_at_win = game.simple
    value = game.value_mask
    for order in orders.tolist():
        mask, prev = 0, 0.0
        for i in order:
            mask |= 1 << i
            cur = value(mask)
            acc[i] += cur - prev
            # simple monotone game: once winning, every later contribution is 0
            if stop_at_win and cur == 1.0:
                break
            prev = cur
    return acc


def _pilot_range(game: Game, seed: int) -> float:
    """Width of the marginal-contribution interval implied by values seen on pilot prefixes."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1, 0)))
    seen = [0.0]
    for order in rng.permuted(np.tile(np.arange(game.n), (PILOT_RUNS, 1)), axis=1).tolist():
        mask = 0
        for i in order:
            mask |= 1 << i
            seen.append(game.value_mask(mask))
    spread = max(seen) - min(seen)
    return 2 * spread if spread > 0 else 1.0


def default_threads() -> int:
    env = os.environ.get("NUSHAP_THREADS")
    return max(1, int(env)) if env else 1


def shapley_estimate_cgt(game: Game, params: EstimatorParams) -> ScoreReport:
    """Estimate Shapley values from ``r`` uniformly sampled permutations.

    Permutations come in blocks of ``BLOCK_SIZE``; block ``b`` draws from
    its own stream derived from ``(seed, b)``, so the result does not depend
    on how many worker threads process the blocks.
    """
    if game.value_mask(0) != 0:
        raise ValidationError("the estimator requires value(empty) == 0")
    seed = params.seed if params.seed is not None else np.random.SeedSequence().entropy
    if params.runs is not None:
        runs = params.runs
        value_range = params.value_range
    else:
        if params.value_range is not None:
            value_range = params.value_range
        elif game.simple:
            value_range = 1.0
        else:
            value_range = _pilot_range(game, seed)
        runs = required_runs(params.epsilon, params.alpha, value_range, game.n, params.union_bound)
    blocks = [(b, min(BLOCK_SIZE, runs - b * BLOCK_SIZE)) for b in range(-(-runs // BLOCK_SIZE))]
    threads = params.threads or default_threads()
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(lambda bc: _run_block(game, seed, *bc), blocks))
    else:
        partials = [_run_block(game, seed, b, c) for b, c in blocks]
    totals = [0.0] * game.n
    for part in partials:
        for i, x in enumerate(part):
            totals[i] += x
    scores = tuple(t / runs for t in totals)
    extra = {"value_range": value_range} if value_range is not None and not game.simple else {}
    return ScoreReport(scores, _kind(game, "estimated"), params.epsilon, params.alpha, runs, int(seed), extra)
