"""Rankings, rank-biased overlap and the boolean-function census of misleading scores."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from itertools import product
from typing import IO, Iterator, Mapping, Sequence

import numpy as np

from nushap.core import FeatureSpace, Instance, SimilarityConfig
from nushap.errors import CapExceededError, ValidationError
from nushap.shapley import ScoreReport

CENSUS_MAX_VARS = 4
CENSUS_TOL = 1e-12


@dataclass(frozen=True)
class Ranking:
    """Feature indices, most important first."""

    order: tuple[int, ...]
    rule: str = "desc-score/asc-index"

    def __len__(self):
        return len(self.order)

    def __iter__(self):
        return iter(self.order)


@dataclass(frozen=True)
class RboParams:
    p: float = 0.5
    depth: int = 5

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise ValidationError(f"persistence must lie in (0, 1), got {self.p}")
        if self.depth < 1:
            raise ValidationError(f"depth must be >= 1, got {self.depth}")


def rank(report: ScoreReport | Sequence[float] | Mapping[int, float], key: str = "raw") -> Ranking:
    """Sort features by descending score (or |score|); ties go to the lower index."""
    if isinstance(report, ScoreReport):
        items = list(enumerate(report.scores))
    elif isinstance(report, Mapping):
        items = list(report.items())
    else:
        items = list(enumerate(report))
    if key == "raw":
        keyed = [(-s, i) for i, s in items]
    elif key == "absolute":
        keyed = [(-abs(s), i) for i, s in items]
    else:
        raise ValidationError(f"rank key must be 'raw' or 'absolute', got {key!r}")
    if not all(math.isfinite(k) for k, _ in keyed):
        raise ValidationError("cannot rank non-finite scores")
    return Ranking(tuple(i for _, i in sorted(keyed)), f"{key}-desc/asc-index")


def rbo(a: Ranking | Sequence[int], b: Ranking | Sequence[int], params: RboParams = RboParams(),
        normalized: bool = True) -> float:
    """Truncated rank-biased overlap at ``params.depth``.

    ``(1-p) * sum_{k<=d} p^(k-1) * |a[:k] & b[:k]| / k``, divided by
    ``1 - p^d`` when normalised so that identical rankings score exactly 1.
    The depth is capped at the shorter ranking's length.  The lists need not
    share their items; disjoint rankings score 0.
    """
    a, b = tuple(a), tuple(b)
    if len(set(a)) != len(a) or len(set(b)) != len(b):
        raise ValidationError("rankings must not repeat items")
    p = params.p
    d = min(params.depth, len(a), len(b))
    if d == 0:
        raise ValidationError("cannot compare empty rankings")
    seen_a, seen_b = set(), set()
    overlap = 0
    total = 0.0
    for k in range(d):
        x, y = a[k], b[k]
        if x == y:
            overlap += 1
        else:
            overlap += (x in seen_b) + (y in seen_a)
        seen_a.add(x)
        seen_b.add(y)
        total += p**k * overlap / (k + 1)
    score = (1 - p) * total
    if normalized:
        score /= 1 - p**d
    return min(score, 1.0) if normalized else score


def compare_reports(a: ScoreReport, b: ScoreReport, params: RboParams = RboParams()) -> dict[str, float]:
    """RBO between the raw ranking of ``a`` and the raw / absolute rankings of ``b``."""
    if len(a) != len(b):
        raise ValidationError(f"reports cover {len(a)} and {len(b)} features")
    ra = rank(a, "raw")
    rb_raw, rb_abs = rank(b, "raw"), rank(b, "absolute")
    return {
        "rbo_raw": rbo(ra, rb_raw, params),
        "rbo_abs": rbo(ra, rb_abs, params),
        "rbo_raw_unnormalized": rbo(ra, rb_raw, params, normalized=False),
        "rbo_abs_unnormalized": rbo(ra, rb_abs, params, normalized=False),
    }


@dataclass(frozen=True)
class CensusRow:
    function_id: int
    instance: int
    issue_e: bool
    issue_a: bool


@dataclass
class CensusSummary:
    k: int
    functions: int = 0
    cases: int = 0
    issue_e: int = 0
    issue_a: int = 0

    def to_dict(self) -> dict:
        return {"vars": self.k, "functions": self.functions, "cases": self.cases,
                "issue_e": self.issue_e, "issue_a": self.issue_a}


def instance_label(k: int, index: int) -> str:
    """Bit string of the instance, feature 1 first (``"10"`` is x1=1, x2=0)."""
    return "".join(str(b) for b in np.unravel_index(index, (2,) * k))


def function_outputs(k: int, function_id: int) -> list[int]:
    """Truth table of a boolean function: output at point index x is bit x of the id."""
    return [function_id >> x & 1 for x in range(1 << k)]


class _CensusTables:
    """Precomputed, function-independent structure for k boolean variables."""

    def __init__(self, k: int):
        self.k = k
        n_pts = 1 << k
        n_sets = 1 << k
        points = np.array(list(product((0, 1), repeat=k)), dtype=np.int64)
        self.points = points
        # consistent[v, S, x]: x agrees with v on every feature of S
        eq = points[:, None, :] == points[None, :, :]          # v, x, j
        consistent = np.ones((n_pts, n_sets, n_pts), dtype=bool)
        for s in range(n_sets):
            for j in range(k):
                if s >> j & 1:
                    consistent[:, s, :] &= eq[:, :, j]
        self.consistent = consistent
        self.counts = consistent.sum(axis=2)
        masks = np.arange(n_sets)
        self.without = [masks[(masks >> i & 1) == 0] for i in range(k)]
        sizes = np.array([bin(s).count("1") for s in range(n_sets)])
        self.weights = [np.array([math.factorial(sz) * math.factorial(k - sz - 1) / math.factorial(k)
                                  for sz in sizes[w]]) for w in self.without]
        # subset-minimality test needs each set with one member removed
        self.drops = [[s & ~(1 << j) for j in range(k) if s >> j & 1] for s in range(n_sets)]


def _census_batch(t: _CensusTables, outputs: np.ndarray):
    """issue flags (batch, instances) for a batch of truth tables (batch, points)."""
    k = t.k
    f = outputs.astype(float)
    # expectation game values nu_e[b, v, S]
    nu_e = np.einsum("bx,vsx->bvs", f, t.consistent.astype(float)) / t.counts[None]
    mismatch = outputs[:, None, :] != outputs[:, :, None]   # b, v, x
    violated = np.einsum("bvx,vsx->bvs", mismatch.astype(np.int32), t.consistent.astype(np.int32))
    waxp = violated == 0
    nu_a = waxp.astype(float)
    n_sets = 1 << k
    minimal = waxp.copy()
    for s in range(n_sets):
        for d in t.drops[s]:
            minimal[:, :, s] &= ~waxp[:, :, d]
    relevant = np.zeros(waxp.shape[:2] + (k,), dtype=bool)
    for s in range(n_sets):
        for j in range(k):
            if s >> j & 1:
                relevant[:, :, j] |= minimal[:, :, s]
    issue_e = np.zeros(waxp.shape[:2], dtype=bool)
    issue_a = np.zeros(waxp.shape[:2], dtype=bool)
    for i in range(k):
        w = t.without[i]
        de = nu_e[:, :, w | (1 << i)] - nu_e[:, :, w]
        da = nu_a[:, :, w | (1 << i)] - nu_a[:, :, w]
        sc_e = de @ t.weights[i]
        sc_a = da @ t.weights[i]
        irrelevant = ~relevant[:, :, i]
        issue_e |= irrelevant & (np.abs(sc_e) > CENSUS_TOL)
        issue_a |= irrelevant & (sc_a != 0)
    return issue_e, issue_a


def _iter_vectorized(k: int, batch: int) -> Iterator[CensusRow]:
    t = _CensusTables(k)
    n_pts = 1 << k
    n_funcs = 1 << n_pts
    bit_idx = np.arange(n_pts)
    for start in range(0, n_funcs, batch):
        ids = np.arange(start, min(start + batch, n_funcs), dtype=np.int64)
        outputs = ((ids[:, None] >> bit_idx[None, :]) & 1).astype(np.int8)
        nonconst = (outputs.min(axis=1) != outputs.max(axis=1))
        ids, outputs = ids[nonconst], outputs[nonconst]
        if not len(ids):
            continue
        issue_e, issue_a = _census_batch(t, outputs)
        for r, fid in enumerate(ids.tolist()):
            for v in range(n_pts):
                yield CensusRow(fid, v, bool(issue_e[r, v]), bool(issue_a[r, v]))


def _iter_reference(k: int) -> Iterator[CensusRow]:
    from nushap.charfun import axp_game, expectation_game
    from nushap.explain import ModelProblem, relevancy
    from nushap.models import truth_table_from
    from nushap.shapley import shapley_exact_subsets

    space = FeatureSpace.boolean(k)
    cfg = SimilarityConfig.exact(k)
    n_pts = 1 << k
    points = list(product((0, 1), repeat=k))
    for fid in range(1 << n_pts):
        outputs = function_outputs(k, fid)
        if len(set(outputs)) == 1:
            continue
        model = truth_table_from(space, outputs)
        for v in range(n_pts):
            problem = ModelProblem(model, Instance(points[v], outputs[v]), cfg)
            rel = relevancy(problem)
            sc_e = shapley_exact_subsets(expectation_game(problem)).scores
            sc_a = shapley_exact_subsets(axp_game(problem)).scores
            irrelevant = [i for i in range(k) if not rel[i]]
            yield CensusRow(fid, v,
                            any(abs(sc_e[i]) > CENSUS_TOL for i in irrelevant),
                            any(sc_a[i] != 0 for i in irrelevant))


def iter_census(k: int, engine: str = "vectorized", batch: int = 4096) -> Iterator[CensusRow]:
    """Stream one row per (non-constant function, instance), ordered by (function id, instance)."""
    if not 1 <= k <= CENSUS_MAX_VARS:
        raise CapExceededError(f"census supports 1..{CENSUS_MAX_VARS} variables, got {k}")
    if engine == "vectorized":
        return _iter_vectorized(k, batch)
    if engine == "reference":
        return _iter_reference(k)
    raise ValidationError(f"unknown census engine {engine!r}")


def flaw_census(k: int, out: IO[str] | None = None, engine: str = "vectorized") -> CensusSummary:
    """Count cases where an irrelevant feature gets a nonzero score.

    ``issue_e``: under the expectation game (|score| > 1e-12);
    ``issue_a``: under the axp game (any nonzero).  Rows are written as CSV
    to ``out`` when given.
    """
    summary = CensusSummary(k)
    writer = None
    if out is not None:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["function_id", "instance", "issue_e", "issue_a"])
    last = None
    for row in iter_census(k, engine):
        if row.function_id != last:
            summary.functions += 1
            last = row.function_id
        summary.cases += 1
        summary.issue_e += row.issue_e
        summary.issue_a += row.issue_a
        if writer is not None:
            writer.writerow([row.function_id, instance_label(k, row.instance), int(row.issue_e), int(row.issue_a)])
    return summary
