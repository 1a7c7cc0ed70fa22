"""Abductive and contrastive explanations, model-based and sample-based.

Two problem types share one small protocol (``n_features``,
``is_weak_axp``, ``is_weak_cxp``, ``expected_value``, ``axps``, ``cxps``):

* :class:`ModelProblem` quantifies over every point of an enumerable
  feature space.
* :class:`SampleProblem` quantifies over the rows of a dataset.  Deciding
  a weak AXp is a coverage scan: a row whose prediction is not similar to
  ``q`` is *covered* once some fixed feature takes a value not similar to
  the instance's; the set is sufficient iff every such row is covered.
  Rows are packed 64 to a machine word, one bitset per feature.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from nushap._bits import as_mask, from_mask, members, minimal_elements, popcount
from nushap.core import (
    CATEGORICAL,
    DEFAULT_ENUMERATION_CAP,
    Instance,
    SampleSpace,
    SimilarityConfig,
)
from nushap.errors import (
    CapExceededError,
    ConstantModelError,
    EmptyConditioningError,
    ValidationError,
)
from nushap.models import Model

SMALL_INSTANCE_CAP = 20


def _agreement_masks(codes: np.ndarray, tables: Sequence[np.ndarray]) -> np.ndarray:
    """Per point, bitmask of the features on which it is similar to the instance."""
    m = len(tables)
    if m > 62:
        raise CapExceededError(f"bitmask encoding supports at most 62 features, got {m}")
    out = np.zeros(codes.shape[0], dtype=np.int64)
    for j, table in enumerate(tables):
        out |= table[codes[:, j]].astype(np.int64) << j
    return out


def minimal_hitting_sets(family: Iterable[int], cap: int = SMALL_INSTANCE_CAP) -> list[int]:
    """All subset-minimal sets (as bitmasks) intersecting every member of ``family``.

    Exhaustive search by increasing cardinality over the union of the family.
    An empty family is hit by the empty set; a family containing the empty
    set has no hitting set at all.
    """
    family = minimal_elements(family)
    if not family:
        return [0]
    if family[0] == 0:
        return []
    union = 0
    for f in family:
        union |= f
    universe = members(union)
    if len(universe) > cap:
        raise CapExceededError(f"hitting-set search over {len(universe)} features exceeds cap {cap}")
    found: list[int] = []
    for k in range(1, len(universe) + 1):
        for combo in itertools.combinations(universe, k):
            mask = 0
            for i in combo:
                mask |= 1 << i
            if any(f & mask == f for f in found):
                continue
            if all(c & mask for c in family):
                found.append(mask)
    return found


def _sets(masks: Iterable[int]) -> list[frozenset[int]]:
    return [from_mask(x) for x in masks]


class ModelProblem:
    """Explanation problem for a model over an enumerable feature space."""

    def __init__(self, model: Model, instance: Instance, cfg: SimilarityConfig,
                 cap: int = DEFAULT_ENUMERATION_CAP):
        space = model.space
        cfg.check_space(space)
        v_codes = space.encode(instance.v)
        if not cfg.prediction.similar(model.predict(instance.v), instance.q):
            raise ValidationError(
                f"instance prediction {instance.q!r} is not similar to the model output "
                f"{model.predict(instance.v)!r}")
        self.model = model
        self.instance = instance
        self.cfg = cfg
        self.space = space
        self.n_features = space.m
        self.codes = space.all_codes(cap)
        self.predictions = model.table(cap)
        if len(set(self.predictions.tolist())) <= 1:
            raise ConstantModelError("the model is constant over its feature space")
        self.prediction_ok = cfg.prediction.similar_array(self.predictions, instance.q)
        tables = [cfg.feature_table(space, j, space.features[j].domain[c]) for j, c in enumerate(v_codes)]
        self.agree = _agreement_masks(self.codes, tables)
        self._full = (1 << self.n_features) - 1

    def _consistent(self, mask: int) -> np.ndarray:
        return (self.agree & mask) == mask

    def is_weak_axp(self, S) -> bool:
        mask = as_mask(S, self.n_features)
        return bool(self.prediction_ok[self._consistent(mask)].all())

    def is_weak_cxp(self, Y) -> bool:
        free = self._full & ~as_mask(Y, self.n_features)
        return bool((~self.prediction_ok[self._consistent(free)]).any())

    def expected_value(self, S) -> float:
        if self.model.output_kind == CATEGORICAL:
            raise ValidationError("expected value of categorical predictions is undefined")
        mask = as_mask(S, self.n_features)
        sel = self._consistent(mask)
        if not sel.any():
            raise EmptyConditioningError(members(mask))
        return float(np.mean(self.predictions[sel]))

    def _check_small(self, cap: int) -> None:
        if self.n_features > cap:
            raise CapExceededError(f"{self.n_features} features exceed the subset-enumeration cap {cap}")

    def axp_masks(self, cap: int = SMALL_INSTANCE_CAP) -> list[int]:
        self._check_small(cap)
        weak = [self.is_weak_axp(s) for s in range(self._full + 1)]
        return [s for s in range(self._full + 1)
                if weak[s] and not any(weak[s & ~(1 << i)] for i in members(s))]

    def cxp_masks(self, cap: int = SMALL_INSTANCE_CAP) -> list[int]:
        self._check_small(cap)
        weak = [self.is_weak_cxp(s) for s in range(self._full + 1)]
        return [s for s in range(self._full + 1)
                if weak[s] and not any(weak[s & ~(1 << i)] for i in members(s))]

    def axps(self, cap: int = SMALL_INSTANCE_CAP) -> list[frozenset[int]]:
        return _sets(sorted(self.axp_masks(cap), key=lambda x: (popcount(x), x)))

    def cxps(self, cap: int = SMALL_INSTANCE_CAP) -> list[frozenset[int]]:
        return _sets(sorted(self.cxp_masks(cap), key=lambda x: (popcount(x), x)))


@dataclass(frozen=True)
class CxpCatalog:
    """Minimal sample-based CXps plus the raw per-row disagreement sets."""

    n_features: int
    cxp_masks: tuple[int, ...]
    diff_masks: tuple[int, ...]

    @property
    def cxps(self) -> list[frozenset[int]]:
        return _sets(self.cxp_masks)

    @property
    def diffs(self) -> list[frozenset[int]]:
        return _sets(self.diff_masks)

    def check(self) -> None:
        """Raise AssertionError unless the catalog is an antichain covering every diff."""
        for a, b in itertools.permutations(self.cxp_masks, 2):
            if a & b == a:
                raise AssertionError(f"{from_mask(a)} is contained in {from_mask(b)}")
        for d in set(self.diff_masks):
            if not any(c & d == c for c in self.cxp_masks):
                raise AssertionError(f"disagreement set {from_mask(d)} has no catalog subset")

    def is_weak_cxp(self, Y) -> bool:
        y = as_mask(Y, self.n_features)
        return any(c & y == c for c in self.cxp_masks)


class SampleProblem:
    """Explanation problem over a finite dataset."""

    def __init__(self, sample: SampleSpace, instance: Instance, cfg: SimilarityConfig):
        space = sample.space
        cfg.check_space(space)
        if len(sample) == 0:
            raise ValidationError("the dataset has no rows")
        self.sample = sample
        self.instance = instance
        self.cfg = cfg
        self.space = space
        self.n_features = space.m
        self._full = (1 << space.m) - 1
        self.v_codes = space.encode(instance.v)
        agree_pred = cfg.prediction.similar_array(sample.predictions, instance.q)
        if not agree_pred.any():
            raise ValidationError("no row has a prediction similar to the instance's")
        self.disagreeing = np.flatnonzero(~agree_pred)
        n_words = -(-len(self.disagreeing) // 64)
        self._n_words = n_words
        full = np.zeros(n_words * 64, dtype=bool)
        full[: len(self.disagreeing)] = True
        self._all_rows = np.packbits(full, bitorder="little").view(np.uint64)
        self._bits: dict[int, np.ndarray] = {}
        self._tables: dict[int, np.ndarray] = {}
        self._catalog: CxpCatalog | None = None

    def _table(self, j: int) -> np.ndarray:
        table = self._tables.get(j)
        if table is None:
            value = self.space.features[j].domain[self.v_codes[j]]
            table = self._tables[j] = self.cfg.feature_table(self.space, j, value)
        return table

    def _differs(self, j: int) -> np.ndarray:
        """Bool per disagreeing row: its feature-j value is not similar to v_j."""
        return ~self._table(j)[self.sample.codes[self.disagreeing, j]]

    def feature_bits(self, j: int) -> np.ndarray:
        """Packed bitset of the disagreeing rows that fixing feature j covers."""
        bits = self._bits.get(j)
        if bits is None:
            padded = np.zeros(self._n_words * 64, dtype=bool)
            padded[: len(self.disagreeing)] = self._differs(j)
            bits = np.packbits(padded, bitorder="little").view(np.uint64)
            bits.flags.writeable = False
            self._bits[j] = bits
        return bits

    def is_weak_axp(self, W) -> bool:
        mask = as_mask(W, self.n_features)
        if not len(self.disagreeing):
            return True
        covered = np.zeros(self._n_words, dtype=np.uint64)
        for j in members(mask):
            np.bitwise_or(covered, self.feature_bits(j), out=covered)
        return bool(np.array_equal(covered, self._all_rows))

    def coverage_trace(self, W: Sequence[int]) -> list[tuple[int, list[int]]]:
        """For each j of W in the given order, the dataset rows that become covered due to j."""
        covered = np.zeros(len(self.disagreeing), dtype=bool)
        trace = []
        for j in W:
            new = self._differs(j) & ~covered
            covered |= new
            trace.append((j, self.disagreeing[new].tolist()))
        return trace

    def uncovered_rows(self, W) -> list[int]:
        mask = as_mask(W, self.n_features)
        covered = np.zeros(len(self.disagreeing), dtype=bool)
        for j in members(mask):
            covered |= self._differs(j)
        return self.disagreeing[~covered].tolist()

    def is_weak_cxp(self, Y) -> bool:
        free = self._full & ~as_mask(Y, self.n_features)
        return not self.is_weak_axp(free)

    def catalog(self) -> CxpCatalog:
        if self._catalog is None:
            nd = len(self.disagreeing)
            if self.n_features > 62:
                raise CapExceededError("catalog construction supports at most 62 features")
            diff = np.zeros(nd, dtype=np.int64)
            for j in range(self.n_features):
                diff |= self._differs(j).astype(np.int64) << j
            uniq = [int(d) for d in np.unique(diff)]
            self._catalog = CxpCatalog(self.n_features, tuple(minimal_elements(uniq)),
                                       tuple(int(d) for d in diff))
        return self._catalog

    def expected_value(self, S) -> float:
        if self.cfg.prediction.kind == CATEGORICAL:
            raise ValidationError("expected value of categorical predictions is undefined")
        mask = as_mask(S, self.n_features)
        sel = np.ones(len(self.sample), dtype=bool)
        for j in members(mask):
            sel &= self._table(j)[self.sample.codes[:, j]]
        if not sel.any():
            raise EmptyConditioningError(members(mask))
        return float(np.mean(self.sample.predictions[sel].astype(float)))

    def axp_masks(self, cap: int = SMALL_INSTANCE_CAP) -> list[int]:
        return sorted(minimal_hitting_sets(self.catalog().cxp_masks, cap), key=lambda x: (popcount(x), x))

    def cxp_masks(self, cap: int = SMALL_INSTANCE_CAP) -> list[int]:
        return list(self.catalog().cxp_masks)

    def axps(self, cap: int = SMALL_INSTANCE_CAP) -> list[frozenset[int]]:
        return _sets(self.axp_masks(cap))

    def cxps(self, cap: int = SMALL_INSTANCE_CAP) -> list[frozenset[int]]:
        return _sets(self.cxp_masks(cap))

    def extract_axp(self, seed=None) -> frozenset[int]:
        """Deletion-based shrinking of ``seed`` (default: all features), ascending index order."""
        mask = self._full if seed is None else as_mask(seed, self.n_features)
        if not self.is_weak_axp(mask):
            raise ValidationError(f"seed {sorted(from_mask(mask))} is not a weak sample-based AXp")
        for i in members(mask):
            if self.is_weak_axp(mask & ~(1 << i)):
                mask &= ~(1 << i)
        return from_mask(mask)


def is_waxp(problem, S) -> bool:
    return problem.is_weak_axp(S)


def is_sb_waxp(dataset: SampleSpace, instance: Instance, cfg: SimilarityConfig, W) -> bool:
    return SampleProblem(dataset, instance, cfg).is_weak_axp(W)


def extract_sb_axp(dataset: SampleSpace, instance: Instance, cfg: SimilarityConfig, seed=None) -> frozenset[int]:
    return SampleProblem(dataset, instance, cfg).extract_axp(seed)


def enumerate_sb_cxps(dataset: SampleSpace, instance: Instance, cfg: SimilarityConfig) -> CxpCatalog:
    catalog = SampleProblem(dataset, instance, cfg).catalog()
    catalog.check()
    return catalog


def is_sb_waxp_via_catalog(catalog: CxpCatalog, W) -> bool:
    w = as_mask(W, catalog.n_features)
    return all(c & w for c in catalog.cxp_masks)


def enumerate_sb_axps(dataset: SampleSpace, instance: Instance, cfg: SimilarityConfig,
                      cap: int = SMALL_INSTANCE_CAP) -> list[frozenset[int]]:
    return SampleProblem(dataset, instance, cfg).axps(cap)


def relevancy(problem, cap: int = SMALL_INSTANCE_CAP) -> dict[int, bool]:
    """Feature -> True if it occurs in at least one AXp."""
    union = 0
    for a in problem.axp_masks(cap):
        union |= a
    return {i: bool(union >> i & 1) for i in range(problem.n_features)}
