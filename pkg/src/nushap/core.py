"""Feature spaces, instances, similarity rules and sample spaces.

Points are tuples of domain values.  Internally every point is also
available as a tuple of *codes*: the position of each value within its
feature's declared domain.  Feature indices are 0-based throughout the
Python API.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from numbers import Real
from typing import Any, Iterable, Iterator, Sequence

import numpy as np

from nushap._bits import as_mask, members
from nushap.errors import CapExceededError, ValidationError

DEFAULT_ENUMERATION_CAP = 2**24

CATEGORICAL = "cat"
ORDINAL = "ord"
KINDS = (CATEGORICAL, ORDINAL)

# absorbs representation error of decimal grid steps (0.1 + 0.2 != 0.3)
_FP_SLACK = 1e-12


def _is_number(x: Any) -> bool:
    return isinstance(x, (Real, np.integer, np.floating)) and not isinstance(x, (str, bytes))


@dataclass(frozen=True)
class Feature:
    """One feature with a finite, ordered domain of distinct values."""

    name: str
    kind: str
    domain: tuple
    _codes: dict = field(init=False, repr=False, compare=False, hash=False)
    _tokens: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"feature {self.name!r}: kind must be one of {KINDS}, got {self.kind!r}")
        domain = tuple(self.domain)
        if not domain:
            raise ValidationError(f"feature {self.name!r}: empty domain")
        if self.kind == ORDINAL:
            bad = [d for d in domain if not _is_number(d)]
            if bad:
                raise ValidationError(f"feature {self.name!r}: ordinal domain has non-numeric values {bad}")
            keys = [float(d) for d in domain]
            tokens = {}
        else:
            keys = list(domain)
            tokens = {str(d): k for k, d in enumerate(domain)}
            if len(tokens) != len(domain):
                raise ValidationError(f"feature {self.name!r}: domain tokens are not distinct")
        codes = {key: k for k, key in enumerate(keys)}
        if len(codes) != len(domain):
            raise ValidationError(f"feature {self.name!r}: domain values are not distinct")
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "_codes", codes)
        object.__setattr__(self, "_tokens", tokens)

    @property
    def size(self) -> int:
        return len(self.domain)

    def code(self, value) -> int:
        """Position of ``value`` in the domain; raises ValidationError if absent."""
        try:
            if self.kind == ORDINAL:
                if not _is_number(value):
                    raise KeyError(value)
                return self._codes[float(value)]
            return self._codes[value]
        except (KeyError, TypeError):
            raise ValidationError(f"value {value!r} is not in the domain of feature {self.name!r}") from None

    def parse(self, token: str):
        """Map a text token (CSV cell, CLI literal) to the declared domain value."""
        token = token.strip()
        if self.kind == ORDINAL:
            try:
                key = float(token)
            except ValueError:
                raise ValidationError(f"feature {self.name!r}: {token!r} is not numeric") from None
            k = self._codes.get(key)
        else:
            k = self._tokens.get(token)
        if k is None:
            raise ValidationError(f"value {token!r} is not in the domain of feature {self.name!r}")
        return self.domain[k]


class FeatureSpace:
    """Product of the feature domains."""

    def __init__(self, features: Sequence[Feature]):
        features = tuple(features)
        if not features:
            raise ValidationError("a feature space needs at least one feature")
        names = [f.name for f in features]
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate feature names in {names}")
        self.features = features

    @classmethod
    def from_domains(cls, domains: Sequence[Sequence], kinds: Sequence[str] | str = ORDINAL,
                     names: Sequence[str] | None = None) -> "FeatureSpace":
        m = len(domains)
        if isinstance(kinds, str):
            kinds = [kinds] * m
        names = names or [f"x{i + 1}" for i in range(m)]
        return cls([Feature(n, k, tuple(d)) for n, k, d in zip(names, kinds, domains)])

    @classmethod
    def boolean(cls, m: int) -> "FeatureSpace":
        return cls.from_domains([(0, 1)] * m)

    @property
    def m(self) -> int:
        return len(self.features)

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.features]

    @property
    def domains(self) -> list[tuple]:
        return [f.domain for f in self.features]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(f.size for f in self.features)

    @property
    def size(self) -> int:
        return math.prod(self.shape)

    def __eq__(self, other):
        return isinstance(other, FeatureSpace) and self.features == other.features

    def __hash__(self):
        return hash(self.features)

    def __repr__(self):
        return f"FeatureSpace(m={self.m}, shape={self.shape})"

    def encode(self, point: Sequence) -> tuple[int, ...]:
        if len(point) != self.m:
            raise ValidationError(f"point has {len(point)} coordinates, space has {self.m} features")
        return tuple(f.code(x) for f, x in zip(self.features, point))

    def decode(self, codes: Sequence[int]) -> tuple:
        return tuple(f.domain[int(c)] for f, c in zip(self.features, codes))

    def __contains__(self, point) -> bool:
        try:
            self.encode(point)
        except ValidationError:
            return False
        return True

    def parse_point(self, tokens: Sequence[str] | str) -> tuple:
        if isinstance(tokens, str):
            tokens = tokens.split(",")
        if len(tokens) != self.m:
            raise ValidationError(f"expected {self.m} comma-separated values, got {len(tokens)}")
        return tuple(f.parse(t) for f, t in zip(self.features, tokens))

    def point_index(self, point: Sequence) -> int:
        """Lexicographic rank of ``point`` (the order used by enumerate_space)."""
        return int(np.ravel_multi_index(self.encode(point), self.shape))

    def all_codes(self, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
        """Every point of the space as a (size, m) code matrix in lexicographic order."""
        _check_cap(self, cap)
        grids = np.indices(self.shape).reshape(self.m, -1).T
        return np.ascontiguousarray(grids, dtype=np.int64)


def _check_cap(space: FeatureSpace, cap: int) -> None:
    if space.size > cap:
        raise CapExceededError(f"feature space has {space.size} points, enumeration cap is {cap}")


def enumerate_space(space: FeatureSpace, cap: int = DEFAULT_ENUMERATION_CAP) -> Iterator[tuple]:
    """Yield each point of the space once, in lexicographic order of domain positions."""
    _check_cap(space, cap)
    return itertools.product(*space.domains)


@dataclass(frozen=True)
class SimilarityRule:
    """Closeness predicate for one feature or for the prediction.

    ``mode`` is ``"exact"`` (equality), ``"abs"`` (``|a - b| <= tol``) or
    ``"rel"`` (arithmetic-mean relative change ``|2(a - b)/(a + b)| <= tol``).
    """

    kind: str = CATEGORICAL
    mode: str = "exact"
    tol: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"rule kind must be one of {KINDS}, got {self.kind!r}")
        if self.mode not in ("exact", "abs", "rel"):
            raise ValidationError(f"unknown similarity mode {self.mode!r}")
        if self.kind == CATEGORICAL and self.mode != "exact":
            raise ValidationError("categorical values only support exact-match similarity")
        if not (self.tol >= 0 and math.isfinite(self.tol)):
            raise ValidationError(f"tolerance must be finite and >= 0, got {self.tol}")

    @classmethod
    def tolerance(cls, tol: float, mode: str = "abs") -> "SimilarityRule":
        return cls(ORDINAL, mode, float(tol))

    def similar(self, a, b) -> bool:
        if self.mode == "exact":
            return a == b
        if not (_is_number(a) and _is_number(b)):
            raise ValidationError(f"tolerance comparison needs numbers, got {a!r} and {b!r}")
        if a == b:
            return True
        if self.mode == "abs":
            return abs(a - b) <= self.tol + _FP_SLACK
        mean = a + b
        if mean == 0:
            return False
        return abs(2 * (a - b) / mean) <= self.tol + _FP_SLACK

    def similar_array(self, values: np.ndarray, ref) -> np.ndarray:
        """Vectorised :meth:`similar` of every element of ``values`` against ``ref``."""
        values = np.asarray(values)
        if self.mode == "exact":
            return values == ref
        values = values.astype(float)
        ref = float(ref)
        if self.mode == "abs":
            return np.abs(values - ref) <= self.tol + _FP_SLACK
        with np.errstate(divide="ignore", invalid="ignore"):
            change = np.abs(2 * (values - ref) / (values + ref))
        return (values == ref) | (np.isfinite(change) & (change <= self.tol + _FP_SLACK))


EXACT = SimilarityRule()


@dataclass(frozen=True)
class SimilarityConfig:
    features: tuple[SimilarityRule, ...]
    prediction: SimilarityRule = EXACT

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))

    @classmethod
    def exact(cls, m: int, prediction_kind: str = ORDINAL) -> "SimilarityConfig":
        """Equality on every feature and on the prediction."""
        pred = SimilarityRule(prediction_kind, "exact" if prediction_kind == CATEGORICAL else "abs", 0.0)
        return cls((EXACT,) * m, pred)

    @property
    def m(self) -> int:
        return len(self.features)

    def check_space(self, space: FeatureSpace) -> None:
        if self.m != space.m:
            raise ValidationError(f"similarity config covers {self.m} features, space has {space.m}")
        for f, rule in zip(space.features, self.features):
            if f.kind == CATEGORICAL and rule.mode != "exact":
                raise ValidationError(f"categorical feature {f.name!r} needs exact-match similarity")

    def feature_table(self, space: FeatureSpace, j: int, value) -> np.ndarray:
        """Boolean vector over feature j's domain: which values are similar to ``value``."""
        rule = self.features[j]
        return np.array([rule.similar(d, value) for d in space.features[j].domain], dtype=bool)


def similar_on(S, x: Sequence, v: Sequence, cfg: SimilarityConfig) -> bool:
    """True iff x and v are similar on every feature in S (vacuously true for S empty)."""
    if len(x) != cfg.m or len(v) != cfg.m:
        raise ValidationError(f"points must have {cfg.m} coordinates")
    for i in members(as_mask(S, cfg.m)):
        if not cfg.features[i].similar(x[i], v[i]):
            return False
    return True


def similar_pred(a, b, cfg: SimilarityConfig) -> bool:
    return cfg.prediction.similar(a, b)


@dataclass(frozen=True)
class Instance:
    """Target point ``v`` with its prediction ``q``."""

    v: tuple
    q: Any

    def __post_init__(self):
        object.__setattr__(self, "v", tuple(self.v))


def _prediction_array(predictions: Iterable) -> np.ndarray:
    preds = list(predictions)
    if preds and all(_is_number(p) for p in preds):
        return np.asarray(preds, dtype=float)
    arr = np.empty(len(preds), dtype=object)
    arr[:] = preds
    return arr


class SampleSpace:
    """A finite multiset of labelled points of a feature space.

    Stored as an (n, m) column-major matrix of domain codes plus a
    prediction vector, so per-feature scans read contiguous memory; both
    arrays are read-only.
    """

    def __init__(self, space: FeatureSpace, codes, predictions, provenance: str = "original dataset"):
        codes = np.asarray(codes)
        if codes.ndim != 2 or codes.shape[1] != space.m:
            raise ValidationError(f"code matrix must have shape (n, {space.m}), got {codes.shape}")
        if codes.size and (codes.min() < 0 or np.any(codes.max(axis=0) >= np.array(space.shape))):
            raise ValidationError("code matrix has entries outside the feature domains")
        preds = predictions if isinstance(predictions, np.ndarray) else _prediction_array(predictions)
        if len(preds) != codes.shape[0]:
            raise ValidationError(f"{codes.shape[0]} rows but {len(preds)} predictions")
        codes = np.asfortranarray(codes)
        codes = codes.view()
        codes.flags.writeable = False
        preds = preds.view()
        preds.flags.writeable = False
        self.space = space
        self.codes = codes
        self.predictions = preds
        self.provenance = provenance

    @classmethod
    def from_rows(cls, space: FeatureSpace, rows: Iterable[tuple[Sequence, Any]],
                  provenance: str = "original dataset") -> "SampleSpace":
        codes, preds = [], []
        for k, (point, pred) in enumerate(rows):
            try:
                codes.append(space.encode(point))
            except ValidationError as exc:
                raise ValidationError(f"row {k}: {exc}") from None
            preds.append(pred)
        codes_arr = np.array(codes, dtype=np.int64).reshape(len(codes), space.m)
        return cls(space, codes_arr, _prediction_array(preds), provenance)

    def __len__(self) -> int:
        return self.codes.shape[0]

    def point(self, k: int) -> tuple:
        return self.space.decode(self.codes[k])

    def rows(self) -> Iterator[tuple[tuple, Any]]:
        for k, pred in enumerate(self.predictions.tolist()):
            yield self.point(k), pred

    def __repr__(self):
        return f"SampleSpace(n={len(self)}, m={self.space.m}, provenance={self.provenance!r})"
