"""Prediction functions over a finite feature space."""

from __future__ import annotations

import abc
from typing import Any, Callable, Sequence

import numpy as np

from nushap.core import (
    DEFAULT_ENUMERATION_CAP,
    KINDS,
    ORDINAL,
    FeatureSpace,
    SampleSpace,
    _prediction_array,
    enumerate_space,
)
from nushap.errors import ValidationError


class Model(abc.ABC):
    """A deterministic prediction function ``pi`` over a feature space."""

    def __init__(self, space: FeatureSpace, output_kind: str = ORDINAL):
        if output_kind not in KINDS:
            raise ValidationError(f"output kind must be one of {KINDS}, got {output_kind!r}")
        self.space = space
        self.output_kind = output_kind

    @abc.abstractmethod
    def predict(self, x: Sequence) -> Any:
        ...

    def __call__(self, x):
        return self.predict(x)

    def table(self, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
        """Predictions for every point of the space, in enumeration order."""
        return _prediction_array(self.predict(x) for x in enumerate_space(self.space, cap))

    def is_constant(self) -> bool:
        return len(set(self.table().tolist())) <= 1


class TruthTableModel(Model):
    """Table lookup; ``outputs[k]`` is the prediction of the k-th point in enumeration order."""

    def __init__(self, space: FeatureSpace, outputs: Sequence, output_kind: str = ORDINAL):
        super().__init__(space, output_kind)
        outputs = list(outputs)
        if len(outputs) != space.size:
            raise ValidationError(f"truth table has {len(outputs)} entries, space has {space.size} points")
        self.outputs = _prediction_array(outputs)
        self.outputs.flags.writeable = False
        self._values = self.outputs.tolist()

    def predict(self, x):
        return self._values[self.space.point_index(x)]

    def table(self, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
        return self.outputs

    def is_constant(self) -> bool:
        return len(set(self._values)) <= 1


def truth_table_from(space: FeatureSpace, outputs: Sequence, output_kind: str = ORDINAL) -> TruthTableModel:
    return TruthTableModel(space, outputs, output_kind)


class RuleListModel(Model):
    """Ordered ``(guard, output)`` pairs; the first guard that holds decides the prediction."""

    def __init__(self, space: FeatureSpace, rules: Sequence[tuple[Callable, Callable]],
                 output_kind: str = ORDINAL):
        super().__init__(space, output_kind)
        if not rules:
            raise ValidationError("a rule list needs at least one rule")
        self.rules = tuple(rules)

    def predict(self, x):
        x = tuple(x)
        if x not in self.space:
            raise ValidationError(f"point {x} is outside the feature space")
        for guard, output in self.rules:
            if guard(x):
                return output(x)
        raise ValidationError(f"no rule covers point {x}")


class RecordedModel(Model):
    """Predictions replayed from a recorded sample; total only on that sample."""

    def __init__(self, sample: SampleSpace, output_kind: str = ORDINAL):
        super().__init__(sample.space, output_kind)
        lookup: dict[tuple, Any] = {}
        for k, pred in enumerate(sample.predictions.tolist()):
            key = tuple(int(c) for c in sample.codes[k])
            if key in lookup and lookup[key] != pred:
                raise ValidationError(f"row {k}: conflicting predictions for point {sample.point(k)}")
            lookup[key] = pred
        self.sample = sample
        self._lookup = lookup

    def predict(self, x):
        try:
            return self._lookup[self.space.encode(x)]
        except KeyError:
            raise ValidationError(f"point {tuple(x)} is outside the recorded coverage") from None

    def is_constant(self) -> bool:
        return len(set(self._lookup.values())) <= 1
