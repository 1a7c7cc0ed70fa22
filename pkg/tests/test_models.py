from __future__ import annotations

import pytest

from nushap import fixtures
from nushap.core import FeatureSpace, SampleSpace
from nushap.errors import ValidationError
from nushap.models import RecordedModel, RuleListModel, TruthTableModel, truth_table_from


def test_truth_table_lookup_follows_enumeration_order():
    space = FeatureSpace.boolean(2)
    model = truth_table_from(space, [0, 1, 1, 1])
    assert [model.predict(p) for p in [(0, 0), (0, 1), (1, 0), (1, 1)]] == [0, 1, 1, 1]
    assert model((1, 0)) == 1
    assert not model.is_constant()
    assert truth_table_from(space, [2, 2, 2, 2]).is_constant()


def test_truth_table_size_checked():
    with pytest.raises(ValidationError):
        TruthTableModel(FeatureSpace.boolean(2), [0, 1, 1])


def test_rule_list_first_match_wins_and_must_cover():
    space = FeatureSpace.boolean(1)
    model = RuleListModel(space, [(lambda x: x[0] == 1, lambda x: 5), (lambda x: True, lambda x: 7)])
    assert model.predict((1,)) == 5 and model.predict((0,)) == 7
    partial = RuleListModel(space, [(lambda x: x[0] == 1, lambda x: 5)])
    with pytest.raises(ValidationError):
        partial.predict((0,))
    with pytest.raises(ValidationError):
        model.predict((3,))


def test_recorded_model():
    space = FeatureSpace.boolean(2)
    sample = SampleSpace.from_rows(space, [((0, 0), 1), ((1, 1), 0), ((0, 0), 1)])
    model = RecordedModel(sample)
    assert model.predict((0, 0)) == 1
    with pytest.raises(ValidationError):
        model.predict((1, 0))
    with pytest.raises(ValidationError):
        RecordedModel(SampleSpace.from_rows(space, [((0, 0), 1), ((0, 0), 0)]))


def test_m3_model_pieces():
    model, cfg, inst = fixtures.m3_model()
    assert model.space.size == 81
    assert model.predict((1.0, 1.0)) == 1.0
    assert model.predict((1.5, -0.5)) == 1.5
    assert model.predict((0.0, 0.0)) == -2.0
    assert model.predict((0.25, 1.0)) == 2.0
    assert model.predict(inst.v) == inst.q
