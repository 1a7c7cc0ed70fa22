"""Readers and writers for the on-disk formats.

* declaration JSON: features with domains and tolerances, plus the
  prediction rule;
* dataset / recorded-predictions CSV: one column per feature (header =
  feature names, in declaration order) and a final ``prediction`` column;
* truth-table JSON: ``{"space": <declaration or path>, "outputs": [...]}``
  with outputs in lexicographic point order.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any

from nushap.core import (
    CATEGORICAL,
    KINDS,
    ORDINAL,
    Feature,
    FeatureSpace,
    SampleSpace,
    SimilarityConfig,
    SimilarityRule,
)
from nushap.errors import ValidationError
from nushap.models import TruthTableModel


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise ValidationError(f"{where}: missing key {key!r}")
    return obj[key]


def parse_declaration(data: dict) -> tuple[FeatureSpace, SimilarityConfig]:
    if not isinstance(data, dict):
        raise ValidationError("declaration must be a JSON object")
    features, rules = [], []
    for k, entry in enumerate(_require(data, "features", "declaration")):
        where = f"features[{k}]"
        name = str(entry.get("name", f"x{k + 1}"))
        kind = _require(entry, "kind", where)
        if kind not in KINDS:
            raise ValidationError(f"{where}: kind must be one of {KINDS}")
        features.append(Feature(name, kind, tuple(_require(entry, "domain", where))))
        if kind == CATEGORICAL:
            if entry.get("tau", 0) not in (0, None):
                raise ValidationError(f"{where}: categorical features take no tolerance")
            rules.append(SimilarityRule())
        else:
            rules.append(SimilarityRule(ORDINAL, entry.get("mode", "abs"), float(entry.get("tau", 0.0))))
    pred = data.get("prediction", {"kind": ORDINAL})
    pkind = _require(pred, "kind", "prediction")
    if pkind == CATEGORICAL:
        prule = SimilarityRule(CATEGORICAL, "exact", 0.0)
    else:
        prule = SimilarityRule(pkind, pred.get("mode", "abs"), float(pred.get("delta", 0.0)))
    space = FeatureSpace(features)
    return space, SimilarityConfig(tuple(rules), prule)


def declaration_to_dict(space: FeatureSpace, cfg: SimilarityConfig) -> dict:
    feats = []
    for f, rule in zip(space.features, cfg.features):
        entry: dict[str, Any] = {"name": f.name, "kind": f.kind, "domain": list(f.domain)}
        if f.kind == ORDINAL:
            entry["tau"] = rule.tol
            if rule.mode != "abs":
                entry["mode"] = rule.mode
        feats.append(entry)
    pred: dict[str, Any] = {"kind": cfg.prediction.kind}
    if cfg.prediction.kind == ORDINAL:
        pred["delta"] = cfg.prediction.tol
        if cfg.prediction.mode != "abs":
            pred["mode"] = cfg.prediction.mode
    return {"features": feats, "prediction": pred}


def _read_json(path) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None


def load_declaration(path) -> tuple[FeatureSpace, SimilarityConfig]:
    return parse_declaration(_read_json(path))


def parse_prediction(token: str, cfg: SimilarityConfig):
    token = token.strip()
    if cfg.prediction.kind == CATEGORICAL:
        return token
    try:
        return float(token)
    except ValueError:
        raise ValidationError(f"prediction {token!r} is not numeric") from None


def load_dataset(path, space: FeatureSpace, cfg: SimilarityConfig,
                 provenance: str = "original dataset") -> SampleSpace:
    """Read a dataset CSV, validating every cell against the declared domains."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        expected = space.names + ["prediction"]
        if header != expected:
            raise ValidationError(f"{path}: header {header} does not match {expected}")
        for lineno, cells in enumerate(reader, start=2):
            if not cells or all(not c.strip() for c in cells):
                continue
            if len(cells) != len(header):
                raise ValidationError(f"{path}: row {lineno} has {len(cells)} cells, expected {len(header)}")
            point = []
            for f, cell in zip(space.features, cells):
                try:
                    point.append(f.parse(cell))
                except ValidationError as exc:
                    raise ValidationError(f"{path}: row {lineno}, column {f.name!r}: {exc}") from None
            try:
                pred = parse_prediction(cells[-1], cfg)
            except ValidationError as exc:
                raise ValidationError(f"{path}: row {lineno}, column 'prediction': {exc}") from None
            rows.append((tuple(point), pred))
    return SampleSpace.from_rows(space, rows, provenance)


def write_dataset(path, sample: SampleSpace) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(sample.space.names + ["prediction"])
        for point, pred in sample.rows():
            if isinstance(pred, float) and pred.is_integer():
                pred = int(pred)
            writer.writerow(list(point) + [pred])


def load_truth_table(path) -> tuple[FeatureSpace, SimilarityConfig, TruthTableModel]:
    data = _read_json(path)
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: truth table must be a JSON object")
    ref = _require(data, "space", str(path))
    if isinstance(ref, str):
        ref_path = Path(ref)
        if not ref_path.is_absolute():
            ref_path = Path(path).parent / ref_path
        space, cfg = load_declaration(ref_path)
    else:
        space, cfg = parse_declaration(ref)
    model = TruthTableModel(space, _require(data, "outputs", str(path)), cfg.prediction.kind)
    return space, cfg, model


def dump_json(obj) -> str:
    """Deterministic JSON text (sorted keys, fixed separators, trailing newline)."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
