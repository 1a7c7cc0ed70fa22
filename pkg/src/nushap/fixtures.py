"""Small worked problems used by the self-test and the test suite."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from nushap.core import FeatureSpace, Instance, SimilarityConfig, SimilarityRule
from nushap.formats import load_dataset, load_declaration, load_truth_table
from nushap.models import RuleListModel

D1_INSTANCE = Instance((1, 1, 0), 1)
OR_OUTPUTS = (0, 1, 1, 1)

M3_LOW, M3_HIGH = -0.5, 1.5


def data_dir() -> Path:
    return Path(str(resources.files("nushap") / "data"))


def load_d1(directory: Path | None = None):
    """(sample, instance, cfg) for the three-feature binary dataset D1."""
    directory = Path(directory) if directory else data_dir()
    space, cfg = load_declaration(directory / "d1.json")
    return load_dataset(directory / "d1.csv", space, cfg), D1_INSTANCE, cfg


def load_or(directory: Path | None = None):
    """(model, cfg) for two-input boolean OR with 0/1 ordinal outputs."""
    directory = Path(directory) if directory else data_dir()
    _, cfg, model = load_truth_table(directory / "or2.json")
    return model, cfg


def _in_upper(x: float) -> bool:
    return 0.5 <= x <= 1.5


def m3_model(step: float = 0.25, tau: float = 0.25, delta: float = 0.25):
    """Piecewise-linear regression model on a square grid over [-1/2, 3/2]^2.

    Returns (model, cfg, instance) with instance ((1, 1), 1).
    """
    count = round((M3_HIGH - M3_LOW) / step)
    grid = tuple(M3_LOW + step * k for k in range(count + 1))
    space = FeatureSpace.from_domains([grid, grid])
    rules = [
        (lambda x: _in_upper(x[0]), lambda x: x[0]),
        (lambda x: not _in_upper(x[0]) and not _in_upper(x[1]), lambda x: x[1] - 2),
        (lambda x: not _in_upper(x[0]) and _in_upper(x[1]), lambda x: x[1] + 1),
    ]
    model = RuleListModel(space, rules)
    cfg = SimilarityConfig((SimilarityRule.tolerance(tau),) * 2, SimilarityRule.tolerance(delta))
    return model, cfg, Instance((1.0, 1.0), 1.0)
