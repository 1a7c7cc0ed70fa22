from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nushap import fixtures  # noqa: E402
from nushap.core import FeatureSpace, Instance, SampleSpace, SimilarityConfig, SimilarityRule  # noqa: E402
from nushap.explain import ModelProblem, SampleProblem  # noqa: E402

ASSETS = Path(__file__).parent / "assets"

_acceptance: list[tuple[str, str, str]] = []


@pytest.fixture
def assets() -> Path:
    return ASSETS


@pytest.fixture
def d1():
    sample, inst, cfg = fixtures.load_d1(ASSETS)
    return SampleProblem(sample, inst, cfg)


@pytest.fixture
def or_problem():
    model, cfg = fixtures.load_or(ASSETS)
    return ModelProblem(model, Instance((1, 0), 1), cfg)


def random_sample_problem(rng: np.random.Generator, max_m: int = 8, max_rows: int = 64):
    """Random dataset (categorical or toleranced ordinal features) plus an instance taken from its rows."""
    m = int(rng.integers(1, max_m + 1))
    domains, rules, kinds = [], [], []
    for _ in range(m):
        size = int(rng.integers(2, 5))
        if rng.random() < 0.5:
            domains.append(tuple(range(size)))
            kinds.append("cat")
            rules.append(SimilarityRule())
        else:
            domains.append(tuple(float(x) for x in range(size)))
            kinds.append("ord")
            rules.append(SimilarityRule.tolerance(float(rng.choice([0.0, 1.0]))))
    pred_rule = SimilarityRule.tolerance(float(rng.choice([0.0, 1.0])))
    space = FeatureSpace.from_domains(domains, kinds)
    cfg = SimilarityConfig(tuple(rules), pred_rule)
    n = int(rng.integers(1, max_rows + 1))
    rows = []
    for _ in range(n):
        point = tuple(d[int(rng.integers(len(d)))] for d in domains)
        rows.append((point, float(rng.integers(0, 3))))
    sample = SampleSpace.from_rows(space, rows)
    v, q = rows[int(rng.integers(n))]
    return sample, Instance(v, q), cfg


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        name = report.nodeid.split("::")[-1]
        detail = ""
        for key, value in report.user_properties:
            if key == "detail":
                detail = value
        _acceptance.append((name, "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL"), detail))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in sorted(_acceptance):
        terminalreporter.write_line(f"{status}  {name}  {detail}".rstrip())
