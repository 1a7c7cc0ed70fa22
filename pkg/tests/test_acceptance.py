"""Acceptance criteria, one test per criterion (``test_acNN_*``).

A PASS/FAIL line per criterion is printed in the terminal summary.
"""

from __future__ import annotations

import csv
import io
import math
import time
from contextlib import redirect_stdout
from itertools import product

import numpy as np

import oracles
from conftest import random_sample_problem
from nushap import analysis, charfun, cli, explain, fixtures, shapley
from nushap.charfun import Game
from nushap.core import FeatureSpace, Instance, SampleSpace, SimilarityConfig
from nushap.models import truth_table_from


def _detail(record_property, text: str) -> None:
    record_property("detail", text)


def _random_monotone_game(rng: np.random.Generator, n: int):
    """Sum of nonnegative dividends over coalitions.

    Players 0 and 1 get identical dividends (symmetric pair) and, in half of
    the games, the last player gets none (dummy).
    """
    dummy = n >= 3 and rng.random() < 0.5
    dividends: dict[int, float] = {}
    for mask in range(1, 1 << n):
        if dummy and mask >> (n - 1) & 1:
            continue
        if rng.random() < 0.6:
            dividends[mask] = float(rng.integers(0, 8)) / float(rng.integers(1, 6))
    if n >= 2:
        # symmetrise players 0 and 1
        def swap(m):
            a, b = m & 1, m >> 1 & 1
            return (m & ~3) | (a << 1) | b

        sym = {}
        for mask, w in dividends.items():
            sym[mask] = sym.get(mask, 0.0) + w
            sym[swap(mask)] = sym.get(swap(mask), 0.0) + w
        dividends = {k: w for k, w in sym.items() if w}
    items = sorted(dividends.items())

    def value(mask: int) -> float:
        total = 0.0
        for t, w in items:
            if t & mask == t:
                total += w
        return total

    return Game(n, value), dummy


def test_ac01_shapley_axioms(record_property):
    rng = np.random.default_rng(20240101)
    start = time.perf_counter()
    worst_eff = worst_sym = worst_eq = 0.0
    dummies = 0
    for _ in range(100):
        n = int(rng.integers(1, 7))
        game, dummy = _random_monotone_game(rng, n)
        sub = shapley.shapley_exact_subsets(game).scores
        perm = shapley.shapley_exact_permutations(game).scores
        full = game.value_mask(game.full_mask)
        worst_eff = max(worst_eff, abs(sum(sub) - (full - game.value_mask(0))))
        if n >= 2:
            worst_sym = max(worst_sym, abs(sub[0] - sub[1]))
        if dummy:
            dummies += 1
            assert sub[n - 1] == 0.0 and perm[n - 1] == 0.0
        worst_eq = max(worst_eq, max(abs(a - b) for a, b in zip(sub, perm)))
    elapsed = time.perf_counter() - start
    _detail(record_property, f"eff={worst_eff:.1e} sym={worst_sym:.1e} sub-vs-perm={worst_eq:.1e} "
                             f"dummies={dummies} t={elapsed:.2f}s")
    assert worst_eff <= 1e-9
    assert worst_sym <= 1e-12
    assert worst_eq <= 1e-12
    assert dummies > 0
    assert elapsed < 30


def test_ac02_or_misleading_scores(record_property):
    model, cfg = fixtures.load_or()
    problem = explain.ModelProblem(model, Instance((1, 0), 1), cfg)
    sc_e = shapley.shapley_exact_subsets(charfun.expectation_game(problem)).scores
    sc_a = shapley.shapley_exact_subsets(charfun.axp_game(problem)).scores
    # oracle: enumerate the four points
    pts = [((x1, x2), int(x1 or x2)) for x1, x2 in product((0, 1), repeat=2)]
    want_e = oracles.shapley(2, lambda S: oracles.conditional_mean(pts, (1, 0), cfg, S))
    want_a = oracles.shapley(2, lambda S: int(oracles.weak_axp(pts, (1, 0), 1, cfg, S)))
    relevant = set().union(*oracles.axps(pts, (1, 0), 1, cfg))
    _detail(record_property, f"Sc_e={list(sc_e)} Sc_a={list(sc_a)}")
    assert 1 not in relevant and not explain.relevancy(problem)[1]
    assert float(want_e[1]) == -0.125
    assert abs(sc_e[1] - (-0.125)) <= 1e-12
    assert sc_a[1] == 0.0 and sc_a[0] == 1.0
    assert [float(x) for x in want_a] == [1.0, 0.0]


def test_ac03_flaw_census(tmp_path, record_property):
    out = tmp_path / "census.csv"
    start = time.perf_counter()
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = cli.main(["flawscan", "--vars", "3", "--out", str(out)])
    elapsed = time.perf_counter() - start
    assert code == 0
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    issue_e = sum(int(r["issue_e"]) for r in rows)
    issue_a = sum(int(r["issue_a"]) for r in rows)
    _detail(record_property, f"cases={len(rows)} issue_e={issue_e} issue_a={issue_a} t={elapsed:.2f}s")
    assert len(rows) == (2**8 - 2) * 8
    assert issue_e >= 1
    assert issue_a == 0
    assert elapsed < 120


def test_ac04_estimator_guarantee(d1, record_property):
    game = charfun.axp_game(d1)
    exact = shapley.shapley_exact_subsets(game).scores
    start = time.perf_counter()
    hits = [0] * game.n
    zero_bitwise = 0
    runs = None
    for seed in range(200):
        rep = shapley.shapley_estimate_cgt(game, shapley.EstimatorParams(0.1, 0.1, seed=seed))
        runs = rep.runs
        for i in range(game.n):
            hits[i] += abs(rep.scores[i] - exact[i]) <= 0.1
        zero_bitwise += rep.scores[1] == 0.0 and math.copysign(1, rep.scores[1]) > 0
    elapsed = time.perf_counter() - start
    rates = [h / 200 for h in hits]
    _detail(record_property, f"r={runs} within-eps={rates} zero={zero_bitwise}/200 t={elapsed:.2f}s")
    assert all(rate >= 0.87 for rate in rates)
    assert zero_bitwise == 200
    assert elapsed < 60


def test_ac05_required_runs_large_scale(record_property):
    r = shapley.required_runs(0.0015, 0.015, 1.0)
    independent = oracles.hoeffding_runs(0.0015, 0.015, 1.0)
    _detail(record_property, f"r={r} hoeffding-oracle={independent} expected=1087399")
    assert r == independent
    assert r == 1_087_399


def test_ac06_algorithm2_fidelity(record_property):
    rng = np.random.default_rng(6)
    start = time.perf_counter()
    checked = 0
    for _ in range(1000):
        sample, inst, cfg = random_sample_problem(rng)
        problem = explain.SampleProblem(sample, inst, cfg)
        catalog = explain.enumerate_sb_cxps(sample, inst, cfg)
        rows = list(sample.rows())
        m = sample.space.m
        W = frozenset(int(i) for i in np.flatnonzero(rng.random(m) < 0.5))
        brute = oracles.weak_axp(rows, inst.v, inst.q, cfg, W)
        assert explain.is_sb_waxp(sample, inst, cfg, W) == brute
        assert explain.is_sb_waxp_via_catalog(catalog, W) == brute
        assert problem.is_weak_axp(W) == brute
        checked += 1
    duality = 0
    for _ in range(200):
        sample, inst, cfg = random_sample_problem(rng)
        problem = explain.SampleProblem(sample, inst, cfg)
        rows = list(sample.rows())
        axps = set(problem.axps())
        cxps = set(problem.cxps())
        assert cxps == oracles.cxps(rows, inst.v, inst.q, cfg)
        assert axps == oracles.axps(rows, inst.v, inst.q, cfg)
        assert axps == oracles.minimal_hitting_sets(cxps, sample.space.m)
        assert cxps == oracles.minimal_hitting_sets(axps, sample.space.m)
        duality += 1
    elapsed = time.perf_counter() - start
    _detail(record_property, f"triples={checked} duality={duality} t={elapsed:.2f}s")
    assert elapsed < 60


def test_ac07_sample_equals_space(record_property):
    rng = np.random.default_rng(7)
    compared = 0
    while compared < 50:
        m = int(rng.integers(1, 5))
        space = FeatureSpace.boolean(m)
        points = list(product((0, 1), repeat=m))
        outputs = [float(x) for x in rng.integers(0, 3, size=len(points))]
        if len(set(outputs)) == 1:
            continue
        cfg = SimilarityConfig.exact(m)
        k = int(rng.integers(len(points)))
        inst = Instance(points[k], outputs[k])
        model_p = explain.ModelProblem(truth_table_from(space, outputs), inst, cfg)
        sample_p = explain.SampleProblem(SampleSpace.from_rows(space, zip(points, outputs)), inst, cfg)
        assert set(model_p.axps()) == set(sample_p.axps())
        assert set(model_p.cxps()) == set(sample_p.cxps())
        compared += 1
    _detail(record_property, f"models={compared}")


def test_ac08_m3_grid(record_property):
    model, cfg, inst = fixtures.m3_model()
    problem = explain.ModelProblem(model, inst, cfg)
    sc = shapley.shapley_exact_subsets(charfun.axp_game(problem)).scores
    grid = [-0.5 + 0.25 * k for k in range(9)]
    pts = [((a, b), model.predict((a, b))) for a in grid for b in grid]
    want = oracles.shapley(2, lambda S: int(oracles.weak_axp(pts, inst.v, inst.q, cfg, S)))
    _detail(record_property, f"points={len(pts)} Sc_a={list(sc)} oracle={[str(w) for w in want]}")
    assert len(pts) == 81
    assert [float(w) for w in want] == [1.0, 0.0]
    assert sc == (1.0, 0.0)


def _synthetic(n: int, m: int, seed: int):
    rng = np.random.default_rng(seed)
    codes = rng.integers(0, 2, size=(n, m), dtype=np.uint8)
    preds = rng.integers(0, 2, size=n).astype(float)
    codes[0] = 1
    preds[0] = 1.0
    space = FeatureSpace.boolean(m)
    return SampleSpace(space, codes, preds), Instance((1,) * m, 1.0), SimilarityConfig.exact(m)


def _best_time(sample, inst, cfg, W, repeats=3):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        explain.is_sb_waxp(sample, inst, cfg, W)
        best = min(best, time.perf_counter() - t0)
    return best


def test_ac09_coverage_scan_performance(record_property):
    m = 50
    W = list(range(0, m, 2))
    small = _synthetic(1_000_000, m, 9)
    t1 = _best_time(*small, W)
    del small
    large = _synthetic(2_000_000, m, 9)
    t2 = _best_time(*large, W)
    _detail(record_property, f"t(1M)={t1:.3f}s t(2M)={t2:.3f}s ratio={t2 / t1:.2f}")
    assert t1 < 1.0
    assert t2 / t1 <= 2.5


def test_ac10_rbo(record_property):
    same = analysis.rbo([1, 2, 3, 4, 5], [1, 2, 3, 4, 5])
    hand = analysis.rbo([1, 2, 3, 4, 5], [2, 1, 3, 4, 5], analysis.RboParams(0.5, 5))
    disjoint = analysis.rbo([1, 2, 3, 4, 5], [6, 7, 8, 9, 10])
    _detail(record_property, f"self={same} disjoint={disjoint} hand={hand:.6f}")
    assert same == 1.0
    assert disjoint == 0.0
    assert abs(hand - 0.48387) <= 1e-5
    assert abs(hand - oracles.rbo([1, 2, 3, 4, 5], [2, 1, 3, 4, 5], 0.5, 5)) <= 1e-15


def test_ac03b_flaw_census_four_vars(record_property):
    start = time.perf_counter()
    summary = analysis.flaw_census(4)
    elapsed = time.perf_counter() - start
    _detail(record_property, f"k=4 issue_e={summary.issue_e} issue_a={summary.issue_a} t={elapsed:.1f}s")
    assert summary.issue_e >= 1 and summary.issue_a == 0
    assert elapsed < 30 * 60
