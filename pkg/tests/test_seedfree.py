import warnings

import numpy as np
import pytest

from netshift.embed import embed
from netshift.graph import SBM_B, make_sbm_scenario, sample_pair
from netshift.metrics import accuracy
from netshift.pairfilter import ttilde, with_threshold
from netshift.seedfree import (
    NoViableCandidateError,
    SeedFreeConfig,
    required_candidates,
    run_seedfree,
    run_seedfree_embedded,
    uniform_candidates,
)
from netshift.shift import CovarianceWarning, EmbeddedPair


def test_required_candidates_examples():
    assert required_candidates(0.25, 3, 0.99) == 293
    assert required_candidates(0.5, 1, 0.99) == 7
    assert required_candidates(1.0, 3, 0.99) == 1
    assert required_candidates(0.999999, 2, 0.5) == 1
    with pytest.raises(ValueError):
        required_candidates(0.5, 0, 0.9)
    with pytest.raises(ValueError):
        required_candidates(0.5, 2, 1.0)


def test_required_candidates_is_smallest_sufficient():
    for p, d, q in [(0.25, 3, 0.99), (0.5, 2, 0.9), (0.3, 4, 0.95)]:
        M = required_candidates(p, d, q)
        assert 1 - (1 - p**d) ** M >= q
        assert 1 - (1 - p**d) ** (M - 1) < q


def test_config_validation():
    assert SeedFreeConfig(dim=3).L == 3
    assert SeedFreeConfig(dim=2, dim2=3).L == 3
    assert SeedFreeConfig(dim=(2, 1)).signature1 == (2, 1)
    for bad in (dict(L=2), dict(M=0), dict(alpha=0.0), dict(alpha_tilde=1.0), dict(sampling_mode="grid")):
        with pytest.raises(ValueError):
            SeedFreeConfig(dim=3, **bad)


def test_uniform_candidates_distinct_and_reproducible():
    a = uniform_candidates(10, 3, 50, 1)
    assert len(a) == len(set(a)) == 50
    assert a == uniform_candidates(10, 3, 50, 1)
    # only C(4, 3) = 4 distinct subsets exist
    assert len(uniform_candidates(4, 3, 50, 1)) == 4
    with pytest.raises(ValueError):
        uniform_candidates(2, 3, 5, 0)


def test_identical_graphs(sbm200):
    _, g1, _ = sbm200
    rep, trace = run_seedfree(g1, g1, SeedFreeConfig(dim=3, M=50, rng_seed=0))
    assert rep.unshifted.size == 200
    assert trace.n_passed == 50
    assert all(c.passed_filter for c in trace.candidates)


def test_detection_and_trace_invariants(sbm200):
    sc, g1, g2 = sbm200
    rep, trace = run_seedfree(g1, g2, SeedFreeConfig(dim=3, M=300, rng_seed=1))
    assert accuracy(rep.unshifted, sc.unshifted, 200) >= 0.9
    hs = [c.h for c in trace.candidates]
    assert all(c.h == 0 for c in trace.candidates if not c.passed_filter)
    assert trace.chosen == hs.index(max(hs))
    assert trace.final is rep
    assert np.array_equal(trace.expanded_seeds, trace.selected_report.unshifted)
    assert rep.alignment.seeds == tuple(int(i) for i in trace.expanded_seeds)


def test_replay_is_deterministic(sbm200):
    _, g1, g2 = sbm200
    cfg = SeedFreeConfig(dim=3, M=200, rng_seed=7)
    r1, t1 = run_seedfree(g1, g2, cfg)
    r2, t2 = run_seedfree(g1, g2, cfg)
    assert t1.chosen == t2.chosen and t1.candidates == t2.candidates
    assert np.array_equal(r1.unshifted, r2.unshifted)


def test_threaded_scoring_matches_serial(sbm200):
    _, g1, g2 = sbm200
    r1, t1 = run_seedfree(g1, g2, SeedFreeConfig(dim=3, M=120, rng_seed=3, threads=1))
    r2, t2 = run_seedfree(g1, g2, SeedFreeConfig(dim=3, M=120, rng_seed=3, threads=3))
    assert t1.candidates == t2.candidates
    assert np.array_equal(r1.unshifted, r2.unshifted)


def test_feasible_direct_sampling(sbm200):
    sc, g1, g2 = sbm200
    rep, trace = run_seedfree(g1, g2, SeedFreeConfig(dim=3, M=100, rng_seed=2, sampling_mode="feasible_direct"))
    assert all(c.passed_filter for c in trace.candidates)
    assert accuracy(rep.unshifted, sc.unshifted, 200) >= 0.9


def test_no_viable_candidate_raises_with_trace(sbm200):
    _, g1, g2 = sbm200
    e1, e2 = embed(g1, 3), embed(g2, 3)
    # a 150-vertex candidate always contains shifted pairs, so nothing passes
    cfg = SeedFreeConfig(dim=3, L=150, M=5, rng_seed=0)
    with pytest.raises(NoViableCandidateError) as info:
        run_seedfree_embedded(e1, e2, cfg)
    assert len(info.value.trace.candidates) == 5
    assert info.value.trace.n_passed == 0


def test_correct_candidates_score_higher_than_shifted_ones():
    sc = make_sbm_scenario(200, SBM_B, 0.5, 21)
    g1, g2 = sample_pair(sc, 21)
    pair = EmbeddedPair(embed(g1, 3), embed(g2, 3))
    rng = np.random.default_rng(0)
    good, bad = [], []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for _ in range(40):
            good.append(pair.report(rng.choice(sc.unshifted, 3, replace=False)).unshifted.size)
            bad.append(pair.report(rng.choice(sc.shifted, 3, replace=False)).unshifted.size)
    assert np.median(good) > np.median(bad)


def test_expansion_rarely_hurts():
    ok = 0
    for r in range(10):
        sc = make_sbm_scenario(200, SBM_B, 0.5, 300 + r)
        g1, g2 = sample_pair(sc, 300 + r)
        rep, trace = run_seedfree(g1, g2, SeedFreeConfig(dim=3, M=200, rng_seed=r))
        ok += rep.unshifted.size >= trace.selected_report.unshifted.size - 0.02 * 200
    assert ok >= 9


def test_mismatched_vertex_counts(sbm200):
    _, g1, _ = sbm200
    sc = make_sbm_scenario(50, SBM_B, 0.5, 0)
    small, _ = sample_pair(sc, 0)
    with pytest.raises(ValueError):
        run_seedfree(g1, small, SeedFreeConfig(dim=3, M=5))
