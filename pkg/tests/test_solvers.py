import itertools

import numpy as np
import pytest

from pyslicemon.core import MetricKind, Provenance
from pyslicemon.core.errors import ConfigurationError, FallbackRequired
from pyslicemon.controlplane.problem import AllocationProblem, PairOptions
from pyslicemon.controlplane.solvers import solveExact, solveGreedy

LAT = MetricKind.LATENCY
METRICS = (MetricKind.LATENCY, MetricKind.JITTER, MetricKind.LOSS)
TOLERANCES = {MetricKind.LATENCY: 1.0, MetricKind.JITTER: 0.05, MetricKind.LOSS: 1e-3}


def pair(sliceId, rows, tolerance, metric=LAT, criticality=None):
    candidates, errors, overheads = zip(*rows)
    return PairOptions(sliceId, metric, candidates, errors, overheads, tolerance, criticality)


def test_single_feasible_candidate():
    p = AllocationProblem([pair(0, [(1.0, 0.5, 100.0), (4.0, 2.0, 40.0)], 1.0)], lambda_=0.5)
    decision = solveExact(p)
    assert decision.assignment == {(0, LAT): 1.0}
    assert decision.provenance == Provenance.EXACT
    assert all(decision.feasible.values())


def test_two_slices_choose_their_cheapest_feasible_candidate():
    rows = [(1.0, 0.2, 100.0), (2.0, 0.6, 60.0), (4.0, 1.4, 40.0)]
    p = AllocationProblem([pair(0, rows, 1.0), pair(1, rows, 1.0)], lambda_=0.1)
    decision = solveExact(p)
    assert decision.assignment == {(0, LAT): 2.0, (1, LAT): 2.0}


def test_infeasible_pair_gets_the_most_conservative_candidate():
    rows = [(1.0, 3.0, 100.0), (4.0, 5.0, 40.0)]
    p = AllocationProblem([pair(0, rows, 1.0)], lambda_=0.0)
    decision = solveExact(p)
    assert decision.assignment == {(0, LAT): 1.0}
    assert decision.feasible == {(0, LAT): False}


def test_ties_prefer_the_larger_threshold():
    rows = [(1.0, 0.5, 50.0), (2.0, 0.5, 50.0)]
    decision = solveExact(AllocationProblem([pair(0, rows, 1.0)], lambda_=0.5))
    assert decision.assignment == {(0, LAT): 2.0}


def test_lambda_out_of_range():
    with pytest.raises(ConfigurationError):
        AllocationProblem([], lambda_=1.5)


def randomProblem(rng, nPairs, nCandidates, budget=None):
    pairs = []
    for i in range(nPairs):
        candidates = np.sort(rng.uniform(0.1, 10.0, nCandidates))
        errors = np.sort(rng.uniform(0.0, 2.0, nCandidates))
        overheads = np.sort(rng.uniform(40.0, 200.0, nCandidates))[::-1]
        pairs.append(PairOptions(i, LAT, candidates, errors, overheads, tolerance=1.0,
                                 criticality=(int(rng.integers(3)), 1.0, i)))
    return AllocationProblem(pairs, lambda_=float(rng.uniform()), budget=budget)


def mixedProblem(rng, nSlices, metricsPerSlice=None, maxCandidates=4):
    """Slices monitoring one or two of latency, jitter and loss, scaled as the controller scales them."""
    pairs = []
    for sliceId in range(nSlices):
        count = metricsPerSlice or int(rng.integers(1, 3))
        rank = int(rng.integers(3))
        for m in sorted(rng.choice(len(METRICS), size=count, replace=False)):
            metric = METRICS[m]
            tolerance = TOLERANCES[metric]
            n = int(rng.integers(2, maxCandidates + 1))
            candidates = np.sort(rng.uniform(0.05, 5.0, n)) * tolerance
            errors = np.sort(rng.uniform(0.0, 2.0 * tolerance, n))
            overheads = np.sort(rng.uniform(40.0, 200.0, n))[::-1]
            pairs.append(PairOptions(sliceId, metric, candidates, errors, overheads, tolerance,
                                     (rank, tolerance, sliceId, int(metric)), errorScale=1.0 / tolerance,
                                     overheadScale=1.0 / overheads.min()))
    return AllocationProblem(pairs, lambda_=float(rng.uniform()))


def bruteForce(problem):
    """Minimum objective over every combination of per-pair choices, and one combination reaching it."""
    ranges = []
    for p in problem.pairs:
        feasible = p.feasibleIndices()
        ranges.append(feasible if feasible else [p.conservativeIndex()])
    costs = np.zeros(())
    gammas = np.zeros(())
    for p, r in zip(problem.pairs, ranges):
        costs = np.add.outer(costs, [p.cost(c, problem.lambda_) for c in r])
        gammas = np.add.outer(gammas, p.overheads[r])
    if problem.budget is not None:
        costs = np.where(gammas <= problem.budget + 1e-9, costs, np.inf)
    index = np.unravel_index(int(np.argmin(costs)), costs.shape)
    best = float(costs[index])
    if best == np.inf:
        return best, None
    return best, tuple(r[i] for r, i in zip(ranges, index))


def test_exact_matches_exhaustive_search():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        problem = randomProblem(rng, int(rng.integers(1, 4)), int(rng.integers(2, 5)))
        best, _ = bruteForce(problem)
        assert solveExact(problem).objective == pytest.approx(best)


def test_exact_matches_exhaustive_search_over_mixed_metrics():
    rng = np.random.default_rng(31)
    sizes, metrics = set(), set()
    for i in range(160):
        problem = mixedProblem(rng, 1 + i % 4, metricsPerSlice=None if i % 2 else 2)
        best, _ = bruteForce(problem)
        assert solveExact(problem).objective == pytest.approx(best)
        sizes.add(len(problem.pairs))
        metrics.update(p.metric for p in problem.pairs)
    assert max(sizes) == 8
    assert metrics == set(METRICS)


def test_exact_matches_exhaustive_search_over_mixed_metrics_under_a_budget():
    rng = np.random.default_rng(43)
    checked = 0
    for _ in range(40):
        problem = mixedProblem(rng, 4, metricsPerSlice=2)
        problem.budget = solveExact(problem).getTotalOverhead() * 0.98
        best, _ = bruteForce(problem)
        if best == np.inf:
            with pytest.raises(FallbackRequired):
                solveExact(problem)
            continue
        decision = solveExact(problem)
        assert decision.objective == pytest.approx(best)
        assert decision.getTotalOverhead() <= problem.budget + 1e-9
        checked += 1
    assert checked > 0


def test_exact_matches_exhaustive_search_under_a_budget():
    rng = np.random.default_rng(7)
    checked = 0
    for _ in range(100):
        problem = randomProblem(rng, 3, 4)
        unconstrained = solveExact(problem).getTotalOverhead()
        problem.budget = unconstrained * 0.97
        best, _ = bruteForce(problem)
        if best == np.inf:
            with pytest.raises(FallbackRequired):
                solveExact(problem)
            continue
        decision = solveExact(problem)
        assert decision.objective == pytest.approx(best)
        assert decision.getTotalOverhead() <= problem.budget + 1e-9
        checked += 1
    assert checked > 0


def wideProblem():
    rows = [(1.0, 0.1, 100.0), (2.0, 0.2, 80.0), (3.0, 0.3, 60.0), (4.0, 0.4, 40.0)]
    return AllocationProblem([pair(i, rows, 1.0) for i in range(4)], lambda_=0.5)


def test_node_limit_without_incumbent_requires_fallback():
    problem = wideProblem()
    problem.budget = 1e9
    problem.maxNodes = 1
    with pytest.raises(FallbackRequired):
        solveExact(problem)


def test_node_limit_after_an_incumbent_is_early_stopped():
    problem = wideProblem()
    problem.budget = 1e9
    problem.maxNodes = 6
    decision = solveExact(problem)
    assert decision.provenance == Provenance.EARLY_STOPPED


def test_error_term_weight_is_monotone():
    rng = np.random.default_rng(11)
    for _ in range(20):
        problem = randomProblem(rng, 4, 5)
        totals = []
        for lambda_ in np.linspace(0.0, 1.0, 11):
            problem.lambda_ = float(lambda_)
            totals.append(solveExact(problem).getTotalError())
        assert all(b <= a + 1e-9 for a, b in zip(totals, totals[1:]))


def test_greedy_picks_cheapest_feasible():
    rows = [(1.0, 0.2, 100.0), (2.0, 0.6, 60.0), (4.0, 1.4, 40.0)]
    decision = solveGreedy(AllocationProblem([pair(0, rows, 1.0)], lambda_=1.0))
    assert decision.assignment == {(0, LAT): 2.0}
    assert decision.provenance == Provenance.HEURISTIC


def test_greedy_never_violates_a_satisfiable_tolerance():
    rng = np.random.default_rng(5)
    for _ in range(50):
        problem = randomProblem(rng, 6, 5)
        decision = solveGreedy(problem)
        for p in problem.pairs:
            if p.feasibleIndices():
                assert decision.feasible[p.getKey()]


def test_greedy_falls_back_to_the_minimum_error():
    rows = [(1.0, 1.5, 100.0), (2.0, 2.5, 60.0)]
    decision = solveGreedy(AllocationProblem([pair(0, rows, 1.0)]))
    assert decision.assignment == {(0, LAT): 1.0}
    assert decision.feasible == {(0, LAT): False}


def test_greedy_breaks_overhead_ties_toward_the_larger_threshold():
    rows = [(1.0, 0.2, 60.0), (2.0, 0.6, 60.0), (4.0, 1.4, 40.0)]
    decision = solveGreedy(AllocationProblem([pair(0, rows, 1.0)], lambda_=1.0, budget=1.0))
    # The budget is not consulted.
    assert decision.assignment == {(0, LAT): 2.0}
    assert decision.getTotalOverhead() == pytest.approx(60.0)
