"""
Exact and heuristic solvers for the threshold allocation problem.
"""
import logging
import time
from typing import Dict, List, Tuple

from pyslicemon.core import MetricKind, Provenance
from pyslicemon.core.errors import FallbackRequired
from pyslicemon.controlplane.problem import AllocationProblem, EpochDecision, PairOptions, decisionFromChoices

logger = logging.getLogger(__name__)

CHECK_EVERY = 1024
EPS = 1e-12


def _rankedOptions(pair: PairOptions, indices: List[int], lambda_: float) -> List[int]:
    # Cheapest first; the larger threshold wins ties.
    return sorted(indices, key=lambda c: (pair.cost(c, lambda_), -pair.candidates[c]))


def solveExact(p: AllocationProblem) -> EpochDecision:
    """Optimal assignment; separable argmin without a budget, branch-and-bound with one."""
    start = time.perf_counter()
    choices: Dict[Tuple[int, MetricKind], int] = {}
    free: List[Tuple[PairOptions, List[int]]] = []
    for pair in p.pairs:
        feasible = pair.feasibleIndices()
        if not feasible:
            choices[pair.getKey()] = pair.conservativeIndex()
            continue
        free.append((pair, _rankedOptions(pair, feasible, p.lambda_)))

    if p.budget is None:
        for pair, ranked in free:
            choices[pair.getKey()] = ranked[0]
        return decisionFromChoices(p, choices, Provenance.EXACT, (time.perf_counter() - start) * 1e3)

    fixedGamma = sum(float(pair.overheads[choices[pair.getKey()]]) for pair in p.pairs
                     if pair.getKey() in choices)
    best, complete = _branchAndBound(free, p, p.budget - fixedGamma, start)
    if best is None:
        raise FallbackRequired('exact solver found no assignment within the overhead budget'
                               + ('' if complete else ' before its limit'))
    for (pair, _), c in zip(free, best):
        choices[pair.getKey()] = c
    provenance = Provenance.EXACT if complete else Provenance.EARLY_STOPPED
    return decisionFromChoices(p, choices, provenance, (time.perf_counter() - start) * 1e3)


def _branchAndBound(free, p: AllocationProblem, budget: float, start: float):
    """Depth-first search over one candidate per pair. Returns (best choices, explored fully)."""
    # Pairs with the widest cost spread are branched on first.
    order = sorted(range(len(free)), key=lambda i: -(free[i][0].cost(free[i][1][-1], p.lambda_)
                                                      - free[i][0].cost(free[i][1][0], p.lambda_)))
    pairs = [free[i] for i in order]
    n = len(pairs)
    minCost = [pair.cost(ranked[0], p.lambda_) for pair, ranked in pairs]
    minGamma = [min(float(pair.overheads[c]) for c in ranked) for pair, ranked in pairs]
    suffixCost = [0.0] * (n + 1)
    suffixGamma = [0.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffixCost[i] = suffixCost[i + 1] + minCost[i]
        suffixGamma[i] = suffixGamma[i + 1] + minGamma[i]

    incumbent = None
    incumbentCost = float('inf')
    stack = [(0, 0.0, 0.0, ())]
    nodes = 0
    while stack:
        nodes += 1
        if p.maxNodes is not None and nodes > p.maxNodes:
            return _reorder(incumbent, order), False
        if p.timeBudget is not None and nodes % CHECK_EVERY == 0 and time.perf_counter() - start > p.timeBudget:
            logger.info(f'Exact solver stopped after {nodes} nodes')
            return _reorder(incumbent, order), False
        depth, cost, gamma, chosen = stack.pop()
        if cost + suffixCost[depth] >= incumbentCost - EPS:
            continue
        if gamma + suffixGamma[depth] > budget + EPS:
            continue
        if depth == n:
            incumbent, incumbentCost = chosen, cost
            continue
        pair, ranked = pairs[depth]
        for c in reversed(ranked):
            stack.append((depth + 1, cost + pair.cost(c, p.lambda_), gamma + float(pair.overheads[c]), chosen + (c,)))
    return _reorder(incumbent, order), True


def _reorder(chosen, order):
    if chosen is None:
        return None
    out = [0] * len(order)
    for position, i in enumerate(order):
        out[i] = chosen[position]
    return out


def solveGreedy(p: AllocationProblem) -> EpochDecision:
    """Criticality-ordered rule: cheapest feasible overhead, else the most conservative candidate."""
    start = time.perf_counter()
    choices = {}
    for pair in sorted(p.pairs, key=lambda x: (x.criticality, int(x.metric))):
        feasible = pair.feasibleIndices()
        if feasible:
            choices[pair.getKey()] = min(feasible, key=lambda c: (pair.overheads[c], -pair.candidates[c]))
        else:
            choices[pair.getKey()] = pair.conservativeIndex()
    return decisionFromChoices(p, choices, Provenance.HEURISTIC, (time.perf_counter() - start) * 1e3)
