"""
The per-epoch threshold allocation problem and its solution record.
"""
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from pyslicemon.core import MetricKind, Provenance
from pyslicemon.core.errors import ConfigurationError


class PairOptions:
    """Candidates of one (slice, metric) pair with their predicted error and overhead."""

    def __init__(self, sliceId: int, metric: MetricKind, candidates: Sequence[float], errors: Sequence[float],
                 overheads: Sequence[float], tolerance: float, criticality=None, errorScale: float = 1.0,
                 overheadScale: float = 1.0, cold: bool = False):
        if len(candidates) == 0:
            raise ConfigurationError(f'pair ({sliceId}, {metric}) has no candidates', ['candidates'])
        if not (len(candidates) == len(errors) == len(overheads)):
            raise ConfigurationError('candidate, error and overhead lists differ in length', ['candidates'])
        self.sliceId = sliceId
        self.metric = MetricKind(metric)
        self.candidates = tuple(float(c) for c in candidates)
        self.errors = np.asarray(errors, dtype=float)
        self.overheads = np.asarray(overheads, dtype=float)
        if np.any(self.errors < 0) or np.any(self.overheads < 0):
            raise ConfigurationError('errors and overheads must be non-negative', ['errors', 'overheads'])
        self.tolerance = float(tolerance)
        self.criticality = criticality if criticality is not None else (0, self.tolerance, sliceId)
        self.errorScale = float(errorScale)
        self.overheadScale = float(overheadScale)
        self.cold = cold

    def getKey(self) -> Tuple[int, MetricKind]:
        return self.sliceId, self.metric

    def feasibleIndices(self) -> List[int]:
        return [c for c in range(len(self.candidates)) if self.errors[c] <= self.tolerance]

    def conservativeIndex(self) -> int:
        """Index of the minimum-error candidate, the smaller threshold on ties."""
        return int(np.argmin(self.errors))

    def cost(self, c: int, lambda_: float) -> float:
        return (lambda_ * self.errors[c] * self.errorScale
                + (1.0 - lambda_) * self.overheads[c] * self.overheadScale)

    def __repr__(self):
        return f'PairOptions(sliceId={self.sliceId}, metric={self.metric}, candidates={len(self.candidates)}, tolerance={self.tolerance})'


class AllocationProblem:
    """
    :param pairs: One entry per (slice, metric).
    :param lambda_: Weight of the error term, in [0, 1].
    :param budget: Optional cap on the summed overhead of all pairs, bits per packet.
    :param timeBudget: Wall-clock limit for the exact solver, seconds.
    :param maxNodes: Deterministic node limit for the exact solver.
    """

    def __init__(self, pairs: List[PairOptions], lambda_: float = 0.5, budget: Optional[float] = None,
                 timeBudget: Optional[float] = None, maxNodes: Optional[int] = None):
        if not 0.0 <= lambda_ <= 1.0:
            raise ConfigurationError(f'lambda {lambda_} outside [0, 1]', ['Lambda'])
        self.pairs = list(pairs)
        self.lambda_ = float(lambda_)
        self.budget = budget
        self.timeBudget = timeBudget
        self.maxNodes = maxNodes

    def __repr__(self):
        return (f'AllocationProblem(pairs={len(self.pairs)}, lambda_={self.lambda_}, budget={self.budget}, '
                f'timeBudget={self.timeBudget}, maxNodes={self.maxNodes})')


class EpochDecision:
    def __init__(self, assignment: Dict[Tuple[int, MetricKind], float], objective: float,
                 feasible: Dict[Tuple[int, MetricKind], bool], provenance: Provenance, solveMs: float = 0.0,
                 errors: Optional[Dict[Tuple[int, MetricKind], float]] = None,
                 overheads: Optional[Dict[Tuple[int, MetricKind], float]] = None):
        self.assignment = dict(assignment)
        self.objective = float(objective)
        self.feasible = dict(feasible)
        self.provenance = provenance
        self.solveMs = float(solveMs)
        self.errors = dict(errors or {})
        self.overheads = dict(overheads or {})

    def getTotalError(self) -> float:
        return float(sum(self.errors.values()))

    def getTotalOverhead(self) -> float:
        return float(sum(self.overheads.values()))

    def sameAssignment(self, other: 'EpochDecision') -> bool:
        return other is not None and self.assignment == other.assignment

    def __repr__(self):
        return (f'EpochDecision(pairs={len(self.assignment)}, objective={self.objective}, '
                f'provenance={self.provenance}, solveMs={self.solveMs:.2f})')


def decisionFromChoices(problem: AllocationProblem, choices: Dict[Tuple[int, MetricKind], int],
                        provenance: Provenance, solveMs: float = 0.0) -> EpochDecision:
    assignment, feasible, errors, overheads = {}, {}, {}, {}
    objective = 0.0
    for pair in problem.pairs:
        c = choices[pair.getKey()]
        assignment[pair.getKey()] = pair.candidates[c]
        feasible[pair.getKey()] = bool(pair.errors[c] <= pair.tolerance)
        errors[pair.getKey()] = float(pair.errors[c])
        overheads[pair.getKey()] = float(pair.overheads[c])
        objective += pair.cost(c, problem.lambda_)
    return EpochDecision(assignment, objective, feasible, provenance, solveMs, errors, overheads)
