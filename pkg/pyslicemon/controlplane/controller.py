"""
Epoch-driven closed loop: poll difference reservoirs, refit, rebuild the
trade-off tables, solve and deploy.
"""
import logging
import time
from typing import Dict, List, Optional, Tuple

import pandas as pd

from pyslicemon.core import MetricKind, Provenance
from pyslicemon.core.config import SimulationConfig
from pyslicemon.core.errors import FallbackRequired, InsufficientDataError
from pyslicemon.core.slices import CandidateGrid, SliceSpec
from pyslicemon.controlplane.problem import AllocationProblem, EpochDecision, PairOptions
from pyslicemon.controlplane.solvers import solveExact, solveGreedy
from pyslicemon.estimator.distribution import DiffDistribution, fitDifferences
from pyslicemon.estimator.tradeoff import TradeoffModel, buildLookup

logger = logging.getLogger(__name__)

DECISION_COLUMNS = ['epoch', 'slice', 'metric', 'delta', 'E', 'Gamma', 'feasible', 'provenance', 'solve_ms',
                    'build_ms']


class EpochContext:
    """Minimal context: a reservoir snapshot in, deployed thresholds out."""

    def __init__(self, reservoirs: Optional[Dict[Tuple[int, MetricKind, int], List[float]]] = None):
        self.reservoirs = reservoirs or {}
        self.deployed: Optional[Dict[Tuple[int, MetricKind], float]] = None

    def pollReservoirs(self):
        out, self.reservoirs = self.reservoirs, {}
        return out

    def deployThresholds(self, assignment: Dict[Tuple[int, MetricKind], float]):
        self.deployed = dict(assignment)


class EpochController:
    """
    :param slices: Monitored slices.
    :type slices: list.
    :param grid: Candidate thresholds per (slice, metric).
    :type grid: :class:`pyslicemon.core.slices.CandidateGrid`.
    :param config: Simulation parameters (epoch length, λ, budget, estimator settings).
    :type config: :class:`pyslicemon.core.config.SimulationConfig`.
    """

    def __init__(self, slices: List[SliceSpec], grid: CandidateGrid, config: SimulationConfig):
        self.__slices = {s.sliceId: s for s in slices}
        self.__grid = grid
        self.__config = config
        self.__pathLengths = {s.sliceId: s.getLongestPath().getHopCount() for s in slices}
        self.__dists: Dict[Tuple[int, MetricKind, int], DiffDistribution] = {}
        self.__epoch = 0
        self.__log: List[dict] = []
        self.__models: Dict[Tuple[int, MetricKind], TradeoffModel] = {}

    def getEpoch(self) -> int:
        return self.__epoch

    def getModels(self) -> Dict[Tuple[int, MetricKind], TradeoffModel]:
        return self.__models

    def getDecisionLog(self) -> pd.DataFrame:
        return pd.DataFrame(self.__log, columns=DECISION_COLUMNS)

    def coldDecision(self) -> EpochDecision:
        assignment = {pair: self.__grid.getMinimum(*pair) for pair in self.__grid.getPairs()}
        feasible = {pair: True for pair in assignment}
        return EpochDecision(assignment, 0.0, feasible, Provenance.COLD)

    def start(self, ctx) -> EpochDecision:
        """Deploys the most conservative grid point everywhere."""
        decision = self.coldDecision()
        ctx.deployThresholds(decision.assignment)
        self.__record(decision, 0.0)
        return decision

    def __refit(self, reservoirs):
        pooledSamples: Dict[Tuple[int, MetricKind], List[float]] = {}
        for key in sorted(reservoirs):
            samples = reservoirs[key]
            try:
                self.__dists[key] = fitDifferences(samples)
            except InsufficientDataError:
                logger.debug(f'No samples for {key}, keeping previous model')
            pooledSamples.setdefault(key[:2], []).extend(samples)
        pooled = {}
        for pair, samples in pooledSamples.items():
            if samples:
                pooled[pair] = fitDifferences(samples)
        return pooled

    def buildProblem(self) -> AllocationProblem:
        """The allocation problem over the current trade-off tables."""
        config = self.__config
        pairs = []
        for key in sorted(self.__models):
            model = self.__models[key]
            s = self.__slices[key[0]]
            tolerance = s.getTolerance(key[1])
            candidates, errors, overheads = model.candidates, model.errors, model.overheads
            if model.cold:
                candidates, errors, overheads = candidates[:1], errors[:1], overheads[:1]
            errorScale, overheadScale = 1.0, 1.0
            if config.objectiveScaling == 'normalized':
                errorScale = 1.0 / tolerance if tolerance > 0 else 1.0
                floor = float(min(overheads))
                overheadScale = 1.0 / floor if floor > 0 else 1.0
            pairs.append(PairOptions(key[0], key[1], candidates, errors, overheads, tolerance,
                                     s.getCriticalityKey(key[1]), errorScale, overheadScale, model.cold))
        return AllocationProblem(pairs, config.lambda_, config.budget,
                                 config.solveBudgetFraction * config.epoch, config.maxNodes)

    def runEpoch(self, ctx) -> EpochDecision:
        """One control-loop iteration at an epoch boundary."""
        self.__epoch += 1
        buildStart = time.perf_counter()
        reservoirs = ctx.pollReservoirs()
        pooled = self.__refit(reservoirs)
        if not self.__dists and not pooled:
            decision = self.coldDecision()
            ctx.deployThresholds(decision.assignment)
            self.__record(decision, 0.0)
            logger.info(f'Epoch {self.__epoch}: no telemetry yet, deploying the grid minimum')
            return decision

        config = self.__config
        self.__models = buildLookup(self.__dists, self.__grid, self.__pathLengths, pooled,
                                    nSteps=config.betaSteps, seed=config.seed, shimPerHop=config.shimPerHop,
                                    workers=config.buildWorkers)
        buildMs = (time.perf_counter() - buildStart) * 1e3

        problem = self.buildProblem()
        try:
            decision = solveExact(problem)
        except FallbackRequired as e:
            logger.warning(f'Epoch {self.__epoch}: {e}; falling back to the greedy heuristic')
            decision = solveGreedy(problem)

        ctx.deployThresholds(decision.assignment)
        self.__record(decision, buildMs)
        logger.info(f'Epoch {self.__epoch}: objective {decision.objective:.4f} via {decision.provenance}, '
                    f'build {buildMs:.1f} ms, solve {decision.solveMs:.1f} ms')
        return decision

    def __record(self, decision: EpochDecision, buildMs: float):
        for (sliceId, metric) in sorted(decision.assignment):
            self.__log.append({
                'epoch': self.__epoch,
                'slice': sliceId,
                'metric': str(metric),
                'delta': decision.assignment[(sliceId, metric)],
                'E': decision.errors.get((sliceId, metric)),
                'Gamma': decision.overheads.get((sliceId, metric)),
                'feasible': decision.feasible.get((sliceId, metric)),
                'provenance': str(decision.provenance),
                'solve_ms': round(decision.solveMs, 3),
                'build_ms': round(buildMs, 3),
            })
