"""
Error-bound and overhead models over the candidate grid, and the lookup
tables the controller optimizes over.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from pyslicemon.core import MetricKind
from pyslicemon.core.constants import AUX_BITS, HOP_METADATA_BITS, SHIM_BITS, VALUE_BITS
from pyslicemon.core.slices import CandidateGrid
from pyslicemon.estimator.distribution import DiffDistribution, betaMatrix, deriveSeed

logger = logging.getLogger(__name__)


def reportBits(metric: MetricKind) -> int:
    return VALUE_BITS + (AUX_BITS if metric.hasWireAux else 0)


def errorBound(delta: float, pathBetas: Sequence[float]) -> float:
    """β-discounted bound on the expected end-to-end reporting error.

    :param delta: Threshold.
    :param pathBetas: Insertion probabilities of the |P|-1 upstream hops.
    """
    upstream = len(pathBetas)
    slack = upstream - float(np.sum(pathBetas)) if upstream else 0.0
    if slack < 0:
        logger.warning(f'Sum of betas exceeds {upstream} by {-slack}; clamping error bound to 0')
        return 0.0
    if slack == 0:
        return 0.0
    return slack * delta


def overhead(delta: float, pathBetas: Sequence[float], b0: int = SHIM_BITS, bh: int = HOP_METADATA_BITS,
             b: int = VALUE_BITS, shimPerHop: bool = True) -> float:
    """Expected telemetry bits per packet for one metric over a |P|-hop path."""
    hops = len(pathBetas)
    fixed = (b0 + bh) * hops if shimPerHop else b0 + bh * hops
    return fixed + b * float(np.sum(pathBetas))


class TradeoffModel:
    def __init__(self, sliceId: int, metric: MetricKind, candidates: Sequence[float], betas: np.ndarray,
                 errors: np.ndarray, overheads: np.ndarray, pathLength: int, b0: int, bh: int, b: int,
                 cold: bool = False):
        self.sliceId = sliceId
        self.metric = metric
        self.candidates = tuple(candidates)
        # betas[c, j] is the insertion probability at hop j+1 under candidate c.
        self.betas = np.asarray(betas, dtype=float)
        self.errors = np.asarray(errors, dtype=float)
        self.overheads = np.asarray(overheads, dtype=float)
        self.pathLength = pathLength
        self.b0 = b0
        self.bh = bh
        self.b = b
        self.cold = cold

    def __repr__(self):
        return (f'TradeoffModel(sliceId={self.sliceId}, metric={self.metric}, candidates={len(self.candidates)}, '
                f'pathLength={self.pathLength}, cold={self.cold})')


def _coldModel(sliceId, metric, candidates, pathLength, b0, bh, b, shimPerHop) -> TradeoffModel:
    worstE = errorBound(candidates[0], [0.0] * (pathLength - 1))
    worstG = overhead(candidates[0], [1.0] * pathLength, b0, bh, b, shimPerHop)
    n = len(candidates)
    return TradeoffModel(sliceId, metric, candidates, np.zeros((n, pathLength)), np.full(n, worstE),
                         np.full(n, worstG), pathLength, b0, bh, b, cold=True)


def buildLookup(dists: Dict[Tuple[int, MetricKind, int], DiffDistribution], grid: CandidateGrid,
                paths: Dict[int, int], pooled: Optional[Dict[Tuple[int, MetricKind], DiffDistribution]] = None,
                nSteps: int = 10000, seed: int = 0, shimPerHop: bool = True,
                workers: int = 1) -> Dict[Tuple[int, MetricKind], TradeoffModel]:
    """Builds a TradeoffModel per (slice, metric) pair of the grid.

    :param dists: Fitted distributions keyed by (slice, metric, hop index), hop index 0-based.
    :param grid: Candidate thresholds.
    :param paths: Path length |P| per slice.
    :param pooled: Slice-metric distributions used for hops without their own.
    """
    pooled = pooled or {}
    rows = []
    plan = []
    for sliceId, metric in grid.getPairs():
        candidates = grid.getValues(sliceId, metric)
        pathLength = paths[sliceId]
        hopDists = []
        for hop in range(pathLength):
            dist = dists.get((sliceId, metric, hop)) or pooled.get((sliceId, metric))
            hopDists.append(dist)
        if any(d is None for d in hopDists):
            plan.append((sliceId, metric, candidates, pathLength, None))
            continue
        first = len(rows)
        for hop, dist in enumerate(hopDists):
            rows.append((dist, candidates, deriveSeed(seed, sliceId, int(metric), hop)))
        plan.append((sliceId, metric, candidates, pathLength, first))

    width = max((len(r[1]) for r in rows), default=0)
    deltas = np.full((len(rows), width), np.inf)
    for i, (_, candidates, _) in enumerate(rows):
        deltas[i, :len(candidates)] = candidates

    chunks = np.array_split(np.arange(len(rows)), max(1, min(workers, len(rows)))) if rows else []

    def work(indices):
        return betaMatrix([rows[i][0] for i in indices], deltas[indices], nSteps, [rows[i][2] for i in indices])

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            parts = list(executor.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    betaRows = np.concatenate(parts, axis=0) if parts else np.zeros((0, width))

    models = {}
    for sliceId, metric, candidates, pathLength, first in plan:
        b = reportBits(metric)
        if first is None:
            models[(sliceId, metric)] = _coldModel(sliceId, metric, candidates, pathLength, SHIM_BITS,
                                                   HOP_METADATA_BITS, b, shimPerHop)
            continue
        n = len(candidates)
        betas = betaRows[first:first + pathLength, :n].T
        errors = np.array([errorBound(candidates[c], betas[c, :pathLength - 1]) for c in range(n)])
        overheads = np.array([overhead(candidates[c], betas[c], SHIM_BITS, HOP_METADATA_BITS, b, shimPerHop)
                              for c in range(n)])
        models[(sliceId, metric)] = TradeoffModel(sliceId, metric, candidates, betas, errors, overheads,
                                                  pathLength, SHIM_BITS, HOP_METADATA_BITS, b)
    return models


def lookupToDataFrame(models: Dict[Tuple[int, MetricKind], TradeoffModel]) -> pd.DataFrame:
    maxHops = max((m.pathLength for m in models.values()), default=0)
    records = []
    for (sliceId, metric) in sorted(models):
        model = models[(sliceId, metric)]
        for c, delta in enumerate(model.candidates):
            record = {'slice': sliceId, 'metric': str(metric), 'delta': delta}
            for j in range(maxHops):
                record[f'beta_{j + 1}'] = model.betas[c, j] if j < model.pathLength else np.nan
            record['E'] = model.errors[c]
            record['Gamma'] = model.overheads[c]
            record['cold'] = model.cold
            records.append(record)
    return pd.DataFrame.from_records(records)


def writeLookupCsv(models: Dict[Tuple[int, MetricKind], TradeoffModel], file_path: str):
    lookupToDataFrame(models).to_csv(file_path, index=False)
