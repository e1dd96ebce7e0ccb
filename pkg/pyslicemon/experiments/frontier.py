"""
Pareto frontier extraction over (bits per packet, violation fraction).
"""
import glob
import logging
from typing import List, Optional

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

FRONTIER_COLUMNS = ['scheme', 'params', 'runs', 'bits_per_packet', 'violation_fraction', 'violation_urllc',
                    'violation_embb', 'violation_mmtc']


class FrontierPoint:
    def __init__(self, scheme: str, params: str, overhead: float, violation: float, perType: Optional[dict] = None,
                 runs: int = 1):
        self.scheme = scheme
        self.params = params
        self.overhead = float(overhead)
        self.violation = float(violation)
        self.perType = dict(perType or {})
        self.runs = int(runs)

    def __repr__(self):
        return f'FrontierPoint(scheme={self.scheme}, params={self.params}, overhead={self.overhead}, violation={self.violation})'


def paretoMask(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Boolean mask of points not strictly dominated on both coordinates; O(n log n)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = np.zeros(x.size, dtype=bool)
    order = np.lexsort((y, x))
    bestY = np.inf
    i = 0
    while i < order.size:
        j = i
        while j < order.size and x[order[j]] == x[order[i]]:
            j += 1
        group = order[i:j]
        # Only points with a strictly smaller x can dominate this group.
        keep[group] = y[group] <= bestY
        bestY = min(bestY, float(y[group].min()))
        i = j
    return keep


def paretoFrontier(points: List[FrontierPoint]) -> List[FrontierPoint]:
    if not points:
        return []
    mask = paretoMask(np.array([p.overhead for p in points]), np.array([p.violation for p in points]))
    kept = [p for p, k in zip(points, mask) if k]
    return sorted(kept, key=lambda p: (p.overhead, p.violation))


def loadResults(resultsGlob: str) -> pd.DataFrame:
    frames = []
    for pattern in resultsGlob.split(','):
        for file in sorted(glob.glob(pattern)):
            frames.append(pd.read_csv(file))
    if not frames:
        return pd.DataFrame()
    return pd.concat(frames, ignore_index=True)


def frontierPoints(results: pd.DataFrame) -> List[FrontierPoint]:
    """One point per (scheme, params), averaged over replicates."""
    if results.empty:
        return []
    ok = results[results['status'] == 'ok'] if 'status' in results else results
    ok = ok.dropna(subset=['bits_per_packet', 'violation_fraction'])
    points = []
    for (scheme, params), group in ok.groupby(['scheme', 'params'], sort=True):
        perType = {c: float(group[c].mean()) for c in ('violation_urllc', 'violation_embb', 'violation_mmtc')
                   if c in group}
        points.append(FrontierPoint(scheme, params, group['bits_per_packet'].mean(),
                                    group['violation_fraction'].mean(), perType, len(group)))
    return points


def frontierFrame(points: List[FrontierPoint]) -> pd.DataFrame:
    rows = []
    for scheme in sorted({p.scheme for p in points}):
        for p in paretoFrontier([q for q in points if q.scheme == scheme]):
            row = {'scheme': p.scheme, 'params': p.params, 'runs': p.runs,
                   'bits_per_packet': p.overhead, 'violation_fraction': p.violation}
            row.update(p.perType)
            rows.append(row)
    return pd.DataFrame(rows, columns=FRONTIER_COLUMNS)


def cmdFrontier(resultsGlob: str, outputPath: str) -> pd.DataFrame:
    """Writes the per-scheme Pareto-optimal points of all matching results files."""
    results = loadResults(resultsGlob)
    frame = frontierFrame(frontierPoints(results))
    if frame.empty:
        logger.warning(f'No successful runs matched {resultsGlob}; writing an empty frontier')
    frame.to_csv(outputPath, index=False)
    logger.info(f'Wrote {len(frame)} frontier points to {outputPath}')
    return frame
