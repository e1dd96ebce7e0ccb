"""
Monitoring accuracy from a collector view against ground truth.
"""
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd

from pyslicemon.core import MetricKind, SliceType
from pyslicemon.netsim.collector import CollectorView, GroundTruth

MEASURE_COLUMNS = ['slice', 'slice_type', 'metric', 'tolerance', 'packets', 'violations', 'violation_fraction',
                   'mean_error', 'max_error', 'p90_intervals', 'p90_error', 'p90_violation_fraction']


def p90Series(view: CollectorView, truth: GroundTruth, sliceId: int, intervalNs: float) -> pd.DataFrame:
    """Per-interval P90 of true and reported latency for one slice."""
    columns = ['interval', 'true_p90', 'reported_p90', 'error']
    actual = truth.values.get((sliceId, MetricKind.LATENCY))
    if actual is None or len(actual) == 0:
        return pd.DataFrame(columns=columns)
    frame = pd.DataFrame({
        'interval': np.frombuffer(actual.times, dtype=np.int64) // int(intervalNs),
        'truth': np.frombuffer(actual.values, dtype=np.float64),
    })
    out = frame.groupby('interval')['truth'].quantile(0.9).rename('true_p90').to_frame()
    if sliceId in view.p90:
        out['reported_p90'] = pd.Series(view.p90[sliceId], dtype=float)
    else:
        est = view.estimates.get((sliceId, MetricKind.LATENCY))
        if est is None or len(est) == 0:
            out['reported_p90'] = np.nan
        else:
            estFrame = pd.DataFrame({
                'interval': np.frombuffer(est.times, dtype=np.int64) // int(intervalNs),
                'reported': np.frombuffer(est.values, dtype=np.float64),
            })
            out['reported_p90'] = estFrame.groupby('interval')['reported'].quantile(0.9)
    out['error'] = (out['reported_p90'] - out['true_p90']).abs()
    return out.reset_index()[columns]


def measure(view: CollectorView, truth: GroundTruth, tolerances: Dict[Tuple[int, MetricKind], float],
            sliceTypes: Optional[Dict[int, SliceType]] = None, intervalNs: float = 500e6) -> pd.DataFrame:
    """Per (slice, metric) violation fraction and P90 accuracy; empty slices are reported as absent (NaN)."""
    sliceTypes = sliceTypes or {}
    rows = []
    for sliceId, metric in sorted(tolerances):
        eps = tolerances[(sliceId, metric)]
        row = dict.fromkeys(MEASURE_COLUMNS, np.nan)
        row.update({'slice': sliceId, 'slice_type': str(sliceTypes[sliceId]) if sliceId in sliceTypes else '',
                    'metric': str(metric), 'tolerance': eps, 'packets': 0, 'violations': 0, 'p90_intervals': 0})
        actual = truth.values.get((sliceId, metric))
        if actual is not None and len(actual) > 0:
            row['packets'] = len(actual)
            est = view.estimates.get((sliceId, metric))
            if view.perPacket and est is not None and len(est) == len(actual):
                errors = np.abs(np.frombuffer(est.values, dtype=np.float64)
                                - np.frombuffer(actual.values, dtype=np.float64))
                row['violations'] = int(np.count_nonzero(errors > eps))
                row['violation_fraction'] = row['violations'] / len(errors)
                row['mean_error'] = float(errors.mean())
                row['max_error'] = float(errors.max())
            else:
                row['violations'] = np.nan
        if metric == MetricKind.LATENCY:
            series = p90Series(view, truth, sliceId, intervalNs).dropna()
            row['p90_intervals'] = len(series)
            if len(series):
                row['p90_error'] = float(series['error'].mean())
                row['p90_violation_fraction'] = float((series['error'] > eps).mean())
        rows.append(row)
    return pd.DataFrame(rows, columns=MEASURE_COLUMNS)
