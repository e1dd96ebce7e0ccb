"""
Micro-benchmarks: epoch length, bucket array sizing and control-plane
scaling.
"""
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from pyslicemon.controlplane.controller import EpochContext, EpochController
from pyslicemon.controlplane.solvers import solveExact, solveGreedy
from pyslicemon.core import MetricKind
from pyslicemon.core.config import SimulationConfig
from pyslicemon.core.errors import ConfigurationError, FallbackRequired
from pyslicemon.core.slices import CandidateGrid, PathSpec
from pyslicemon.core.topology import HOST_PORT
from pyslicemon.core.workload import makeWorkload
from pyslicemon.dataplane.buckets import BucketArrays
from pyslicemon.dataplane.packet import Packet
from pyslicemon.dataplane.switch import SwitchState
from pyslicemon.estimator.distribution import deriveSeed
from pyslicemon.experiments.runner import buildTopologyFor, getDefaultWorkers, runAdaptive

logger = logging.getLogger(__name__)

KINDS = ('tau', 'buckets', 'solver-scaling')
TAU_SECONDS = (1, 3, 5, 7, 10, 15)
BUCKET_ARRAYS = (1, 2, 3, 4)
BUCKET_WIDTHS = (1024, 2048, 4096)
SLICE_COUNTS = (50, 100, 150, 200, 250, 300)


def rankTau(frame: pd.DataFrame) -> pd.DataFrame:
    """Adds normalized overhead and violation ranks; the lowest rank sum is the best trade-off."""
    out = frame.copy()
    n = len(out)
    denominator = max(n - 1, 1)
    out['overhead_rank'] = (out['bits_per_packet'].rank(method='min') - 1) / denominator
    out['violation_rank'] = (out['violation_fraction'].rank(method='min') - 1) / denominator
    out['rank_sum'] = out['overhead_rank'] + out['violation_rank']
    best = out.sort_values(['rank_sum', 'violation_fraction', 'tau']).index[0] if n else None
    out['best'] = out.index == best
    return out


def _tauRun(tau: float, mix: str, nSlices: int, config: SimulationConfig) -> dict:
    config = config.replace(epoch=float(tau), duration=max(config.duration, 2.0 * tau))
    topology = buildTopologyFor(config)
    slices = makeWorkload(mix, nSlices, config.seed, topology, config.pathsPerSlice, config.toleranceFraction)
    summary = runAdaptive(slices, config, topology).getSummary()
    return {'tau': tau, 'bits_per_packet': summary['bits_per_packet'],
            'violation_fraction': summary['violation_fraction'], 'miss_rate': summary['miss_rate'],
            'saturated': summary['saturated']}


def tauSweep(config: SimulationConfig, mix: str = 'BAL', nSlices: int = 300, taus: Sequence[float] = TAU_SECONDS,
             workers: int = 1) -> pd.DataFrame:
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(_tauRun, tau, mix, nSlices, config) for tau in taus]
            rows = [future.result() for future in futures]
    else:
        rows = [_tauRun(tau, mix, nSlices, config) for tau in taus]
    return rankTau(pd.DataFrame(rows))


def bucketBenchmark(d: int, w: int, nKeys: int = 1000, packets: int = 60000, warmup: int = 20000,
                    seed: int = 1, hashSeed: int = 0x5eed, delta: float = 0.05) -> dict:
    """Drives nKeys flows over a two-hop path and reports the steady-state miss rate.

    The second hop is the switch under test. Its miss notifications are
    delivered to the first hop, and the forced reports on both hops count
    toward the recovery overhead.
    """
    rng = np.random.default_rng(seed)
    paths: Dict[int, PathSpec] = {}
    for i in range(nKeys):
        paths[i] = PathSpec(i, [0, 1], [1, HOST_PORT])
    upstream = SwitchState(0, BucketArrays(4, 4 * nKeys, hashSeed + 1), paths)
    switch = SwitchState(1, BucketArrays(d, w, hashSeed), paths)
    thresholds = {(i, MetricKind.LATENCY): delta for i in range(nKeys)}
    upstream.deployThresholds(thresholds)
    switch.deployThresholds(thresholds)

    keys = rng.integers(0, nKeys, packets)
    latenciesNs = rng.exponential(100_000.0, packets).astype(np.int64)
    upstreamNs = rng.exponential(100_000.0, packets).astype(np.int64)
    seq = np.zeros(nKeys, dtype=np.int64)
    before = upstreamBefore = None
    bits = 0
    for n in range(packets):
        if n == warmup:
            stats, upstreamStats = switch.getStats(), upstream.getStats()
            before = (stats.lookups, stats.misses, stats.forcedBits)
            upstreamBefore = (upstreamStats.notificationsReceived, upstreamStats.forcedBits)
        key = int(keys[n])
        seq[key] += 1
        pkt = Packet(key, key, int(seq[key]), 100)
        for hopIndex, (node, elapsedNs) in enumerate(((upstream, upstreamNs[n]), (switch, latenciesNs[n]))):
            pkt.hopIndex = hopIndex
            pkt.ingressNs = 0
            pkt.egressNs = int(elapsedNs)
            node.processPacket(pkt)
        for notification in switch.drainNotifications():
            upstream.onMissNotification(notification)
        if n >= warmup:
            bits += pkt.telemetryBits

    stats, upstreamStats = switch.getStats(), upstream.getStats()
    lookups = stats.lookups - before[0]
    misses = stats.misses - before[1]
    upstreamForcedBits = upstreamStats.forcedBits - upstreamBefore[1]
    forcedBits = stats.forcedBits - before[2] + upstreamForcedBits
    return {'d': d, 'w': w, 'keys': nKeys, 'lookups': lookups, 'misses': misses,
            'miss_rate': misses / lookups if lookups else np.nan,
            'notifications': upstreamStats.notificationsReceived - upstreamBefore[0],
            'forced_bits': forcedBits, 'upstream_forced_bits': upstreamForcedBits, 'telemetry_bits': bits,
            'recovery_overhead': forcedBits / bits if bits else 0.0,
            'memory_bytes': switch.getBuckets().getMemoryBytes()}


def bucketSweep(arrays: Sequence[int] = BUCKET_ARRAYS, widths: Sequence[int] = BUCKET_WIDTHS, nKeys: int = 1000,
                seed: int = 1) -> pd.DataFrame:
    return pd.DataFrame([bucketBenchmark(d, w, nKeys, seed=seed) for d in arrays for w in widths])


def syntheticReservoirs(slices, seed: int, size: int = 256) -> Dict:
    """Laplace differences with a scale proportional to each pair's tolerance."""
    reservoirs = {}
    for s in slices:
        for metric in s.getMetrics():
            for hop in range(s.getLongestPath().getHopCount()):
                rng = np.random.default_rng(deriveSeed(seed, s.sliceId, int(metric), hop))
                scale = s.getTolerance(metric) * 0.2
                reservoirs[(s.sliceId, metric, hop)] = rng.laplace(0.0, scale, size).tolist()
    return reservoirs


def solverScaling(config: SimulationConfig, mix: str = 'BAL', counts: Sequence[int] = SLICE_COUNTS) -> pd.DataFrame:
    """Lookup-build and solve wall times of the exact and heuristic solvers under a binding budget."""
    rows = []
    topology = buildTopologyFor(config)
    for n in counts:
        slices = makeWorkload(mix, n, config.seed, topology, config.pathsPerSlice, config.toleranceFraction)
        grid = CandidateGrid.forSlices(slices, config.candidateCount, config.stepFraction, config.bitWidth)
        controller = EpochController(slices, grid, config)
        controller.runEpoch(EpochContext(syntheticReservoirs(slices, config.seed)))
        buildMs = float(controller.getDecisionLog()['build_ms'].iloc[-1])

        problem = controller.buildProblem()
        unbudgeted = solveExact(problem).getTotalOverhead()
        floor = sum(float(min(pair.overheads[c] for c in (pair.feasibleIndices() or [pair.conservativeIndex()])))
                    for pair in problem.pairs)
        problem.budget = floor + 0.5 * (unbudgeted - floor)

        start = time.perf_counter()
        try:
            exact = solveExact(problem)
            exactProvenance, exactObjective = str(exact.provenance), exact.objective
        except FallbackRequired:
            exactProvenance, exactObjective = 'FALLBACK', np.nan
        exactMs = (time.perf_counter() - start) * 1e3

        start = time.perf_counter()
        heuristic = solveGreedy(problem)
        heuristicMs = (time.perf_counter() - start) * 1e3
        rows.append({'slices': n, 'pairs': len(problem.pairs), 'budget': problem.budget, 'build_ms': buildMs,
                     'exact_ms': exactMs, 'heuristic_ms': heuristicMs, 'exact_provenance': exactProvenance,
                     'exact_objective': exactObjective, 'heuristic_objective': heuristic.objective})
        logger.info(f'{n} slices: build {buildMs:.1f} ms, exact {exactMs:.1f} ms, heuristic {heuristicMs:.2f} ms')
    return pd.DataFrame(rows)


def cmdMicro(kind: str, outputDir: str = 'results', config: Optional[SimulationConfig] = None, mix: str = 'BAL',
             nSlices: int = 300, workers: Optional[int] = None) -> pd.DataFrame:
    """Runs one micro-benchmark and writes micro_<kind>.csv."""
    if kind not in KINDS:
        raise ConfigurationError(f'unknown micro-benchmark {kind}', [kind])
    config = config or SimulationConfig()
    os.makedirs(outputDir, exist_ok=True)
    if kind == 'tau':
        frame = tauSweep(config, mix, nSlices, workers=workers or getDefaultWorkers())
    elif kind == 'buckets':
        frame = bucketSweep(seed=config.seed)
    else:
        frame = solverScaling(config, mix)
    path = os.path.join(outputDir, f'micro_{kind}.csv')
    frame.to_csv(path, index=False)
    logger.info(f'Wrote {len(frame)} rows to {path}')
    return frame
