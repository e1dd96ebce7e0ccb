"""
Runs every (scheme, parameter, seed) combination of an experiment and writes
the results CSV, per-run decision CSVs and a manifest.
"""
import hashlib
import logging
import multiprocessing
import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional

import numpy as np
import pandas as pd
import yaml

import pyslicemon
from pyslicemon.baselines.pint import PintLikeScheme
from pyslicemon.baselines.sketch import SketchLikeScheme
from pyslicemon.baselines.static import StaticController, StaticPolicy
from pyslicemon.controlplane.controller import EpochController
from pyslicemon.core import SliceType
from pyslicemon.core.config import SimulationConfig
from pyslicemon.core.errors import ConfigurationError
from pyslicemon.core.slices import CandidateGrid, SliceSpec
from pyslicemon.core.topology import Topology, buildTopology
from pyslicemon.core.workload import loadWorkload, makeWorkload
from pyslicemon.experiments.spec import (ADAPTIVE, PINT_LIKE, SKETCH_LIKE, STATIC_AGNOSTIC, STATIC_AWARE,
                                         ExperimentSpec, RunSpec)
from pyslicemon.netsim.scheme import ChangeTriggeredScheme, MonitoringScheme
from pyslicemon.netsim.simulator import ResultSet, run

logger = logging.getLogger(__name__)

RESULT_COLUMNS = ['run', 'scenario', 'scheme', 'params', 'replicate', 'seed', 'status', 'error', 'slices',
                  'packets_generated', 'packets_delivered', 'packets_dropped', 'packets_in_flight',
                  'bits_per_packet', 'bandwidth_overhead', 'violation_fraction', 'violation_latency',
                  'violation_jitter', 'violation_loss', 'violation_urllc', 'violation_embb', 'violation_mmtc',
                  'violation_urllc_latency', 'p90_error', 'miss_rate', 'reports_per_sec', 'notifications',
                  'header_overflows', 'saturated', 'shim_per_hop', 'capacity_factor']
# Wall-clock columns of the decision log, kept out of the deterministic CSVs.
TIMING_COLUMNS = ['solve_ms', 'build_ms']


def getDefaultWorkers() -> int:
    return int(os.environ.get('PYSLICEMON_WORKERS', multiprocessing.cpu_count()))


def buildTopologyFor(config: SimulationConfig) -> Topology:
    return buildTopology(config.nAccess, config.nAggregation, config.nCore, config.tierCapacitiesGbps,
                         config.scaleFactor, config.propagationNs)


def buildScheme(name: str, params: dict, slices: List[SliceSpec], config: SimulationConfig) -> MonitoringScheme:
    if name == ADAPTIVE:
        grid = CandidateGrid.forSlices(slices, config.candidateCount, config.stepFraction, config.bitWidth)
        return ChangeTriggeredScheme(EpochController(slices, grid, config), name=ADAPTIVE)
    if name == STATIC_AGNOSTIC:
        policy = StaticPolicy(delta=float(params['Delta']))
        return ChangeTriggeredScheme(StaticController(policy, slices), name=policy.getName())
    if name == STATIC_AWARE:
        perType = {SliceType.fromString(k): float(v) for k, v in params['PerType'].items()}
        policy = StaticPolicy(perType=perType)
        return ChangeTriggeredScheme(StaticController(policy, slices), name=policy.getName())
    if name == PINT_LIKE:
        return PintLikeScheme(params.get('BudgetBits'), params.get('Probability'))
    if name == SKETCH_LIKE:
        return SketchLikeScheme(int(params.get('Bins', 10)), params.get('ExportMs'))
    raise ConfigurationError(f'unknown scheme {name}', [name])


def runAdaptive(slices: List[SliceSpec], config: SimulationConfig, topology: Optional[Topology] = None) -> ResultSet:
    """The closed-loop system: change-triggered telemetry tuned every epoch."""
    return run(slices, config, buildScheme(ADAPTIVE, {}, slices, config), topology)


def makeSlices(spec: ExperimentSpec, config: SimulationConfig, topology: Topology) -> List[SliceSpec]:
    if spec.workloadFile:
        return loadWorkload(spec.workloadFile)
    return makeWorkload(spec.mix, spec.nSlices, config.seed, topology, config.pathsPerSlice,
                        config.toleranceFraction)


def writeDecisions(decisions: pd.DataFrame, outputDir: str, runId: str):
    """Writes decisions_<run>.csv and, when the log carries wall times, timings_<run>.csv with one row per epoch."""
    timings = [c for c in TIMING_COLUMNS if c in decisions.columns]
    decisions.drop(columns=timings).to_csv(os.path.join(outputDir, f'decisions_{runId}.csv'), index=False)
    if timings and 'epoch' in decisions.columns:
        perEpoch = decisions[['epoch'] + timings].drop_duplicates(subset='epoch')
        perEpoch.to_csv(os.path.join(outputDir, f'timings_{runId}.csv'), index=False)


def runOne(spec: ExperimentSpec, runSpec: RunSpec, outputDir: str) -> dict:
    """Executes one run; failures come back as an error row."""
    row = dict.fromkeys(RESULT_COLUMNS, np.nan)
    row.update({'run': runSpec.getRunId(), 'scenario': spec.scenario, 'scheme': runSpec.scheme,
                'params': runSpec.getParamsString(), 'replicate': runSpec.replicate, 'seed': runSpec.seed})
    try:
        config = spec.getSimulationConfig(runSpec)
        topology = buildTopologyFor(config)
        slices = makeSlices(spec, config, topology)
        scheme = buildScheme(runSpec.scheme, runSpec.getSchemeParams(), slices, config)
        result = run(slices, config, scheme, topology)
    except Exception as e:
        logger.exception(f'Run {runSpec.getRunId()} failed: {e}')
        row.update({'status': 'error', 'error': f'{type(e).__name__}: {e}'})
        return row

    summary = result.getSummary()
    row.update({k: v for k, v in summary.items() if k in RESULT_COLUMNS and k not in ('scheme', 'seed')})
    row.update({'status': 'ok', 'error': ''})
    writeDecisions(result.getDecisions(), outputDir, runSpec.getRunId())
    result.getSliceMetrics().to_csv(os.path.join(outputDir, f'slices_{runSpec.getRunId()}.csv'), index=False)
    if len(result.getTrace()):
        result.getTrace().to_csv(os.path.join(outputDir, f'trace_{runSpec.getRunId()}.csv'), index=False)
    return row


def configHash(spec: ExperimentSpec) -> str:
    canonical = yaml.safe_dump(spec.toDict(), sort_keys=True)
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def writeManifest(spec: ExperimentSpec, runs: List[RunSpec], rows: List[dict], outputDir: str) -> str:
    status = {row['run']: row for row in rows}
    manifest = {
        'Scenario': spec.scenario,
        'Version': pyslicemon.__version__,
        'ConfigHash': configHash(spec),
        'Spec': spec.toDict(),
        'Results': f'results_{spec.scenario}.csv',
        'Runs': [{
            'Run': r.getRunId(),
            'Scheme': r.scheme,
            'Params': r.params,
            'Replicate': r.replicate,
            'Seed': r.seed,
            'Status': status[r.getRunId()]['status'],
            'Error': status[r.getRunId()]['error'] or None,
        } for r in runs],
    }
    path = os.path.join(outputDir, f'manifest_{spec.scenario}.yaml')
    with open(path, 'w') as f:
        yaml.safe_dump(manifest, f, sort_keys=False)
    return path


def cmdRun(specPath: str, outputDir: Optional[str] = None, workers: Optional[int] = None,
           seed: Optional[int] = None) -> int:
    """Runs an experiment spec; returns the number of failed runs."""
    spec = ExperimentSpec.from_yaml_file(specPath)
    if seed is not None:
        spec = spec.withSeeds([seed])
    outputDir = outputDir or spec.outputDir
    os.makedirs(outputDir, exist_ok=True)
    workers = workers or getDefaultWorkers()
    runs = spec.getRuns()
    logger.info(f'Running {len(runs)} runs of {spec.scenario} with {workers} workers into {outputDir}')

    if workers > 1 and len(runs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(runOne, spec, r, outputDir) for r in runs]
            rows = [future.result() for future in futures]
    else:
        rows = [runOne(spec, r, outputDir) for r in runs]

    results = pd.DataFrame(rows, columns=RESULT_COLUMNS)
    results.to_csv(os.path.join(outputDir, f'results_{spec.scenario}.csv'), index=False)
    manifest = writeManifest(spec, runs, rows, outputDir)
    failed = int((results['status'] != 'ok').sum())
    logger.info(f'{len(runs) - failed}/{len(runs)} runs succeeded, manifest at {manifest}')
    return failed
