"""
Simulation configuration, loadable from YAML with CamelCase keys.
"""
import copy
from typing import Dict, Optional

import yaml

from pyslicemon.core import SliceType
from pyslicemon.core.constants import DEFAULT_TOLERANCE_FRACTION, DEFAULT_WRR_WEIGHTS
from pyslicemon.core.errors import ConfigurationError


class VarianceShift:
    """Turns one slice's traffic into ON/OFF bursts from a given time on."""

    def __init__(self, sliceId: int, atSeconds: float, onMs: float = 2.0, offMs: float = 2.0):
        self.sliceId = int(sliceId)
        self.atSeconds = float(atSeconds)
        self.onMs = float(onMs)
        self.offMs = float(offMs)

    def __repr__(self):
        return f'VarianceShift(sliceId={self.sliceId}, atSeconds={self.atSeconds}, onMs={self.onMs}, offMs={self.offMs})'


class AntiCorrelation:
    """Alternating per-packet processing offsets of opposite sign on two consecutive hops of a slice."""

    def __init__(self, sliceId: Optional[int] = None, firstHop: int = 0, offsetUs: float = 50.0):
        self.sliceId = sliceId
        self.firstHop = int(firstHop)
        self.offsetUs = float(offsetUs)

    def appliesTo(self, sliceId: int) -> bool:
        return self.sliceId is None or self.sliceId == sliceId

    def __repr__(self):
        return f'AntiCorrelation(sliceId={self.sliceId}, firstHop={self.firstHop}, offsetUs={self.offsetUs})'


class SimulationConfig:
    # CamelCase YAML key -> attribute name
    KEYS = {
        'ScaleFactor': 'scaleFactor',
        'Duration': 'duration',
        'Epoch': 'epoch',
        'ToleranceFraction': 'toleranceFraction',
        'BucketArrays': 'bucketArrays',
        'BucketWidth': 'bucketWidth',
        'HashSeed': 'hashSeed',
        'HeadroomBytes': 'headroomBytes',
        'BufferBytes': 'bufferBytes',
        'ProcessingDelayNs': 'processingDelayNs',
        'TierCapacitiesGbps': 'tierCapacitiesGbps',
        'PropagationDelayNs': 'propagationNs',
        'Access': 'nAccess',
        'Aggregation': 'nAggregation',
        'Core': 'nCore',
        'ReservoirSize': 'reservoirSize',
        'BetaSteps': 'betaSteps',
        'CandidateCount': 'candidateCount',
        'StepFraction': 'stepFraction',
        'BitWidth': 'bitWidth',
        'Lambda': 'lambda_',
        'Budget': 'budget',
        'SolveBudgetFraction': 'solveBudgetFraction',
        'MaxNodes': 'maxNodes',
        'ShimPerHop': 'shimPerHop',
        'ObjectiveScaling': 'objectiveScaling',
        'PathsPerSlice': 'pathsPerSlice',
        'TraceSampling': 'traceSampling',
        'ExportMs': 'exportMs',
        'BuildWorkers': 'buildWorkers',
        'TargetUtilization': 'targetUtilization',
        'BurstOnMs': 'burstOnMs',
        'BurstOffMs': 'burstOffMs',
        'Seed': 'seed',
    }

    def __init__(self, scaleFactor: float = 100.0, duration: float = 20.0, epoch: float = 5.0,
                 toleranceFraction: float = DEFAULT_TOLERANCE_FRACTION, bucketArrays: int = 2,
                 bucketWidth: int = 4096, hashSeed: int = 0x5eed, headroomBytes: int = 64,
                 bufferBytes: float = 22e6, processingDelayNs: float = 1000.0,
                 tierCapacitiesGbps=(25.0, 40.0, 100.0), propagationNs: int = 5000,
                 nAccess: int = 8, nAggregation: int = 4, nCore: int = 2,
                 reservoirSize: int = 1024, betaSteps: int = 10000, candidateCount: int = 16,
                 stepFraction: float = 0.05, bitWidth: int = 8, lambda_: float = 0.5,
                 budget: Optional[float] = None, solveBudgetFraction: float = 0.5,
                 maxNodes: Optional[int] = None, shimPerHop: bool = True,
                 objectiveScaling: str = 'normalized', pathsPerSlice: int = 1,
                 traceSampling: float = 0.0, exportMs: float = 500.0, buildWorkers: int = 1,
                 targetUtilization: Optional[float] = None, burstOnMs: Optional[float] = None,
                 burstOffMs: Optional[float] = None, seed: int = 1,
                 wrrWeights: Optional[Dict[SliceType, int]] = None,
                 varianceShift: Optional[VarianceShift] = None,
                 antiCorrelation: Optional[AntiCorrelation] = None):
        self.scaleFactor = float(scaleFactor)
        self.duration = float(duration)
        self.epoch = float(epoch)
        self.toleranceFraction = float(toleranceFraction)
        self.bucketArrays = int(bucketArrays)
        self.bucketWidth = int(bucketWidth)
        self.hashSeed = int(hashSeed)
        self.headroomBytes = int(headroomBytes)
        self.bufferBytes = float(bufferBytes)
        self.processingDelayNs = float(processingDelayNs)
        self.tierCapacitiesGbps = tuple(float(c) for c in tierCapacitiesGbps)
        self.propagationNs = int(propagationNs)
        self.nAccess = int(nAccess)
        self.nAggregation = int(nAggregation)
        self.nCore = int(nCore)
        self.reservoirSize = int(reservoirSize)
        self.betaSteps = int(betaSteps)
        self.candidateCount = int(candidateCount)
        self.stepFraction = float(stepFraction)
        self.bitWidth = int(bitWidth)
        self.lambda_ = float(lambda_)
        self.budget = None if budget is None else float(budget)
        self.solveBudgetFraction = float(solveBudgetFraction)
        self.maxNodes = None if maxNodes is None else int(maxNodes)
        self.shimPerHop = bool(shimPerHop)
        self.objectiveScaling = str(objectiveScaling)
        self.pathsPerSlice = int(pathsPerSlice)
        self.traceSampling = float(traceSampling)
        self.exportMs = float(exportMs)
        self.buildWorkers = int(buildWorkers)
        self.targetUtilization = None if targetUtilization is None else float(targetUtilization)
        self.burstOnMs = None if burstOnMs is None else float(burstOnMs)
        self.burstOffMs = None if burstOffMs is None else float(burstOffMs)
        self.seed = int(seed)
        self.wrrWeights = dict(wrrWeights) if wrrWeights else dict(DEFAULT_WRR_WEIGHTS)
        self.varianceShift = varianceShift
        self.antiCorrelation = antiCorrelation
        self.validate()

    def validate(self):
        bad = []
        if self.scaleFactor <= 0:
            bad.append('ScaleFactor')
        if self.duration <= 0:
            bad.append('Duration')
        if self.epoch <= 0:
            bad.append('Epoch')
        if not 0 < self.toleranceFraction <= 1:
            bad.append('ToleranceFraction')
        if self.bucketArrays < 1 or self.bucketWidth < 1:
            bad.append('BucketArrays/BucketWidth')
        if not 0.0 <= self.lambda_ <= 1.0:
            bad.append('Lambda')
        if self.objectiveScaling not in ('normalized', 'raw'):
            bad.append('ObjectiveScaling')
        if self.pathsPerSlice not in (1, 2):
            bad.append('PathsPerSlice')
        if not 0.0 <= self.traceSampling <= 1.0:
            bad.append('TraceSampling')
        if self.candidateCount < 1 or self.candidateCount > (1 << self.bitWidth):
            bad.append('CandidateCount')
        if self.targetUtilization is not None and not 0.0 < self.targetUtilization < 1.0:
            bad.append('TargetUtilization')
        if (self.burstOnMs is None) != (self.burstOffMs is None) or any(
                v is not None and v <= 0 for v in (self.burstOnMs, self.burstOffMs)):
            bad.append('BurstOnMs/BurstOffMs')
        if bad:
            raise ConfigurationError('invalid simulation config', bad)

    def getEpochNs(self) -> int:
        return int(round(self.epoch * 1e9))

    def getDurationNs(self) -> int:
        return int(round(self.duration * 1e9))

    def replace(self, **overrides) -> 'SimulationConfig':
        clone = copy.deepcopy(self)
        for key, value in overrides.items():
            if not hasattr(clone, key):
                raise ConfigurationError(f'unknown simulation field {key}', [key])
            setattr(clone, key, value)
        clone.validate()
        return clone

    @classmethod
    def fromDict(cls, content: Optional[dict]) -> 'SimulationConfig':
        content = dict(content or {})
        unknown = [k for k in content if k not in cls.KEYS and k not in ('WrrWeights', 'VarianceShift', 'AntiCorrelation')]
        if unknown:
            raise ConfigurationError('unknown simulation keys', unknown)
        kwargs = {cls.KEYS[k]: v for k, v in content.items() if k in cls.KEYS}
        if 'WrrWeights' in content:
            kwargs['wrrWeights'] = {SliceType.fromString(k): int(v) for k, v in content['WrrWeights'].items()}
        if content.get('VarianceShift'):
            v = content['VarianceShift']
            kwargs['varianceShift'] = VarianceShift(v['SliceId'], v['AtSeconds'], v.get('OnMs', 2.0), v.get('OffMs', 2.0))
        if content.get('AntiCorrelation'):
            a = content['AntiCorrelation']
            kwargs['antiCorrelation'] = AntiCorrelation(a.get('SliceId'), a.get('FirstHop', 0), a.get('OffsetUs', 50.0))
        return cls(**kwargs)

    @classmethod
    def from_yaml_file(cls, file_path: str) -> 'SimulationConfig':
        with open(file_path, 'r') as f:
            content = yaml.safe_load(f)
        return cls.fromDict(content.get('Simulation', content) if content else {})

    def toDict(self) -> dict:
        out = {k: getattr(self, v) for k, v in self.KEYS.items()}
        out['TierCapacitiesGbps'] = list(self.tierCapacitiesGbps)
        out['WrrWeights'] = {str(k): v for k, v in sorted(self.wrrWeights.items())}
        if self.varianceShift:
            v = self.varianceShift
            out['VarianceShift'] = {'SliceId': v.sliceId, 'AtSeconds': v.atSeconds, 'OnMs': v.onMs, 'OffMs': v.offMs}
        if self.antiCorrelation:
            a = self.antiCorrelation
            out['AntiCorrelation'] = {'SliceId': a.sliceId, 'FirstHop': a.firstHop, 'OffsetUs': a.offsetUs}
        return out

    def __repr__(self):
        fields = ', '.join(f'{v}={getattr(self, v)!r}' for v in self.KEYS.values())
        return f'SimulationConfig({fields}, wrrWeights={self.wrrWeights}, varianceShift={self.varianceShift}, antiCorrelation={self.antiCorrelation})'
