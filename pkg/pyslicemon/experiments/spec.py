"""
Experiment specifications: a scenario, its workload and the (scheme,
parameter, seed) combinations to run.
"""
import copy
import itertools
import json
from typing import Dict, List, Optional

import yaml

from pyslicemon.core import SliceType, WorkloadMix
from pyslicemon.core.config import SimulationConfig
from pyslicemon.core.errors import ConfigurationError
from pyslicemon.estimator.distribution import deriveSeed

ADAPTIVE = 'adaptive'
STATIC_AGNOSTIC = 'static-agnostic'
STATIC_AWARE = 'static-aware'
PINT_LIKE = 'pint-like'
SKETCH_LIKE = 'sketch-like'

# Scheme-specific sweep keys; any SimulationConfig key may also be swept.
SCHEME_KEYS = {
    ADAPTIVE: (),
    STATIC_AGNOSTIC: ('Delta',),
    STATIC_AWARE: ('PerType',),
    PINT_LIKE: ('BudgetBits', 'Probability'),
    SKETCH_LIKE: ('Bins', 'ExportMs'),
}


class SchemeSpec:
    def __init__(self, name: str, sweep: Optional[Dict[str, list]] = None):
        self.name = name
        self.sweep = {k: list(v) if isinstance(v, (list, tuple)) else [v] for k, v in (sweep or {}).items()}

    def getCombinations(self) -> List[dict]:
        keys = sorted(self.sweep)
        return [dict(zip(keys, values)) for values in itertools.product(*(self.sweep[k] for k in keys))]

    def __repr__(self):
        return f'SchemeSpec(name={self.name}, sweep={self.sweep})'


class RunSpec:
    """One simulation: a scheme with concrete parameters and a seed."""

    def __init__(self, index: int, scheme: str, params: dict, replicate: int, seed: int):
        self.index = index
        self.scheme = scheme
        self.params = params
        self.replicate = replicate
        self.seed = seed

    def getRunId(self) -> str:
        return f'{self.index:04d}_{self.scheme}'

    def getParamsString(self) -> str:
        return json.dumps(self.params, sort_keys=True)

    def getConfigOverrides(self) -> dict:
        return {SimulationConfig.KEYS[k]: v for k, v in self.params.items() if k in SimulationConfig.KEYS}

    def getSchemeParams(self) -> dict:
        return {k: v for k, v in self.params.items() if k not in SimulationConfig.KEYS}

    def __repr__(self):
        return f'RunSpec(index={self.index}, scheme={self.scheme}, params={self.params}, seed={self.seed})'


class ExperimentSpec:
    """
    :param scenario: Scenario name, used for output file names.
    :param mix: Workload mix (SP, BAL or LP).
    :param nSlices: Slices generated per replicate, unless workloadFile is given.
    :param seeds: Base seeds; replicate i runs every scheme combination with seed hash(seeds[i], i).
    :param duration: Simulated seconds per run.
    :param outputDir: Directory for results, decisions and the manifest.
    :param simulation: Simulation parameters shared by all runs.
    :param schemes: Schemes with their parameter sweeps.
    """

    KEYS = ('Scenario', 'Mix', 'Slices', 'Workload', 'Seeds', 'Duration', 'Output', 'Simulation', 'Schemes')

    def __init__(self, scenario: str, mix: str, nSlices: int, seeds: List[int], duration: float, outputDir: str,
                 simulation: SimulationConfig, schemes: List[SchemeSpec], workloadFile: Optional[str] = None,
                 content: Optional[dict] = None):
        self.scenario = scenario
        self.mix = mix
        self.nSlices = nSlices
        self.seeds = list(seeds)
        self.duration = duration
        self.outputDir = outputDir
        self.simulation = simulation
        self.schemes = schemes
        self.workloadFile = workloadFile
        self.content = content or {}
        self.validate()

    def validate(self):
        bad = []
        if not self.scenario:
            bad.append('Scenario')
        if self.workloadFile is None:
            if str(self.mix).upper() not in WorkloadMix.__members__:
                bad.append('Mix')
            if not isinstance(self.nSlices, int) or self.nSlices < 3:
                bad.append('Slices')
        if not self.seeds or any(not isinstance(s, int) for s in self.seeds):
            bad.append('Seeds')
        if not self.duration or self.duration <= 0:
            bad.append('Duration')
        if not self.schemes:
            bad.append('Schemes')
        for scheme in self.schemes:
            if scheme.name not in SCHEME_KEYS:
                bad.append(f'Schemes.{scheme.name}')
                continue
            for key in scheme.sweep:
                if key not in SCHEME_KEYS[scheme.name] and key not in SimulationConfig.KEYS:
                    bad.append(f'Schemes.{scheme.name}.{key}')
            if scheme.name == STATIC_AGNOSTIC and 'Delta' not in scheme.sweep:
                bad.append(f'Schemes.{scheme.name}.Delta')
            if scheme.name == STATIC_AWARE:
                perTypes = scheme.sweep.get('PerType')
                if not perTypes or any(not isinstance(p, dict) or sorted(p) != sorted(SliceType.__members__)
                                       for p in perTypes):
                    bad.append(f'Schemes.{scheme.name}.PerType')
            if scheme.name == SKETCH_LIKE and any(b < 2 for b in scheme.sweep.get('Bins', [])):
                bad.append(f'Schemes.{scheme.name}.Bins')
        if bad:
            raise ConfigurationError('invalid experiment spec', bad)

    def getRuns(self) -> List[RunSpec]:
        """All runs in a stable order; replicates share a seed so schemes see identical traffic."""
        runs = []
        for replicate, base in enumerate(self.seeds):
            seed = deriveSeed(base, replicate)
            for scheme in self.schemes:
                for params in scheme.getCombinations():
                    runs.append(RunSpec(len(runs), scheme.name, params, replicate, seed))
        return runs

    def getSimulationConfig(self, run: RunSpec) -> SimulationConfig:
        return self.simulation.replace(seed=run.seed, duration=float(self.duration), **run.getConfigOverrides())

    def withSeeds(self, seeds: List[int]) -> 'ExperimentSpec':
        clone = copy.deepcopy(self)
        clone.seeds = list(seeds)
        clone.content['Seeds'] = list(seeds)
        clone.validate()
        return clone

    def toDict(self) -> dict:
        return copy.deepcopy(self.content)

    @classmethod
    def fromDict(cls, content: dict) -> 'ExperimentSpec':
        if not isinstance(content, dict):
            raise ConfigurationError('experiment spec must be a mapping', ['<root>'])
        unknown = [k for k in content if k not in cls.KEYS]
        if unknown:
            raise ConfigurationError('unknown experiment keys', unknown)
        missing = [k for k in ('Scenario', 'Seeds', 'Duration', 'Schemes') if k not in content]
        if missing:
            raise ConfigurationError('missing experiment keys', missing)
        schemes = []
        for item in content.get('Schemes') or []:
            if isinstance(item, str):
                schemes.append(SchemeSpec(item))
            else:
                schemes.append(SchemeSpec(item.get('Name'), item.get('Sweep')))
        seeds = content['Seeds']
        return cls(scenario=content['Scenario'],
                   mix=content.get('Mix', 'BAL'),
                   nSlices=content.get('Slices', 300),
                   seeds=seeds if isinstance(seeds, list) else [seeds],
                   duration=content['Duration'],
                   outputDir=content.get('Output', 'results'),
                   simulation=SimulationConfig.fromDict(content.get('Simulation')),
                   schemes=schemes,
                   workloadFile=content.get('Workload'),
                   content=copy.deepcopy(content))

    @classmethod
    def from_yaml_file(cls, file_path: str) -> 'ExperimentSpec':
        with open(file_path, 'r') as f:
            content = yaml.safe_load(f)
        return cls.fromDict(content)

    def __repr__(self):
        return (f'ExperimentSpec(scenario={self.scenario}, mix={self.mix}, nSlices={self.nSlices}, '
                f'seeds={self.seeds}, duration={self.duration}, schemes={self.schemes})')
