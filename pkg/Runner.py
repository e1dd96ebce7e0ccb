import logging
import sys
import traceback

import yaml

import log_setup  # noqa
from pyslicemon.experiments.frontier import cmdFrontier
from pyslicemon.experiments.micro import cmdMicro
from pyslicemon.experiments.runner import cmdRun
from pyslicemon.core.config import SimulationConfig

logger = logging.getLogger(__file__)


def main(planPath='experiments.yaml'):
    with open(planPath, 'r') as file:
        config = yaml.safe_load(file)

    workers = config.get('Workers')
    failed = 0

    for name, details in (config.get('Experiments') or {}).items():
        try:
            logger.info(f'Starting experiment <{name}> from {details["Spec"]}')
            failed += cmdRun(details['Spec'], details.get('Output'), workers, details.get('Seed'))
        except Exception as e:
            failed += 1
            logger.error(f'Error in running experiment <{name}>. Error: {e}')
            logger.exception(traceback.format_exc())

    for kind, details in (config.get('Micro') or {}).items():
        details = details or {}
        try:
            simulation = SimulationConfig.from_yaml_file(details['Config']) if 'Config' in details \
                else SimulationConfig()
            cmdMicro(kind, details.get('Output', 'results'), simulation, details.get('Mix', 'BAL'),
                     details.get('Slices', 300), workers)
        except Exception as e:
            failed += 1
            logger.error(f'Error in running micro-benchmark <{kind}>. Error: {e}')
            logger.exception(traceback.format_exc())

    if 'Frontier' in config:
        cmdFrontier(config['Frontier']['Results'], config['Frontier']['Output'])

    logger.info(f'Done, {failed} failure(s)')
    return failed


if __name__ == "__main__":
    sys.exit(1 if main(*sys.argv[1:2]) else 0)
