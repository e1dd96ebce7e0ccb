import logging
import sys

import click

from pyslicemon.core.config import SimulationConfig
from pyslicemon.core.errors import ConfigurationError
from pyslicemon.experiments.frontier import cmdFrontier
from pyslicemon.experiments.micro import KINDS, cmdMicro
from pyslicemon.experiments.runner import cmdRun


@click.group()
def cli():
    pass


def checkPositive(ctx, param, value):
    if value is not None and value < 1:
        raise click.UsageError(f'{param.name} must be a positive integer, got {value}')
    return value


@cli.command(name='run')
@click.option('--spec', 'specPath', prompt='Specify an experiment spec', type=click.Path(exists=True, dir_okay=False),
              help='Experiment spec YAML')
@click.option('--output', 'outputDir', default=None, type=click.Path(file_okay=False),
              help='Output directory, overriding the spec')
@click.option('--workers', default=None, type=click.INT, callback=checkPositive,
              help='Parallel runs; defaults to PYSLICEMON_WORKERS or the CPU count')
@click.option('--seed', default=None, type=click.INT, help='Run a single replicate with this base seed')
def runExperiment(specPath, outputDir, workers, seed):
    try:
        failed = cmdRun(specPath, outputDir, workers, seed)
    except ConfigurationError as e:
        raise click.UsageError(str(e))
    if failed:
        click.echo(f'{failed} run(s) failed, see the manifest for details')
    return 1 if failed else 0


@cli.command(name='frontier')
@click.option('--results', 'resultsGlob', prompt='Specify results files', type=click.STRING,
              help='Glob (comma separated globs allowed) of results CSVs')
@click.option('--output', 'outputPath', default='results/frontier.csv', type=click.Path(dir_okay=False),
              help='Frontier CSV to write')
def frontier(resultsGlob, outputPath):
    frame = cmdFrontier(resultsGlob, outputPath)
    click.echo(f'{len(frame)} frontier points written to {outputPath}')
    return 0


@cli.command(name='micro')
@click.option('--kind', prompt='Select a micro-benchmark', type=click.Choice(list(KINDS)))
@click.option('--output', 'outputDir', default='results', type=click.Path(file_okay=False))
@click.option('--config', 'configPath', default=None, type=click.Path(exists=True, dir_okay=False),
              help='Simulation config YAML')
@click.option('--mix', default='BAL', type=click.Choice(['SP', 'BAL', 'LP'], case_sensitive=False))
@click.option('--slices', 'nSlices', default=300, type=click.INT, callback=checkPositive)
@click.option('--workers', default=None, type=click.INT, callback=checkPositive)
@click.option('--seed', default=None, type=click.INT)
def micro(kind, outputDir, configPath, mix, nSlices, workers, seed):
    try:
        config = SimulationConfig.from_yaml_file(configPath) if configPath else SimulationConfig()
        if seed is not None:
            config = config.replace(seed=seed)
    except ConfigurationError as e:
        raise click.UsageError(str(e))
    frame = cmdMicro(kind, outputDir, config, mix.upper(), nSlices, workers)
    click.echo(frame.to_string(index=False))
    return 0


def CliMain():
    logger = logging.getLogger('pyslicemon')
    logger.setLevel(logging.INFO)

    formatter = logging.Formatter(
        "[%(levelname)s]|[%(asctime)s]|[%(process)d::%(thread)d]|[%(name)s::%(module)s::%(funcName)s::%(lineno)d]|=> "
        "%(message)s"
    )

    fileHandler = logging.FileHandler('PySliceMon.log')
    fileHandler.setLevel(logging.INFO)
    fileHandler.setFormatter(formatter)

    consoleHandler = logging.StreamHandler()
    consoleHandler.setLevel(logging.INFO)
    consoleHandler.setFormatter(formatter)

    logger.addHandler(fileHandler)
    logger.addHandler(consoleHandler)

    try:
        return cli(standalone_mode=False)
    except click.UsageError as e:
        click.echo(f'Error: {str(e)}')
        click.echo(cli.get_help(click.Context(cli)))
        return 2


def main():
    sys.exit(CliMain() or 0)


if __name__ == '__main__':
    main()
