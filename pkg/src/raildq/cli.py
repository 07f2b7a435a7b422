#!/usr/bin/env python
# -*- coding: utf-8 -*-

'''The ``raildq`` command line.

Commands:
    generate: Draw instances from a generation profile.
    train: Train an agent from a config file.
    evaluate: Run a trained agent greedily and write its delays.
    profile: Turn a delay table into performance profiles.

'''

# IMPORT STANDARD LIBRARIES
import os
import logging
import argparse

# IMPORT LOCAL LIBRARIES
from . import __version__
from .base import simcore
from .helper import common
from .helper import export
from .learning import qmodel
from .experiment import harness
from .experiment import benchmark
from .experiment import traingen

_LOGGER = logging.getLogger(__name__)

DEFAULT_NETWORK = 'synthetic'
HANDLED_ERRORS = (
    ValueError,
    EnvironmentError,
    traingen.GenerationError,
    qmodel.NonFiniteLossError,
    simcore.ContractViolation,
)


def _name(path):
    '''str: A file's name without folder or extension.'''
    return os.path.splitext(os.path.basename(path))[0]


def _network(value):
    '''Get the network named on the command line, if any.'''
    if not value:
        return None
    return traingen.resolve_network(value)


def generate(args):
    '''Write ``--count`` instances drawn from a profile into ``--out``.'''
    profile = traingen.get_profile(args.profile)
    network = traingen.resolve_network(args.network)
    instances = traingen.generate_instances(
        profile, network, args.count, seed=args.seed, network_name=args.network)

    for index, instance in enumerate(instances):
        path = os.path.join(args.out, '{profile}_{index:04d}.json'.format(
            profile=profile.id, index=index))
        traingen.save_instance(instance, path)
        _LOGGER.debug('Wrote "%s" with %s trains.', path, len(instance.trains))

    _LOGGER.info('Wrote %s "%s" instances to "%s".', len(instances), profile.id, args.out)


def train(args):
    '''Train an agent and write its model.'''
    config = harness.TrainingConfig.load(args.config)
    names = args.instances or config.instances
    if not names:
        raise harness.ConfigError('No instances were given. Set "instances" in "{path}" or '
                                  'pass --instances.'.format(path=args.config))

    instances = [traingen.resolve_instance(name) for name in names]
    agent, records = harness.train(config, instances, network=_network(args.network),
                                   log_path=args.log)
    agent.save(args.out_model, episodes=len(records))

    counts = harness.window_counts(records, max(1, len(records)))
    if counts:
        _LOGGER.info('Trained %s episodes: %s best, %s normal, %s deadlock.', len(records),
                     counts[0][common.BEST], counts[0][common.NORMAL], counts[0][common.DEADLOCK])


def evaluate(args):
    '''Run a model greedily on instances and write a delay table.'''
    agent = harness.Agent.load(args.model)
    solver = args.solver_name or _name(args.model)
    instances = [traingen.resolve_instance(name) for name in args.instances]

    stats = harness.evaluate(agent, instances, network=_network(args.network))
    rows = [(_name(name), solver, delay) for name, delay in zip(args.instances, stats.delays)]
    export.write_delay_table(rows, args.out_csv)

    _LOGGER.info('Solver "%s": mean %s, min %s, max %s, std %s, %s deadlocks over %s instances.',
                 solver, stats.mean, stats.minimum, stats.maximum, stats.std, stats.deadlocks,
                 len(instances))


def profile(args):
    '''Write the performance profiles of a delay table.'''
    table = benchmark.delay_table(export.read_delay_table(args.in_csv))
    curves = benchmark.performance_profile(table)
    export.write_profile_csv(curves, args.out_csv)

    for solver, curve in curves.items():
        _LOGGER.info('Solver "%s": rho(1) = %s.', solver, benchmark.profile_value(curve, 1.0))


def make_parser():
    ''':class:`argparse.ArgumentParser`: The parser of every command.'''
    parser = argparse.ArgumentParser(prog='raildq', description='Single-track dispatch lab.')
    parser.add_argument('--version', action='version', version=__version__)
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='Log more. Once for INFO, twice for DEBUG. Without it, the '
                             '{env} environment variable sets the level.'
                             ''.format(env=common.LOG_LEVEL_ENV_VAR))

    commands = parser.add_subparsers(dest='command')
    commands.required = True

    command = commands.add_parser('generate', help='Draw instances from a profile.')
    command.add_argument('--profile', required=True,
                         help='"exp1", "exp2" or a JSON/YAML profile file.')
    command.add_argument('--count', type=int, default=10, help='How many instances to write.')
    command.add_argument('--seed', type=int, default=0, help='The random seed.')
    command.add_argument('--out', required=True, help='The folder to write instances into.')
    command.add_argument('--network', default=DEFAULT_NETWORK,
                         help='A fixture network name or a network file.')
    command.set_defaults(function=generate)

    command = commands.add_parser('train', help='Train an agent.')
    command.add_argument('--config', required=True, help='A JSON/YAML training config.')
    command.add_argument('--network', help='A fixture network name or a network file.')
    command.add_argument('--out-model', required=True, help='Where to write the model.')
    command.add_argument('--log', help='Where to write the CSV episode log.')
    command.add_argument('--instances', nargs='+',
                         help='Instance files or fixture names. Overrides the config.')
    command.set_defaults(function=train)

    command = commands.add_parser('evaluate', help='Evaluate a trained agent.')
    command.add_argument('--model', required=True, help='A model written by "train".')
    command.add_argument('--instances', nargs='+', required=True,
                         help='Instance files or fixture names.')
    command.add_argument('--out-csv', required=True, help='Where to write the delay table.')
    command.add_argument('--network', help='A fixture network name or a network file.')
    command.add_argument('--solver-name', help='The solver column. Defaults to the model name.')
    command.set_defaults(function=evaluate)

    command = commands.add_parser('profile', help='Build performance profiles.')
    command.add_argument('--in-csv', required=True, help='A problem,solver,delay table.')
    command.add_argument('--out-csv', required=True, help='Where to write solver,tau,rho rows.')
    command.set_defaults(function=profile)

    return parser


def get_log_level(verbose=0):
    '''int: The log level picked by ``-v`` or the environment.'''
    if verbose > 1:
        return logging.DEBUG

    if verbose == 1:
        return logging.INFO

    name = os.getenv(common.LOG_LEVEL_ENV_VAR, '').strip().upper()
    level = logging.getLevelName(name) if name else logging.WARNING
    if not isinstance(level, int):
        return logging.WARNING
    return level


def main(argv=None):
    '''Run one command.

    Args:
        argv (:obj:`list[str]`, optional): The arguments. Defaults to ``sys.argv[1:]``.

    Returns:
        int: 0 on success, 1 when the command failed with a handled error.

    '''
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=get_log_level(args.verbose),
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')

    try:
        args.function(args)
    except HANDLED_ERRORS as error:
        _LOGGER.error('%s failed: %s', args.command, error)
        return 1

    return 0
