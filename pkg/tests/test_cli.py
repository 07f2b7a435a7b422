#!/usr/bin/env python
# -*- coding: utf-8 -*-

'''Test the ``raildq`` command line.'''

# IMPORT STANDARD LIBRARIES
import os
import io
import logging

# IMPORT THIRD-PARTY LIBRARIES
from six.moves import mock

# IMPORT RAILDQ LIBRARIES
from raildq import cli
from raildq.base import instance
from raildq.helper import common
from raildq.helper import export

# IMPORT LOCAL LIBRARIES
from . import common_test


def _lines(path):
    '''list[str]: The lines of a text file.'''
    with io.open(path, 'r', encoding='utf-8') as file_:
        return file_.read().splitlines()


class CommandTestCase(common_test.TempTestCase):

    '''Run every command end to end.'''

    def test_generate(self):
        '''Write numbered instance files that run on the default network.'''
        folder = self.make_folder()
        self.assertEqual(0, cli.main(['generate', '--profile', 'exp1', '--count', '2',
                                      '--seed', '4', '--out', folder]))

        names = sorted(os.listdir(folder))
        self.assertEqual(['exp1_0000.json', 'exp1_0001.json'], names)

        drawn = instance.load_instance(os.path.join(folder, names[0]))
        self.assertEqual(cli.DEFAULT_NETWORK, drawn.network)

    def test_generate_unknown_profile(self):
        '''Fail with exit code 1 on an unknown profile.'''
        self.assertEqual(1, cli.main(['generate', '--profile', 'exp7', '--out',
                                      self.make_folder()]))

    def test_train_evaluate_profile(self):
        '''Train a model, evaluate it and compare it with another solver.'''
        config = self.write_json({'episodes': 3, 'window': 3, 'log_wall_time': False},
                                 'config.json')
        model = self.make_path('deep.model')
        log = self.make_path('log.csv')
        delays = self.make_path('delays.csv')
        profiles = self.make_path('profile.csv')

        self.assertEqual(0, cli.main(['train', '--config', config, '--out-model', model,
                                      '--log', log, '--instances', 'second-instance']))
        self.assertTrue(os.path.isfile(model))
        self.assertEqual(4, len(_lines(log)))

        self.assertEqual(0, cli.main(['evaluate', '--model', model, '--out-csv', delays,
                                      '--instances', 'second-instance', 'reduced']))
        rows = export.read_delay_table(delays)
        self.assertEqual(['second-instance', 'reduced'], [row[0] for row in rows])
        self.assertEqual({'deep'}, set(row[1] for row in rows))

        rows.extend((problem, 'other', 100.0) for problem, _, _ in list(rows))
        export.write_delay_table(rows, delays)

        self.assertEqual(0, cli.main(['profile', '--in-csv', delays, '--out-csv', profiles]))
        lines = _lines(profiles)
        self.assertEqual('solver,tau,rho', lines[0])
        self.assertTrue(any(line.startswith('other,') for line in lines[1:]))

    def test_train_instances_from_config(self):
        '''Use the config's instances when none are passed.'''
        config = self.write_json({'episodes': 1, 'instances': ['reduced']}, 'config.json')
        model = self.make_path('model.txt')

        self.assertEqual(0, cli.main(['train', '--config', config, '--out-model', model]))
        self.assertTrue(os.path.isfile(model))

    def test_train_without_instances(self):
        '''Fail when neither the config nor the command names instances.'''
        config = self.write_json({'episodes': 1}, 'config.json')
        self.assertEqual(1, cli.main(['train', '--config', config,
                                      '--out-model', self.make_path('model.txt')]))

    def test_train_bad_config(self):
        '''Fail on configs with unknown fields.'''
        config = self.write_json({'episodes': 1, 'epochs': 4}, 'config.json')
        self.assertEqual(1, cli.main(['train', '--config', config, '--instances', 'reduced',
                                      '--out-model', self.make_path('model.txt')]))

    def test_evaluate_missing_model(self):
        '''Fail when the model file does not exist.'''
        self.assertEqual(1, cli.main(['evaluate', '--model', self.make_path('missing.model'),
                                      '--instances', 'reduced',
                                      '--out-csv', self.make_path('delays.csv')]))


class ParserTestCase(common_test.TempTestCase):

    '''Test argument parsing and log levels.'''

    def test_command_required(self):
        '''Exit with a usage error when no command is given.'''
        with mock.patch('sys.stderr', new_callable=io.StringIO):
            with self.assertRaises(SystemExit):
                cli.make_parser().parse_args([])

    def test_verbose(self):
        '''Raise the log level with each -v.'''
        self.assertEqual(logging.INFO, cli.get_log_level(1))
        self.assertEqual(logging.DEBUG, cli.get_log_level(3))

    def test_environment(self):
        '''Read the log level from the environment without -v.'''
        os.environ[common.LOG_LEVEL_ENV_VAR] = 'error'
        self.assertEqual(logging.ERROR, cli.get_log_level(0))

        os.environ[common.LOG_LEVEL_ENV_VAR] = 'chatty'
        self.assertEqual(logging.WARNING, cli.get_log_level(0))

        del os.environ[common.LOG_LEVEL_ENV_VAR]
        self.assertEqual(logging.WARNING, cli.get_log_level(0))
