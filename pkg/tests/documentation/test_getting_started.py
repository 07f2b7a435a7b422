#!/usr/bin/env python
# -*- coding: utf-8 -*-

'''Test for the "getting_started.rst" documentation page.'''

# IMPORT STANDARD LIBRARIES
import textwrap

# IMPORT RAILDQ LIBRARIES
import raildq.api

# IMPORT LOCAL LIBRARIES
from .. import common_test


class GettingStartedTestCase(common_test.TempTestCase):

    '''Test the code listed in the getting_started.rst documentation file.'''

    def test_step_episode(self):
        '''Play an episode by hand until it ends.'''
        network = raildq.api.fixture_network('desk-line')
        instance = raildq.api.fixture('reduced')
        sim = raildq.api.SimState(network, instance)

        while True:
            decision = raildq.api.next_decision(sim)
            if decision.kind == 'terminal':
                break

            if decision.kind == 'decision':
                action = 1 if decision.mask[1] else 0
                raildq.api.apply_action(sim, decision.train, action)

        self.assertIn(decision.outcome.terminal_class,
                      ('all_arrived', 'deadlock', 'horizon_exceeded'))

        if decision.outcome.terminal_class == 'deadlock':
            self.assertIsNone(decision.outcome.weighted_delay)
        else:
            self.assertIsNotNone(decision.outcome.weighted_delay)

    def test_masked_action(self):
        '''Refuse an action the mask does not allow.'''
        sim = raildq.api.SimState(raildq.api.fixture_network('figure'),
                                  raildq.api.fixture('figure'))

        with self.assertRaises(raildq.api.ContractViolation):
            raildq.api.apply_action(sim, 'red', 4)

    def test_encodings(self):
        '''Encode the local and "S0" states of the figure fixture.'''
        sim = raildq.api.SimState(raildq.api.fixture_network('figure'),
                                  raildq.api.fixture('figure'))
        config = raildq.api.EncoderConfig(lf=3, lb=2, n_r=3)

        vector = raildq.api.encode_local(sim, 'red', config)
        self.assertEqual(54, len(vector))

        self.assertEqual([5, 9, 0, 0, 0, 0, 0, 0, 10, 0, 0],
                         raildq.api.encode_global(sim, 'blue', 'S0').tolist())

    def test_train_and_evaluate(self):
        '''Train a small agent, count its windows and evaluate it.'''
        config = raildq.api.TrainingConfig(episodes=6, window=3, seed=1, log_wall_time=False)
        instances = [raildq.api.fixture('second-instance')]

        agent, records = raildq.api.train(config, instances)
        counts = raildq.api.window_counts(records, config.window)

        self.assertEqual(2, len(counts))
        self.assertEqual(['window', 'best', 'normal', 'deadlock'], list(counts[-1]))
        self.assertEqual(3, sum(counts[-1][name] for name in ('best', 'normal', 'deadlock')))

        stats = raildq.api.evaluate(agent, instances)
        self.assertIn(stats.deadlocks, (0, 1))

    def test_unknown_field(self):
        '''Reject configs with fields that do not exist.'''
        with self.assertRaises(raildq.api.ConfigError):
            raildq.api.TrainingConfig(epochs=3)

    def test_yaml_config(self):
        '''Load the settings shown on the page from YAML.'''
        path = self.write_text(textwrap.dedent(
            '''\
            agent: centralized_deep
            state_variant: S5
            reward_scheme: terminal_class
            memory_mode: tripartite
            memory_rule: 14
            episodes: 10000
            '''), 'config.yml')

        config = raildq.api.TrainingConfig.load(path)

        self.assertEqual('centralized_deep', config.agent)
        self.assertEqual(14, config.memory_rule)

    def test_profiles(self):
        '''Compare two solvers that each win one problem.'''
        curves = raildq.api.performance_profile({
            'deep': {'p1': 10.0, 'p2': 20.0},
            'linear': {'p1': 20.0, 'p2': 10.0},
        })

        self.assertEqual([(1.0, 0.5), (2.0, 1.0)], curves['deep'])
