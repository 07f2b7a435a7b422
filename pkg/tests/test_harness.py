#!/usr/bin/env python
# -*- coding: utf-8 -*-

'''Test episodes, training runs and evaluation.'''

# IMPORT STANDARD LIBRARIES
import io
import unittest

# IMPORT THIRD-PARTY LIBRARIES
from six.moves import mock
import numpy

# IMPORT RAILDQ LIBRARIES
from raildq.base import simcore
from raildq.helper import common
from raildq.learning import replay
from raildq.learning import qmodel
from raildq.learning import encoding
from raildq.experiment import harness
from raildq.experiment import traingen

# IMPORT LOCAL LIBRARIES
from . import common_test


def _outcome(weighted_delay, terminal_class=common.ALL_ARRIVED):
    ''':class:`raildq.base.simcore.EpisodeOutcome`: A finished episode.'''
    return simcore.EpisodeOutcome(terminal_class, weighted_delay, {}, frozenset(), (), 0.0)


def _quick(**kwargs):
    ''':class:`raildq.experiment.harness.TrainingConfig`: A short, reproducible run.'''
    settings = dict(episodes=5, window=5, log_wall_time=False, seed=3)
    settings.update(kwargs)
    return harness.TrainingConfig(**settings)


def _agent(config, *names):
    ''':class:`raildq.experiment.harness.Agent`: A fresh agent for some fixtures.'''
    instances = [traingen.fixture(name) for name in names]
    return harness.build_agent(config, traingen.network_for(instances[0]), instances)


def _never_hold(_, mask):
    '''int: The first allowed go action, holding only when nothing else is allowed.'''
    for action in range(simcore.GO_BEST, common.ACTION_COUNT):
        if mask[action]:
            return action
    return simcore.HOLD


class ConfigTestCase(common_test.TempTestCase):

    '''Test the training settings.'''

    def test_defaults(self):
        '''Start from the decentralized agent, local states and rule 12.'''
        config = harness.TrainingConfig()

        self.assertEqual(harness.DECENTRALIZED_AGENT, config.agent)
        self.assertEqual(encoding.LOCAL, config.state_variant)
        self.assertEqual(12, config.memory_rule)
        self.assertEqual(10000, config.episodes)
        self.assertEqual(1.00075, config.epsilon_decay)
        self.assertEqual(list(harness.DEFAULTS), list(config.to_dict()))

    def test_unknown_field(self):
        '''Reject fields that do not exist.'''
        with self.assertRaises(harness.ConfigError):
            harness.TrainingConfig(epochs=3)

    def test_incompatible(self):
        '''Reject settings that do not fit together.'''
        cases = [
            dict(agent=harness.CENTRALIZED_AGENT, state_variant=encoding.LOCAL),
            dict(agent=harness.DECENTRALIZED_AGENT, state_variant='S2'),
            dict(agent=harness.LINEAR_AGENT, reward_scheme=replay.PER_STEP_DELAY),
            dict(agent=harness.LINEAR_AGENT, state_variant=encoding.LOCAL_HISTORY),
            dict(checkpoint_every=10),
        ]
        for kwargs in cases:
            with self.assertRaises(harness.ConfigError):
                harness.TrainingConfig(**kwargs)

    def test_out_of_range(self):
        '''Reject values outside their range.'''
        cases = [
            dict(agent='tabular'),
            dict(memory_rule=16),
            dict(episodes=-1),
            dict(episodes=True),
            dict(batch_size=0),
            dict(gamma=1.5),
            dict(epsilon=2.0),
            dict(epsilon_decay=0.9),
            dict(learning_rate=0.0),
            dict(lf=2.5),
        ]
        for kwargs in cases:
            with self.assertRaises(harness.ConfigError):
                harness.TrainingConfig(**kwargs)

    def test_load(self):
        '''Read a YAML config and fill in the defaults.'''
        path = self.write_text('agent: centralized_deep\nstate_variant: S5\nmemory_rule: 14\n',
                               'config.yml')
        config = harness.TrainingConfig.load(path)

        self.assertEqual(harness.CENTRALIZED_AGENT, config.agent)
        self.assertEqual('S5', config.state_variant)
        self.assertEqual(14, config.memory_rule)
        self.assertEqual(32, config.batch_size)

    def test_load_not_a_mapping(self):
        '''Reject documents that are not mappings.'''
        path = self.write_text('- 1\n- 2\n', 'config.yml')
        with self.assertRaises(harness.ConfigError):
            harness.TrainingConfig.load(path)

    def test_replace(self):
        '''Copy a config with some fields changed.'''
        config = harness.TrainingConfig()
        other = config.replace(seed=7)

        self.assertEqual(7, other.seed)
        self.assertEqual(0, config.seed)
        self.assertNotEqual(config, other)
        self.assertEqual(config, other.replace(seed=0))


class AgentTestCase(common_test.TempTestCase):

    '''Test building, saving and loading agents.'''

    def test_build_local(self):
        '''Look ahead by the longest train and size the model to the local vector.'''
        agent = _agent(_quick(), 'second-instance')

        self.assertEqual(5, agent.encoder.lf)
        self.assertEqual((2 + 1 + 5 + 3) * 6, agent.model.input_size)
        self.assertEqual(3, agent.max_trains)
        self.assertFalse(agent.centralized)

    def test_build_centralized(self):
        '''Size a centralized model to the whole line.'''
        config = _quick(agent=harness.CENTRALIZED_AGENT, state_variant='S5', max_trains=4)
        agent = _agent(config, 'second-instance')
        network = traingen.fixture_network('desk-line')

        self.assertTrue(agent.centralized)
        self.assertEqual(3 * (len(network) + 4), agent.model.input_size)

    def test_build_linear(self):
        '''Use a lookup table for the linear agent.'''
        agent = _agent(_quick(agent=harness.LINEAR_AGENT, gamma=0.9), 'reduced')

        self.assertIsInstance(agent.model, qmodel.LinearQ)
        self.assertEqual(0.9, agent.model.discount)

    def test_save_load(self):
        '''Rebuild the same agent from its model file, with a greedy policy.'''
        agent = _agent(_quick(lf=4, history_depth=2), 'reduced')
        path = self.make_path('agent.model')

        agent.save(path, episodes=0)
        loaded = harness.Agent.load(path)

        self.assertEqual(agent.kind, loaded.kind)
        self.assertEqual(agent.variant, loaded.variant)
        self.assertEqual(agent.encoder, loaded.encoder)
        self.assertEqual(agent.max_trains, loaded.max_trains)
        self.assertEqual(0.0, loaded.policy.epsilon)
        for first, second in zip(agent.model.parameters(), loaded.model.parameters()):
            self.assertTrue(numpy.array_equal(first, second))


class EpisodeTestCase(unittest.TestCase):

    '''Test playing single episodes.'''

    def test_single_train(self):
        '''Move a lone train automatically and record nothing.'''
        agent = _agent(_quick(), 'single-train')
        outcome, experiences = harness.run_episode(agent, traingen.fixture('single-train'))

        self.assertEqual([], experiences)
        self.assertEqual(common.ALL_ARRIVED, outcome.terminal_class)
        self.assertEqual(0.0, outcome.weighted_delay)

    def test_head_on_never_holding(self):
        '''Deadlock two opposing trains that never hold and keep both trains' decisions.'''
        agent = _agent(_quick(), 'head-on')

        with mock.patch.object(agent, 'select', side_effect=_never_hold):
            outcome, experiences = harness.run_episode(agent, traingen.fixture('head-on'))

        self.assertEqual(common.DEADLOCK, outcome.terminal_class)
        self.assertEqual(frozenset(['A', 'B']), outcome.deadlocked_trains)
        self.assertEqual({'A', 'B'}, set(experience.train for experience in experiences))

    def test_targets_start_as_outputs(self):
        '''Record the model output as the starting target of every decision.'''
        agent = _agent(_quick(), 'second-instance')
        _, experiences = harness.run_episode(agent, traingen.fixture('second-instance'))

        self.assertTrue(experiences)
        for experience in experiences:
            self.assertTrue(numpy.array_equal(agent.forward(experience.state), experience.y))
            self.assertGreaterEqual(sum(experience.mask), 2)
            self.assertTrue(experience.mask[experience.action])

    def test_deterministic(self):
        '''Replay an exploring episode identically from the same seed.'''
        runs = []
        for _ in range(2):
            agent = _agent(_quick(epsilon=1.0, seed=11), 'second-instance')
            outcome, experiences = harness.run_episode(agent, traingen.fixture('second-instance'))
            runs.append((outcome.terminal_class, outcome.weighted_delay,
                         [(item.train, item.action, item.clock) for item in experiences]))

        self.assertEqual(runs[0], runs[1])

    def test_per_step_rewards_settled(self):
        '''Settle the reward of every decision by the end of the episode.'''
        config = _quick(reward_scheme=replay.PER_STEP_DELAY, epsilon=1.0)
        agent = _agent(config, 'second-instance')
        _, experiences = harness.run_episode(agent, traingen.fixture('second-instance'), config)

        self.assertTrue(experiences)
        for experience in experiences:
            self.assertIsNotNone(experience.reward)
            self.assertLessEqual(experience.reward, 0.0)


class RunningMinimumTestCase(unittest.TestCase):

    '''Test judging episodes against the best delay so far.'''

    def test_first_feasible(self):
        '''Let the first feasible episode set the minimum.'''
        minimum = harness.RunningMinimum()
        self.assertEqual(common.BEST, minimum.classify(_outcome(5000.0)))
        self.assertEqual(5000.0, minimum.value)

    def test_equal(self):
        '''Judge a tie with the minimum as best.'''
        self.assertEqual(common.BEST, harness.RunningMinimum(1000.0).classify(_outcome(1000.0)))

    def test_threshold(self):
        '''Judge delays past 1.25 times the minimum as normal.'''
        minimum = harness.RunningMinimum(1000.0)
        self.assertEqual(common.NORMAL, minimum.classify(_outcome(1300.0)))
        self.assertEqual(1000.0, minimum.value)

    def test_improvement_clears_best(self):
        '''Clear the best store when the minimum strictly improves.'''
        memory = mock.Mock()
        minimum = harness.RunningMinimum(1000.0)

        self.assertEqual(common.BEST, minimum.classify(_outcome(900.0), memory))
        self.assertEqual(900.0, minimum.value)
        memory.clear_best.assert_called_once_with()

        minimum.classify(_outcome(900.0), memory)
        memory.clear_best.assert_called_once_with()

    def test_deadlock(self):
        '''Leave the minimum alone on a deadlock.'''
        minimum = harness.RunningMinimum(1000.0)
        outcome = _outcome(None, terminal_class=common.DEADLOCK)

        self.assertEqual(common.DEADLOCK, minimum.classify(outcome))
        self.assertEqual(1000.0, minimum.value)

    def test_scale(self):
        '''Judge the same way when every delay is scaled.'''
        for delay in (900.0, 1000.0, 1250.0, 1300.0):
            for scale in (0.01, 1.0, 37.0):
                self.assertEqual(harness.classify(_outcome(delay), 1000.0),
                                 harness.classify(_outcome(delay * scale), 1000.0 * scale))

    def test_window_counts(self):
        '''Count the classes of consecutive windows.'''
        records = [harness.EpisodeRecord(index, name, None, 1.0, None, 0) for index, name in
                   enumerate([common.BEST, common.NORMAL, common.BEST, common.DEADLOCK])]
        counts = harness.window_counts(records, 3)

        self.assertEqual(2, len(counts))
        self.assertEqual((0, 2, 1, 0), tuple(counts[0].values()))
        self.assertEqual((1, 0, 0, 1), tuple(counts[1].values()))


class TrainTestCase(common_test.TempTestCase):

    '''Test whole training runs.'''

    def test_zero_episodes(self):
        '''Leave the agent untouched and log nothing.'''
        config = _quick(episodes=0)
        agent = _agent(config, 'second-instance')
        before = [item.copy() for item in agent.model.parameters()]

        trained, records = harness.train(config, [traingen.fixture('second-instance')],
                                         agent=agent)

        self.assertIs(agent, trained)
        self.assertEqual([], records)
        for old, new in zip(before, trained.model.parameters()):
            self.assertTrue(numpy.array_equal(old, new))

    def test_no_instances(self):
        '''Refuse to train without instances.'''
        with self.assertRaises(ValueError):
            harness.train(_quick(), [])

    def test_deterministic(self):
        '''Give identical logs and weights for the same config and seed.'''
        config = _quick(episodes=8)
        instances = [traingen.fixture('second-instance'), traingen.fixture('first-instance')]

        first, first_records = harness.train(config, instances)
        second, second_records = harness.train(config, instances)

        self.assertEqual(first_records, second_records)
        for left, right in zip(first.model.parameters(), second.model.parameters()):
            self.assertTrue(numpy.array_equal(left, right))

    def test_records(self):
        '''Log one record per episode and decay epsilon after each.'''
        config = _quick(episodes=4)
        agent, records = harness.train(config, [traingen.fixture('second-instance')])

        self.assertEqual([0, 1, 2, 3], [record.episode for record in records])
        self.assertEqual(1.0, records[0].epsilon)
        self.assertAlmostEqual(1.0 / 1.00075, records[1].epsilon)
        self.assertAlmostEqual(1.0 / 1.00075 ** 4, agent.policy.epsilon)
        self.assertIn(records[0].reward_class, (common.BEST, common.DEADLOCK))
        self.assertEqual([0] * 4, [record.ms for record in records])

    def test_log_file(self):
        '''Write the episode log as it trains.'''
        path = self.make_path('log.csv')
        harness.train(_quick(episodes=3), [traingen.fixture('reduced')], log_path=path)

        with io.open(path, 'r', encoding='utf-8') as file_:
            lines = file_.read().splitlines()

        self.assertEqual('episode,class,weighted_delay,epsilon,loss,ms', lines[0])
        self.assertEqual(4, len(lines))

    def test_write_log(self):
        '''Write a finished log in one go.'''
        path = self.make_path('log.csv')
        _, records = harness.train(_quick(episodes=2), [traingen.fixture('reduced')])
        harness.write_log(records, path)

        with io.open(path, 'r', encoding='utf-8') as file_:
            self.assertEqual(3, len(file_.read().splitlines()))

    def test_checkpoint(self):
        '''Write the agent every few episodes.'''
        path = self.make_path('checkpoint.model')
        config = _quick(episodes=4, checkpoint_every=2, checkpoint_path=path)
        harness.train(config, [traingen.fixture('reduced')])

        _, meta = qmodel.load_model(path)
        self.assertEqual('4', meta['episode'])

    def test_divergence_checkpoint(self):
        '''Write a checkpoint before giving up on a diverging run.'''
        path = self.make_path('checkpoint.model')
        config = _quick(episodes=3, checkpoint_path=path)
        agent = _agent(config, 'second-instance')
        error = qmodel.NonFiniteLossError('Training loss "nan" is not finite.')

        with mock.patch.object(agent, 'train_step', side_effect=error) as train_step:
            with self.assertRaises(qmodel.NonFiniteLossError):
                harness.train(config, [traingen.fixture('second-instance')], agent=agent)

        self.assertEqual(1, train_step.call_count)
        _, meta = qmodel.load_model(path)
        self.assertLess(int(meta['episode']), 3)

    def test_every_agent(self):
        '''Train each agent kind with each reward scheme it supports.'''
        configs = [
            _quick(agent=harness.LINEAR_AGENT),
            _quick(memory_mode=replay.BOUNDED_SINGLE, batch_size=4),
            _quick(reward_scheme=replay.PER_STEP_DELAY, gamma=0.9, memory_rule=13),
            _quick(state_variant=encoding.LOCAL_HISTORY, memory_mode=replay.BOUNDED_TRIPLE),
            _quick(agent=harness.CENTRALIZED_AGENT, state_variant='S0', memory_rule=11),
            _quick(agent=harness.CENTRALIZED_AGENT, state_variant='S5',
                   reward_scheme=replay.PER_STEP_DELAY, memory_rule=15),
        ]
        for config in configs:
            agent, records = harness.train(config, [traingen.fixture('second-instance')])
            self.assertEqual(5, len(records), msg=config)
            self.assertEqual(config.agent, agent.kind)


class EvaluateTestCase(common_test.TempTestCase):

    '''Test greedy evaluation.'''

    def test_single_train(self):
        '''Give a lone train no delay.'''
        agent = _agent(_quick(), 'single-train')
        stats = harness.evaluate(agent, [traingen.fixture('single-train')])

        self.assertEqual(0.0, stats.mean)
        self.assertEqual(0, stats.deadlocks)

    def test_policy_untouched(self):
        '''Leave the agent's own exploring policy alone.'''
        agent = _agent(_quick(), 'reduced')
        harness.evaluate(agent, [traingen.fixture('reduced')])
        self.assertEqual(1.0, agent.policy.epsilon)

    def test_checkpoint_round_trip(self):
        '''Reproduce greedy delays exactly after saving and loading.'''
        instances = [traingen.fixture('second-instance'), traingen.fixture('first-instance')]
        agent, _ = harness.train(_quick(episodes=3), instances)
        path = self.make_path('agent.model')
        agent.save(path)

        before = harness.evaluate(agent, instances)
        after = harness.evaluate(harness.Agent.load(path), instances)

        self.assertEqual(before.delays, after.delays)


@unittest.skipUnless(common_test.long_tests_enabled(),
                     'Set {env} to run the long training runs.'.format(
                         env=common.LONG_TESTS_ENV_VAR))
class LongTrainingTestCase(unittest.TestCase):

    '''Train for the full 10000 episodes.'''

    def test_mostly_best(self):
        '''End with at least half of the last 1000 episodes judged best.'''
        instances = [traingen.fixture('second-instance')]

        for seed in (0, 1, 2):
            config = harness.TrainingConfig(seed=seed, log_wall_time=False)
            _, records = harness.train(config, instances)
            last = harness.window_counts(records, config.window)[-1]

            self.assertGreaterEqual(last[common.BEST], 500, msg=seed)
