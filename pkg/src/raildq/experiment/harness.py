#!/usr/bin/env python
# -*- coding: utf-8 -*-

'''Run episodes, train agents and evaluate them.

The harness joins the simulator, the encoders, the models and the replay
memories. An episode repeatedly asks the simulator for the next decision,
encodes it, lets the agent choose and applies the choice. Training runs
many episodes, turns their decisions into targets and updates the model.

'''

# IMPORT STANDARD LIBRARIES
import time
import logging
import collections

# IMPORT THIRD-PARTY LIBRARIES
import six
import numpy

# IMPORT LOCAL LIBRARIES
from . import traingen
from . import benchmark
from ..base import loader
from ..base import simcore
from ..helper import common
from ..helper import export
from ..learning import replay
from ..learning import qmodel
from ..learning import encoding

_LOGGER = logging.getLogger(__name__)

LINEAR_AGENT = 'linear'
DECENTRALIZED_AGENT = 'decentralized_deep'
CENTRALIZED_AGENT = 'centralized_deep'
AGENT_KINDS = (LINEAR_AGENT, DECENTRALIZED_AGENT, CENTRALIZED_AGENT)

DEFAULTS = collections.OrderedDict([
    ('agent', DECENTRALIZED_AGENT),
    ('state_variant', encoding.LOCAL),
    ('reward_scheme', replay.TERMINAL_CLASS),
    ('memory_mode', replay.TRIPARTITE),
    ('memory_rule', 12),
    ('episodes', 10000),
    ('gamma', 1.0),
    ('learning_rate', qmodel.LEARNING_RATE),
    ('epsilon', qmodel.EPSILON),
    ('epsilon_decay', qmodel.EPSILON_DECAY),
    ('epsilon_floor', qmodel.EPSILON_FLOOR),
    ('batch_size', 32),
    ('seed', 0),
    ('checkpoint_every', 0),
    ('checkpoint_path', None),
    ('window', 1000),
    ('lf', None),
    ('lb', common.BACKWARD_COUNT),
    ('n_r', common.REACHABLE_COUNT),
    ('history_depth', common.HISTORY_DEPTH),
    ('max_trains', None),
    ('log_wall_time', True),
    ('instances', []),
])

EpisodeRecord = collections.namedtuple(
    'EpisodeRecord', 'episode reward_class weighted_delay epsilon loss ms')


class ConfigError(ValueError):

    '''A training config has an unknown field or incompatible values.'''


class TrainingConfig(object):

    '''Every knob of a training run, mirroring the JSON config file.

    Unset fields take their value from :data:`DEFAULTS`.

    '''

    def __init__(self, **kwargs):
        '''Set and check every field.

        Raises:
            ConfigError: If a field is unknown or the values do not fit together.

        '''
        super(TrainingConfig, self).__init__()
        unknown = sorted(set(kwargs) - set(DEFAULTS))
        if unknown:
            raise ConfigError('Config fields "{keys}" are unknown. Options were, "{opt}".'
                              ''.format(keys=unknown, opt=list(DEFAULTS)))

        for key, default in six.iteritems(DEFAULTS):
            value = kwargs.get(key, default)
            if isinstance(value, list):
                value = list(value)
            setattr(self, key, value)

        self.validate()

    def __repr__(self):
        '''str: The config fields.'''
        return '{name}({fields})'.format(
            name=self.__class__.__name__,
            fields=', '.join('{key}={value!r}'.format(key=key, value=value)
                             for key, value in self.to_dict().items()))

    def __eq__(self, other):
        '''bool: If both configs hold the same fields.'''
        if not isinstance(other, TrainingConfig):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __ne__(self, other):
        '''bool: If the configs differ.'''
        equal = self.__eq__(other)
        if equal is NotImplemented:
            return equal
        return not equal

    __hash__ = None

    @classmethod
    def from_dict(cls, data):
        ''':class:`TrainingConfig`: Build a config from a parsed document.'''
        if not isinstance(data, dict):
            raise ConfigError('Config must be a mapping, got "{data!r}".'.format(data=data))
        return cls(**{str(key): value for key, value in data.items()})

    @classmethod
    def load(cls, path):
        ''':class:`TrainingConfig`: Read a JSON or YAML config file.'''
        return cls.from_dict(loader.load_document(path))

    def to_dict(self):
        '''collections.OrderedDict: Every field, in :data:`DEFAULTS` order.'''
        return collections.OrderedDict((key, getattr(self, key)) for key in DEFAULTS)

    def replace(self, **kwargs):
        ''':class:`TrainingConfig`: A copy with some fields changed.'''
        data = self.to_dict()
        data.update(kwargs)
        return TrainingConfig(**data)

    def validate(self):
        '''Check every field and how they combine.

        Raises:
            ConfigError: If anything is out of range or incompatible.

        '''
        choices = (
            ('agent', AGENT_KINDS),
            ('state_variant', encoding.VARIANTS),
            ('reward_scheme', replay.REWARD_SCHEMES),
            ('memory_mode', replay.MEMORY_MODES),
            ('memory_rule', sorted(replay.MEMORY_RULES)),
        )
        for key, options in choices:
            if getattr(self, key) not in options:
                raise ConfigError('Config field "{key}": "{value}" is not one of "{opt}".'
                                  ''.format(key=key, value=getattr(self, key), opt=list(options)))

        for key in ('episodes', 'batch_size', 'checkpoint_every', 'window', 'lb', 'n_r',
                    'history_depth', 'seed'):
            _check_integer(key, getattr(self, key))

        for key in ('lf', 'max_trains'):
            if getattr(self, key) is not None:
                _check_integer(key, getattr(self, key))

        if self.window < 1 or self.history_depth < 1 or self.batch_size < 1:
            raise ConfigError('Config fields "window", "history_depth" and "batch_size" must be '
                              'at least 1.')

        if not 0 <= self.gamma <= 1:
            raise ConfigError('Config field "gamma": "{value}" must be in [0, 1].'
                              ''.format(value=self.gamma))

        if self.learning_rate <= 0 or self.epsilon_decay < 1 or self.epsilon_floor < 0:
            raise ConfigError('Config fields "learning_rate", "epsilon_decay" and '
                              '"epsilon_floor" are out of range.')

        if not 0 <= self.epsilon <= 1:
            raise ConfigError('Config field "epsilon": "{value}" must be in [0, 1].'
                              ''.format(value=self.epsilon))

        local = self.state_variant in encoding.LOCAL_VARIANTS

        if local and self.agent == CENTRALIZED_AGENT:
            raise ConfigError('Config field "state_variant": "{variant}" needs the "{linear}" or '
                              '"{deep}" agent.'.format(variant=self.state_variant,
                                                       linear=LINEAR_AGENT,
                                                       deep=DECENTRALIZED_AGENT))

        if not local and self.agent != CENTRALIZED_AGENT:
            raise ConfigError('Config field "state_variant": "{variant}" needs the "{agent}" '
                              'agent.'.format(variant=self.state_variant, agent=CENTRALIZED_AGENT))

        if self.agent == LINEAR_AGENT:
            if self.reward_scheme == replay.PER_STEP_DELAY:
                raise ConfigError('Config field "reward_scheme": "{scheme}" does not work with '
                                  'the "{agent}" agent.'.format(scheme=self.reward_scheme,
                                                                agent=LINEAR_AGENT))
            if self.state_variant != encoding.LOCAL:
                raise ConfigError('Config field "state_variant": the "{agent}" agent only '
                                  'supports "{variant}".'.format(agent=LINEAR_AGENT,
                                                                 variant=encoding.LOCAL))

        if self.checkpoint_every and not self.checkpoint_path:
            raise ConfigError('Config field "checkpoint_every" needs a "checkpoint_path".')


def _check_integer(key, value):
    '''Reject anything that is not a non-negative integer.'''
    if isinstance(value, bool) or not isinstance(value, six.integer_types) or value < 0:
        raise ConfigError('Config field "{key}": "{value}" must be a non-negative integer.'
                          ''.format(key=key, value=value))


class Agent(object):

    '''A model together with the encoding it reads and the policy that drives it.

    Attributes:
        kind (str): "linear", "decentralized_deep" or "centralized_deep".
        model (:class:`raildq.learning.qmodel.DeepQ` or :class:`raildq.learning.qmodel.LinearQ`):
            The Q-function.
        variant (str): The state encoding.
        encoder (:class:`raildq.learning.encoding.EncoderConfig`): The local window.
        policy (:class:`raildq.learning.qmodel.Policy`): Exploration settings.
        max_trains (int): The one-hot width of "S5".

    '''

    def __init__(self, kind, model, variant, encoder, policy=None, max_trains=1):
        '''Bundle the parts of an agent.'''
        super(Agent, self).__init__()
        self.kind = kind
        self.model = model
        self.variant = variant
        self.encoder = encoder
        self.policy = policy or qmodel.Policy()
        self.max_trains = max_trains

    def __repr__(self):
        '''str: The agent kind and encoding.'''
        return '{name}({kind!r}, {variant!r}, {dims})'.format(
            name=self.__class__.__name__, kind=self.kind, variant=self.variant,
            dims=self.model.dims())

    @property
    def centralized(self):
        '''bool: If the agent reads the whole line.'''
        return self.kind == CENTRALIZED_AGENT

    def with_policy(self, policy):
        ''':class:`Agent`: The same model and encoding with another policy.'''
        return Agent(self.kind, self.model, self.variant, self.encoder, policy, self.max_trains)

    def observe(self, sim, train, local=None):
        ''':class:`numpy.ndarray`: The flat state the model reads.'''
        return encoding.encode(sim, train, self.variant, self.encoder,
                               max_trains=self.max_trains, local=local)

    def forward(self, state):
        ''':class:`numpy.ndarray`: The model's five values for a state.'''
        return self.model.forward(state)

    def select(self, q_values, mask):
        '''int: Pick an action with the agent's policy.'''
        return qmodel.select_action(q_values, mask, self.policy)

    def train_step(self, batch):
        '''float: Train on a batch of :class:`raildq.learning.replay.Experience`.'''
        return qmodel.train_step(
            self.model, [(item.state, item.y, numpy.array(item.mask, dtype=numpy.float64))
                         for item in batch])

    def save(self, path, **meta):
        '''Write the model with everything needed to rebuild the agent.'''
        meta.update(
            agent=self.kind,
            variant=self.variant,
            lf=self.encoder.lf,
            lb=self.encoder.lb,
            n_r=self.encoder.n_r,
            history_depth=self.encoder.history_depth,
            max_trains=self.max_trains,
        )
        qmodel.save_model(self.model, path, **meta)

    @classmethod
    def load(cls, path, policy=None):
        ''':class:`Agent`: Rebuild an agent from a model file.'''
        model, meta = qmodel.load_model(path)
        encoder = encoding.EncoderConfig(
            lf=int(meta['lf']), lb=int(meta['lb']), n_r=int(meta['n_r']),
            history_depth=int(meta['history_depth']))
        return cls(meta['agent'], model, meta['variant'], encoder,
                   policy=policy or qmodel.Policy.greedy(), max_trains=int(meta['max_trains']))


def build_agent(config, network, instances):
    '''Create a fresh agent whose inputs fit a network and a set of instances.

    Args:
        config (:class:`TrainingConfig`): The run settings.
        network (:class:`raildq.base.topology.Network`): The line.
        instances (list[:class:`raildq.base.instance.Instance`]): Every instance the agent sees.

    Returns:
        :class:`Agent`: The agent.

    '''
    max_length = max([instance.max_length for instance in instances] or [0.0])
    max_trains = config.max_trains or max([len(instance.trains) for instance in instances] or [1])

    settings = dict(lb=config.lb, n_r=config.n_r, history_depth=config.history_depth)
    if config.lf is None:
        encoder = encoding.EncoderConfig.for_length(max_length, **settings)
    else:
        encoder = encoding.EncoderConfig(lf=config.lf, **settings)

    size = encoding.input_size(config.state_variant, network, encoder, max_trains)

    if config.agent == LINEAR_AGENT:
        model = qmodel.LinearQ(size, learning_rate=config.learning_rate, discount=config.gamma)
    else:
        model = qmodel.DeepQ(size, learning_rate=config.learning_rate, seed=config.seed)

    policy = qmodel.Policy(epsilon=config.epsilon, divisor=config.epsilon_decay,
                           floor=config.epsilon_floor, seed=config.seed)

    return Agent(config.agent, model, config.state_variant, encoder, policy, max_trains)


def _settle_auto_move(sim, decision, ledger):
    '''Charge the delay of a move the simulator made on its own.'''
    train = decision.train
    ledger.resume(train.id, sim.clock)

    if decision.action == simcore.HOLD:
        ledger.hold(train.id, sim.clock, train.weight)
        return

    record = sim.step_log[-1]
    elapsed = train.next_event_time - sim.clock
    ledger.go(replay.produced_delay(train.weight, elapsed, sim.rt.seconds(train.id, record.resource)))


def run_episode(agent, instance, config=None, network=None, episode=0):
    '''Play one episode to its end.

    Args:
        agent (:class:`Agent`): Who decides.
        instance (:class:`raildq.base.instance.Instance`): Where the trains start.
        config (:obj:`TrainingConfig`, optional): Used for the reward scheme.
        network (:obj:`raildq.base.topology.Network`, optional):
            The line. Defaults to the fixture network the instance names.
        episode (:obj:`int`, optional): Written to the step log and experiences.

    Raises:
        raildq.base.simcore.ContractViolation: If an illegal action reaches the simulator.

    Returns:
        tuple[:class:`raildq.base.simcore.EpisodeOutcome`, list[:class:`raildq.learning.replay.Experience`]]:
            How the episode ended and every decision the agent made.

    '''
    network = traingen.network_for(instance, network)
    per_step = config is not None and config.reward_scheme == replay.PER_STEP_DELAY

    sim = simcore.SimState(network, instance, lookahead=(agent.encoder.lf, agent.encoder.lb),
                           episode=episode)
    ledger = replay.DelayLedger()
    experiences = []

    while True:
        decision = simcore.next_decision(sim)
        if decision.kind == simcore.TERMINAL:
            break

        if decision.kind == simcore.AUTO_APPLIED:
            if per_step:
                _settle_auto_move(sim, decision, ledger)
            continue

        train = decision.train
        local = encoding.encode_local(sim, train, agent.encoder)
        fingerprint = encoding.fingerprint(local)
        state = agent.observe(sim, train, local=local)
        q_values = agent.forward(state)
        experience = None

        if simcore.forced_move_check(sim, train, fingerprint):
            action = simcore.forced_action(sim, train)
            kind = simcore.FORCED
            _LOGGER.debug('Train "%s" was forced to take action %s at t=%s.',
                          train.id, action, sim.clock)
        else:
            action = agent.select(q_values, decision.mask)
            kind = simcore.AGENT
            experience = replay.Experience(state, decision.mask, action, q_values,
                                           episode=episode, train=train.id, clock=sim.clock)
            experiences.append(experience)

        encoding.state_history_record(sim, train, local)
        ledger.resume(train.id, sim.clock)
        options = simcore.route_options(sim, train)
        elapsed = simcore.apply_action(sim, train, action, fingerprint=fingerprint, kind=kind)

        if action == simcore.HOLD:
            ledger.hold(train.id, sim.clock, train.weight, experience)
        else:
            best = options[0]
            produced = replay.produced_delay(train.weight, elapsed, sim.rt.seconds(train.id, best))
            ledger.go(produced, experience)

    ledger.settle(sim.clock)
    return (decision.outcome, experiences)


class RunningMinimum(object):

    '''The best weighted delay seen so far on one instance.'''

    def __init__(self, value=None):
        '''Start empty, or from a known minimum.'''
        super(RunningMinimum, self).__init__()
        self.value = value

    def classify(self, outcome, memory=None):
        '''Judge an episode and update the minimum.

        On a strict improvement the memory's best store is cleared.

        Returns:
            str: "best", "normal" or "deadlock".

        '''
        reward_class = classify(outcome, self.value)
        if outcome.terminal_class == common.DEADLOCK:
            return reward_class

        delay = outcome.weighted_delay
        if self.value is None or delay < self.value:
            if self.value is not None and memory is not None:
                memory.clear_best()
                _LOGGER.debug('New minimum weighted delay %s, best store cleared.', delay)
            self.value = delay

        return reward_class


def classify(outcome, best_delay_so_far):
    '''str: "best", "normal" or "deadlock", see :func:`raildq.learning.replay.classify`.'''
    return replay.classify(outcome, best_delay_so_far)


def window_counts(records, window):
    '''Count the episode classes in consecutive windows.

    Args:
        records (iterable[:class:`EpisodeRecord`]): The log, in episode order.
        window (int): Episodes per window.

    Returns:
        list[collections.OrderedDict]: One {window, best, normal, deadlock} entry per window.

    '''
    counts = []
    for index, record in enumerate(records):
        if index % window == 0:
            counts.append(collections.OrderedDict(
                [('window', index // window)] + [(name, 0) for name in common.REWARD_CLASSES]))
        counts[-1][record.reward_class] += 1
    return counts


def write_log(records, path):
    '''Write a whole episode log as CSV.'''
    with export.EpisodeLogWriter(path) as writer:
        for record in records:
            writer.write(record)


def _checkpoint(agent, config, episode):
    '''Write the agent to the checkpoint path.'''
    agent.save(config.checkpoint_path, episode=episode)
    _LOGGER.info('Checkpoint written to "%s" after episode %s.', config.checkpoint_path, episode)


def train(config, instances, network=None, agent=None, log_path=None):
    '''Train an agent over many episodes.

    Each episode runs, its decisions become targets, they are stored in the
    replay memory, one batch is sampled and one training step taken. Then
    epsilon decays.

    Args:
        config (:class:`TrainingConfig`): The run settings.
        instances (list[:class:`raildq.base.instance.Instance`]): Drawn uniformly per episode.
        network (:obj:`raildq.base.topology.Network`, optional): Defaults to the instances' fixture network.
        agent (:obj:`Agent`, optional): Continue training this agent instead of a fresh one.
        log_path (:obj:`str`, optional): Where to write the CSV episode log.

    Raises:
        ValueError: If no instance is given.
        raildq.learning.qmodel.NonFiniteLossError:
            If training diverges. A checkpoint is written first when a path is configured.

    Returns:
        tuple[:class:`Agent`, list[:class:`EpisodeRecord`]]: The agent and the episode log.

    '''
    if not instances:
        raise ValueError('Training needs at least one instance.')

    network = traingen.network_for(instances[0], network)
    if agent is None:
        agent = build_agent(config, network, instances)

    memory = replay.build_memory(config.memory_mode, rule=config.memory_rule,
                                 batch_size=config.batch_size, seed=config.seed)
    picker = numpy.random.RandomState(config.seed)
    minimums = collections.defaultdict(RunningMinimum)
    records = []
    writer = export.EpisodeLogWriter(log_path) if log_path else None

    try:
        for episode in range(config.episodes):
            started = time.time()
            index = 0 if len(instances) == 1 else picker.randint(len(instances))
            epsilon = agent.policy.epsilon

            outcome, experiences = run_episode(agent, instances[index], config, network, episode)

            best_before = minimums[index].value
            reward_class = minimums[index].classify(outcome, memory)

            if config.reward_scheme == replay.TERMINAL_CLASS:
                stored = replay.assign_terminal_rewards(experiences, outcome, best_before)
            else:
                stored = replay.assign_step_targets(experiences, outcome, config.gamma,
                                                    agent.model, agent.centralized)

            for experience in stored:
                memory.store(experience, reward_class)

            batch = memory.sample()
            loss = None
            if batch:
                try:
                    loss = agent.train_step(batch)
                except qmodel.NonFiniteLossError as error:
                    _LOGGER.error('Training diverged at episode %s with loss %s.',
                                  episode, error.loss)
                    if config.checkpoint_path:
                        _checkpoint(agent, config, episode)
                    raise

            agent.policy.decay()

            ms = int(round((time.time() - started) * 1000)) if config.log_wall_time else 0
            record = EpisodeRecord(episode, reward_class, outcome.weighted_delay, epsilon, loss, ms)
            records.append(record)
            if writer is not None:
                writer.write(record)

            if config.checkpoint_every and (episode + 1) % config.checkpoint_every == 0:
                _checkpoint(agent, config, episode + 1)

            if (episode + 1) % config.window == 0:
                counts = window_counts(records[-config.window:], config.window)[0]
                _LOGGER.info('Episodes %s-%s: %s best, %s normal, %s deadlock, epsilon %.5f.',
                             episode + 1 - config.window, episode, counts[common.BEST],
                             counts[common.NORMAL], counts[common.DEADLOCK],
                             agent.policy.epsilon)
    finally:
        if writer is not None:
            writer.close()

    return (agent, records)


def evaluate(agent, instances, network=None):
    '''Run one greedy episode per instance.

    Args:
        agent (:class:`Agent`): The agent. Its own policy is left untouched.
        instances (list[:class:`raildq.base.instance.Instance`]): The test set.
        network (:obj:`raildq.base.topology.Network`, optional): Defaults to each instance's fixture network.

    Returns:
        :class:`raildq.experiment.benchmark.EvaluationStats`:
            The delay statistics over non-deadlocked runs and the deadlock count.

    '''
    greedy = agent.with_policy(qmodel.Policy.greedy())
    delays = []
    for index, instance in enumerate(instances):
        outcome, _ = run_episode(greedy, instance, network=network, episode=index)
        delays.append(outcome.weighted_delay)

    return benchmark.summarize(delays)


performance_profile = benchmark.performance_profile
