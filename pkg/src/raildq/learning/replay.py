#!/usr/bin/env python
# -*- coding: utf-8 -*-

'''Experience memories and the rules that turn an episode into training targets.

Two reward schemes are supported.

- "terminal_class": every decision of an episode is judged by how the
  episode ended. A good ending rewards the action that was taken and
  penalizes the others.
- "per_step_delay": every decision is rewarded by the weighted delay it
  produced, and targets are built from the value of the next state.

'''

# IMPORT STANDARD LIBRARIES
import hashlib
import logging
import collections

# IMPORT THIRD-PARTY LIBRARIES
import numpy

# IMPORT LOCAL LIBRARIES
from ..helper import common

_LOGGER = logging.getLogger(__name__)

TERMINAL_CLASS = 'terminal_class'
PER_STEP_DELAY = 'per_step_delay'
REWARD_SCHEMES = (TERMINAL_CLASS, PER_STEP_DELAY)

TRIPARTITE = 'tripartite'
BOUNDED_SINGLE = 'bounded_single'
BOUNDED_TRIPLE = 'bounded_triple'
MEMORY_MODES = (TRIPARTITE, BOUNDED_SINGLE, BOUNDED_TRIPLE)

# Stores in sampling order
STORES = (common.DEADLOCK, common.NORMAL, common.BEST)
RANK = {common.DEADLOCK: 0, common.NORMAL: 1, common.BEST: 2}

# Rule -> (deadlock, normal, best) samples per batch
MEMORY_RULES = {
    11: (12, 12, 12),
    12: (13, 6, 13),
    13: (6, 6, 20),
    14: (16, 0, 16),
    15: (8, 0, 24),
}

SINGLE_CAPACITY = 4096
TRIPLE_CAPACITY = 2048


class Experience(object):

    '''One decision taken during an episode, and what it should have been worth.

    Attributes:
        state (:class:`numpy.ndarray`): The encoded state the agent saw.
        mask (tuple[bool]): The allowed actions.
        action (int): The action taken.
        y (:class:`numpy.ndarray`): The training target. It starts as the model output.
        episode (int): The episode the decision came from.
        train (str): The deciding train.
        clock (float): When the decision was taken.
        reward (float or NoneType): The settled per-step reward.
        next_state (:class:`numpy.ndarray` or NoneType): The state of the next linked decision.
        next_mask (tuple[bool] or NoneType): The mask of the next linked decision.
        terminal (bool): If no decision follows this one.

    '''

    def __init__(self, state, mask, action, y, episode=0, train=None, clock=0.0):
        '''Record a decision.'''
        super(Experience, self).__init__()
        self.state = numpy.asarray(state, dtype=numpy.float64)
        self.mask = tuple(bool(flag) for flag in mask)
        self.action = int(action)
        self.y = numpy.array(y, dtype=numpy.float64)
        self.episode = episode
        self.train = train
        self.clock = clock
        self.reward = None
        self.next_state = None
        self.next_mask = None
        self.terminal = False

    def __repr__(self):
        '''str: A short description of the decision.'''
        return '{name}(episode={episode!r}, train={train!r}, action={action!r})'.format(
            name=self.__class__.__name__, episode=self.episode, train=self.train,
            action=self.action)

    @property
    def key(self):
        '''tuple[bytes, tuple[bool]]: What makes two experiences "the same".'''
        return (self.state.tobytes(), self.mask)

    @property
    def mandatory(self):
        '''bool: If the mask left fewer than two choices.'''
        return sum(self.mask) < 2

    def digest(self):
        '''str: A short hash of the key, for audit files.'''
        return hashlib.sha1(self.state.tobytes() + bytes(bytearray(self.mask))).hexdigest()[:12]


def classify(outcome, best_delay_so_far):
    '''Judge an episode against the best weighted delay seen so far.

    Args:
        outcome (:class:`raildq.base.simcore.EpisodeOutcome`): The finished episode.
        best_delay_so_far (float or NoneType): The running minimum. None before the first feasible episode.

    Returns:
        str: "deadlock", "best" when within 1.25 times the minimum, or "normal".

    '''
    if outcome.terminal_class == common.DEADLOCK:
        return common.DEADLOCK

    if best_delay_so_far is None or outcome.weighted_delay <= common.BEST_RATIO * best_delay_so_far:
        return common.BEST

    return common.NORMAL


def assign_terminal_rewards(experiences, outcome, best_delay_so_far):
    '''Edit the targets of an episode's decisions from how it ended.

    - deadlock: the taken action of every deadlocked train's decision gets
      -3. Decisions of other trains are dropped.
    - normal: the taken action gets -1.
    - best: the taken action gets +1 and every other allowed action -1.

    Args:
        experiences (list[:class:`Experience`]): The decisions, targets holding the model outputs.
        outcome (:class:`raildq.base.simcore.EpisodeOutcome`): The finished episode.
        best_delay_so_far (float or NoneType): The running minimum before this episode.

    Returns:
        list[:class:`Experience`]: The edited decisions worth storing.

    '''
    reward_class = classify(outcome, best_delay_so_far)
    edited = []

    for experience in experiences:
        if reward_class == common.DEADLOCK:
            if experience.train not in outcome.deadlocked_trains:
                continue
            experience.y[experience.action] = common.DEADLOCK_PENALTY
        elif reward_class == common.NORMAL:
            experience.y[experience.action] = -1.0
        else:
            for action, allowed in enumerate(experience.mask):
                if allowed:
                    experience.y[action] = -1.0
            experience.y[experience.action] = 1.0

        edited.append(experience)

    return edited


def build_q_target(reward, next_state, terminal, gamma, model, next_mask=None):
    '''Get the one-step target of a per-step decision.

    Args:
        reward (float): The scaled reward of the decision.
        next_state (:class:`numpy.ndarray` or NoneType): The next linked state.
        terminal (bool): If no decision follows.
        gamma (float): The discount.
        model: Anything with ``forward``.
        next_mask (:obj:`iterable[bool]`, optional): Restricts the max to allowed actions.

    Returns:
        float: The reward, plus the discounted best next value when not terminal.

    '''
    if terminal or next_state is None or not gamma:
        return float(reward)

    values = numpy.asarray(model.forward(next_state), dtype=numpy.float64)
    if next_mask is not None:
        allowed = [index for index, flag in enumerate(next_mask) if flag]
        values = values[allowed]

    return float(reward + gamma * numpy.max(values))


def deferred_hold_reward(hold_clock, resume_clock, weight, cumulative):
    '''Get the reward of a hold, known once the train is acted on again.

    Args:
        hold_clock (float): When the train was held.
        resume_clock (float): When it was next moved or held again.
        weight (float): The train's delay weight.
        cumulative (float): The weighted delay produced before the hold was settled.

    Returns:
        float: The negated, scaled delay.

    '''
    held = weight * max(0.0, resume_clock - hold_clock)
    return -(held + cumulative) / common.REWARD_SCALE


def produced_delay(weight, elapsed, best_seconds):
    '''float: The weighted delay a go action adds over the best free running time.'''
    return weight * max(0.0, elapsed - best_seconds)


class DelayLedger(object):

    '''Track the weighted delay of an episode and settle per-step rewards.

    Holds are settled when their train is next acted on, or when the episode ends.

    Attributes:
        total (float): The weighted delay produced so far.

    '''

    def __init__(self):
        '''Start with no delay.'''
        super(DelayLedger, self).__init__()
        self.total = 0.0
        self._holds = collections.OrderedDict()

    def resume(self, train_id, clock):
        '''Settle a train's pending hold, if it has one.'''
        pending = self._holds.pop(train_id, None)
        if pending is None:
            return

        experience, start, weight = pending
        reward = deferred_hold_reward(start, clock, weight, self.total)
        self.total += weight * max(0.0, clock - start)
        if experience is not None:
            experience.reward = reward

    def hold(self, train_id, clock, weight, experience=None):
        '''Start a hold whose reward is known later.'''
        self._holds[train_id] = (experience, clock, weight)

    def go(self, produced, experience=None):
        '''Settle a go action right away.'''
        reward = -(self.total + produced) / common.REWARD_SCALE
        self.total += produced
        if experience is not None:
            experience.reward = reward

    def settle(self, clock):
        '''Settle every pending hold at the end of an episode.'''
        for train_id in sorted(self._holds, key=common.natural_key):
            self.resume(train_id, clock)


def link_transitions(experiences, centralized):
    '''Point every decision at the decision that follows it.

    Centralized agents follow the episode order. Decentralized agents follow
    the same train's next decision.

    Args:
        experiences (list[:class:`Experience`]): The episode's decisions, in order.
        centralized (bool): Which successor to use.

    '''
    chains = collections.OrderedDict()
    for experience in experiences:
        chains.setdefault(None if centralized else experience.train, []).append(experience)

    for chain in chains.values():
        for current, following in zip(chain, chain[1:]):
            current.next_state = following.state
            current.next_mask = following.mask
            current.terminal = False
        chain[-1].next_state = None
        chain[-1].next_mask = None
        chain[-1].terminal = True


def terminal_reward(outcome):
    '''float: -3 for a deadlock, the scaled negated weighted delay otherwise.'''
    if outcome.terminal_class == common.DEADLOCK:
        return common.DEADLOCK_PENALTY
    return -outcome.weighted_delay / common.REWARD_SCALE


def assign_step_targets(experiences, outcome, gamma, model, centralized):
    '''Build one-step targets for an episode's settled decisions.

    Args:
        experiences (list[:class:`Experience`]): Decisions whose rewards are settled.
        outcome (:class:`raildq.base.simcore.EpisodeOutcome`): The finished episode.
        gamma (float): The discount.
        model: Anything with ``forward``.
        centralized (bool): How decisions link to their successors.

    Returns:
        list[:class:`Experience`]: The same decisions.

    '''
    link_transitions(experiences, centralized)
    final = terminal_reward(outcome)

    for experience in experiences:
        if experience.terminal:
            experience.reward = final
        reward = 0.0 if experience.reward is None else experience.reward
        experience.y[experience.action] = build_q_target(
            reward, experience.next_state, experience.terminal, gamma, model,
            next_mask=experience.next_mask)

    return experiences


def _largest_remainder(total, weights):
    '''Split an integer total in proportion to weights, keeping the sum exact.'''
    names = list(weights)
    weight_sum = float(sum(weights.values()))
    exact = [total * weights[name] / weight_sum for name in names]
    shares = [int(value) for value in exact]
    leftover = total - sum(shares)
    order = sorted(range(len(names)), key=lambda index: (-(exact[index] - shares[index]), index))
    for index in order[:leftover]:
        shares[index] += 1
    return collections.OrderedDict(zip(names, shares))


def allocate(quotas, available):
    '''Decide how many items to draw from each store.

    A store that holds fewer items than its quota gives all it has. The
    shortfall goes to the other stores in proportion to their quotas, or
    to what they hold when their quotas are all 0.

    Args:
        quotas (dict[str, int]): Store -> wanted items.
        available (dict[str, int]): Store -> held items.

    Returns:
        collections.OrderedDict[str, int]: Store -> items to draw.

    '''
    take = collections.OrderedDict((name, min(quotas[name], available[name])) for name in quotas)
    shortfall = sum(quotas.values()) - sum(take.values())

    while shortfall > 0:
        spare = collections.OrderedDict((name, available[name] - take[name]) for name in take
                                        if available[name] > take[name])
        if not spare:
            break

        weights = collections.OrderedDict((name, quotas[name]) for name in spare)
        if not any(weights.values()):
            weights = spare

        moved = 0
        for name, share in _largest_remainder(shortfall, weights).items():
            extra = min(share, spare[name])
            take[name] += extra
            moved += extra

        if not moved:
            break
        shortfall -= moved

    return take


class TripartiteMemory(object):

    '''Best, normal and deadlock stores with one entry per (state, mask).

    A repeated (state, mask) lives only in the store of highest rank, best
    over normal over deadlock.

    Attributes:
        rule (int): The memory rule that sets the batch quotas.
        capacity (int or NoneType): Items per store before it is halved.

    '''

    def __init__(self, rule=12, capacity=None, seed=0):
        '''Create empty stores.

        Args:
            rule (:obj:`int`, optional): One of :data:`MEMORY_RULES`.
            capacity (:obj:`int`, optional):
                If given, a store reaching this size keeps a random half.
            seed (:obj:`int`, optional): Seeds sampling and truncation.

        Raises:
            ValueError: If the rule is unknown.

        '''
        super(TripartiteMemory, self).__init__()
        if rule not in MEMORY_RULES:
            raise ValueError('Rule: "{rule}" is unknown. Options were, "{opt}".'
                             ''.format(rule=rule, opt=sorted(MEMORY_RULES)))

        self.rule = rule
        self.capacity = capacity
        self.rng = numpy.random.RandomState(seed)
        self.stores = collections.OrderedDict(
            (name, collections.OrderedDict()) for name in STORES)
        self._index = dict()

    def __len__(self):
        '''int: The number of items across all stores.'''
        return sum(len(store) for store in self.stores.values())

    def sizes(self):
        '''collections.OrderedDict[str, int]: Items per store.'''
        return collections.OrderedDict((name, len(store)) for name, store in self.stores.items())

    def items(self):
        '''Yield (store, experience) pairs, store by store.'''
        for name, store in self.stores.items():
            for experience in store.values():
                yield name, experience

    def store(self, experience, reward_class):
        '''Add an experience to the store of its class.

        Args:
            experience (:class:`Experience`): The decision.
            reward_class (str): "best", "normal" or "deadlock".

        Returns:
            bool: If the experience was stored.

        '''
        if experience.mandatory:
            return False

        key = experience.key
        existing = self._index.get(key)
        if existing is not None:
            if RANK[existing] > RANK[reward_class]:
                return False

            if existing != reward_class:
                del self.stores[existing][key]

        self.stores[reward_class][key] = experience
        self._index[key] = reward_class
        self._truncate(reward_class)
        return True

    def _truncate(self, name):
        '''Keep a random half of a store that reached its capacity.'''
        store = self.stores[name]
        if self.capacity is None or len(store) < self.capacity:
            return

        keys = list(store)
        kept = set(self.rng.choice(len(keys), self.capacity // 2, replace=False).tolist())
        for position, key in enumerate(keys):
            if position not in kept:
                del store[key]
                del self._index[key]

        _LOGGER.debug('Store "%s" reduced to %s items.', name, len(store))

    def clear_best(self):
        '''Empty the best store.'''
        for key in self.stores[common.BEST]:
            del self._index[key]
        self.stores[common.BEST].clear()

    def sample(self, rule=None):
        '''Draw a batch following a memory rule.

        Args:
            rule (:obj:`int`, optional): Overrides the memory's rule.

        Returns:
            list[:class:`Experience`]: Up to the rule's quota sum, without repeats.

        '''
        quotas = collections.OrderedDict(zip(STORES, MEMORY_RULES[rule or self.rule]))
        counts = allocate(quotas, self.sizes())
        if counts != quotas:
            _LOGGER.debug('Rule %s short of items, batch reshaped from %s to %s.',
                          rule or self.rule, list(quotas.values()), list(counts.values()))

        batch = []
        for name, count in counts.items():
            if not count:
                continue
            values = list(self.stores[name].values())
            for position in self.rng.choice(len(values), count, replace=False):
                batch.append(values[position])

        return batch


class BoundedMemory(object):

    '''One store of recent experiences, halved at random when full.

    Attributes:
        capacity (int): Items before the store is halved.
        batch_size (int): Items per uniform batch.

    '''

    def __init__(self, capacity=SINGLE_CAPACITY, batch_size=32, seed=0):
        '''Create an empty store.'''
        super(BoundedMemory, self).__init__()
        self.capacity = capacity
        self.batch_size = batch_size
        self.rng = numpy.random.RandomState(seed)
        self._store = collections.OrderedDict()

    def __len__(self):
        '''int: The number of items held.'''
        return len(self._store)

    def sizes(self):
        '''collections.OrderedDict[str, int]: Items per class.'''
        counts = collections.OrderedDict((name, 0) for name in STORES)
        for name, _ in self._store.values():
            counts[name] += 1
        return counts

    def items(self):
        '''Yield (class, experience) pairs.'''
        for name, experience in self._store.values():
            yield name, experience

    def store(self, experience, reward_class):
        '''Add an experience, replacing an older one with the same key.'''
        if experience.mandatory:
            return False

        self._store[experience.key] = (reward_class, experience)

        if len(self._store) >= self.capacity:
            keys = list(self._store)
            kept = set(self.rng.choice(len(keys), self.capacity // 2, replace=False).tolist())
            for position, key in enumerate(keys):
                if position not in kept:
                    del self._store[key]
            _LOGGER.debug('Single store reduced to %s items.', len(self._store))

        return True

    def clear_best(self):
        '''Drop every item stored as best.'''
        for key in [key for key, (name, _) in self._store.items() if name == common.BEST]:
            del self._store[key]

    def sample(self, rule=None):  # pylint: disable=unused-argument
        '''list[:class:`Experience`]: A uniform batch without repeats.'''
        values = [experience for _, experience in self._store.values()]
        count = min(self.batch_size, len(values))
        if not count:
            return []
        return [values[position] for position in self.rng.choice(len(values), count, replace=False)]


def build_memory(mode, rule=12, batch_size=32, seed=0):
    '''Create the memory for a training mode.

    Args:
        mode (str): "tripartite", "bounded_single" or "bounded_triple".
        rule (:obj:`int`, optional): The memory rule of the three-store modes.
        batch_size (:obj:`int`, optional): The batch of "bounded_single".
        seed (:obj:`int`, optional): Seeds sampling and truncation.

    Raises:
        ValueError: If the mode is unknown.

    Returns:
        :class:`TripartiteMemory` or :class:`BoundedMemory`: The memory.

    '''
    if mode == TRIPARTITE:
        return TripartiteMemory(rule=rule, seed=seed)

    if mode == BOUNDED_TRIPLE:
        return TripartiteMemory(rule=rule, capacity=TRIPLE_CAPACITY, seed=seed)

    if mode == BOUNDED_SINGLE:
        return BoundedMemory(capacity=SINGLE_CAPACITY, batch_size=batch_size, seed=seed)

    raise ValueError('Memory mode: "{mode}" is unknown. Options were, "{opt}".'
                     ''.format(mode=mode, opt=MEMORY_MODES))


def store(memory, experience, reward_class):
    '''bool: Add an experience to any memory.'''
    return memory.store(experience, reward_class)


def sample(memory, rule=None):
    '''list[:class:`Experience`]: Draw a batch from any memory.'''
    return memory.sample(rule)
