#!/usr/bin/env python
# -*- coding: utf-8 -*-

'''A deterministic, event-driven dispatch simulator for a single-track line.

The simulator moves one train at a time. :func:`next_decision` pops the
train with the earliest event and either moves it automatically or hands
the decision back to the caller, who answers with :func:`apply_action`.

Actions are numbered the same way everywhere in the package:

- 0: hold the train where it is
- 1: go to the best next resource
- 2, 3, 4: go to the first, second or third reachable resource

'''

# IMPORT STANDARD LIBRARIES
import logging
import collections

# IMPORT LOCAL LIBRARIES
from . import deadlock
from . import instance as instance_
from . import topology
from ..helper import common

_LOGGER = logging.getLogger(__name__)

HOLD = 0
GO_BEST = 1

AGENT = 'agent'
AUTO = 'auto'
FORCED = 'forced'

DECISION = 'decision'
AUTO_APPLIED = 'auto_applied'
TERMINAL = 'terminal'

# Configurations at most this big are checked for deadlock by exhaustive search
EXACT_SEARCH_TRAINS = 3
EXACT_SEARCH_RESOURCES = 8

HoldStreak = collections.namedtuple('HoldStreak', 'resource fingerprint count')
StepRecord = collections.namedtuple(
    'StepRecord', 'episode step clock train action resource kind fingerprint')
Decision = collections.namedtuple('Decision', 'kind train mask action outcome')
EpisodeOutcome = collections.namedtuple(
    'EpisodeOutcome',
    'terminal_class weighted_delay per_train_delay deadlocked_trains step_log clock')

_EMPTY_STREAK = HoldStreak(None, None, 0)


class ContractViolation(RuntimeError):

    '''The caller asked the simulator to do something the rules forbid.

    Attributes:
        step_log (list[:class:`StepRecord`]): Every step applied before the violation.

    '''

    def __init__(self, message, step_log=()):
        '''Keep the message and a copy of the step log.'''
        super(ContractViolation, self).__init__(message)
        self.step_log = list(step_log)


class Train(object):

    '''The moving state of one train during an episode.

    Attributes:
        occupation (list[str]): Occupied resources, head first.
        path (list[str]): Every resource the head has entered, oldest first.
        hold_streak (:class:`HoldStreak`): Consecutive agent holds in one state.
        next_event_time (float): When the train is next looked at.
        delay (float): Seconds late at the destination, once arrived.
        arrived (bool): If the train has left the line at its destination.

    '''

    def __init__(self, spec, start_time):
        '''Start a train from its instance description.

        Args:
            spec (:class:`raildq.base.instance.TrainSpec`): The train to start.
            start_time (float): The snapshot time of the instance.

        '''
        super(Train, self).__init__()
        self.spec = spec
        self.occupation = list(spec.occupation)
        self.path = list(spec.history) + list(reversed(spec.occupation))
        self.hold_streak = _EMPTY_STREAK
        self.next_event_time = start_time + spec.ready
        self.delay = 0.0
        self.arrived = False
        self.arrival_time = None

    def __repr__(self):
        '''str: A short description of where the train is.'''
        return '{name}({id!r}, head={head!r}, next={time})'.format(
            name=self.__class__.__name__, id=self.id, head=self.head, time=self.next_event_time)

    @property
    def id(self):  # pylint: disable=invalid-name
        '''str: The train id.'''
        return self.spec.id

    @property
    def priority(self):
        '''int: The priority class, 1 being the most important.'''
        return self.spec.priority

    @property
    def length(self):
        '''float: The train length, in feet.'''
        return self.spec.length

    @property
    def direction(self):
        '''str: The travel direction.'''
        return self.spec.direction

    @property
    def destination(self):
        '''str: Where the train leaves the line.'''
        return self.spec.destination

    @property
    def weight(self):
        '''float: The delay weight of the train.'''
        return self.spec.weight

    @property
    def head(self):
        '''str or NoneType: The resource holding the front of the train.'''
        if not self.occupation:
            return None
        return self.occupation[0]

    def copy(self):
        ''':class:`Train`: An independent copy of the moving state.'''
        other = Train.__new__(Train)
        other.__dict__.update(self.__dict__)
        other.occupation = list(self.occupation)
        other.path = list(self.path)
        return other


class SimState(object):

    '''Everything that changes while an episode runs.

    Attributes:
        network (:class:`raildq.base.topology.Network`): The line.
        instance (:class:`raildq.base.instance.Instance`): The starting snapshot.
        rt (:class:`raildq.base.topology.RunningTimeTable`): Free running times.
        trains (collections.OrderedDict[str, :class:`Train`]): Trains, in file order.
        clock (float): The current time, in seconds.
        time_horizon (float): How long the episode may run, in seconds.
        lookahead (tuple[int, int]):
            The forward and backward window used by the automatic-move rule.
        headway_ledger (dict[tuple[str, str], float]):
            (track, direction) -> time of the last entry.

    '''

    def __init__(self, network, instance, seed=0, lookahead=(5, common.BACKWARD_COUNT),
                 time_horizon=None, episode=0):
        '''Validate the instance against the network and place its trains.

        Args:
            network (:class:`raildq.base.topology.Network`): The line.
            instance (:class:`raildq.base.instance.Instance`): The snapshot to start from.
            seed (:obj:`int`, optional): Kept for bookkeeping. The simulator draws nothing.
            lookahead (:obj:`tuple[int, int]`, optional):
                Forward and backward resources that must be empty for a
                train to move without a decision.
            time_horizon (:obj:`float`, optional):
                Overrides the horizon chosen from the train lengths.
            episode (:obj:`int`, optional): The episode number written to the step log.

        '''
        super(SimState, self).__init__()
        instance_.validate_instance(network, instance)

        self.network = network
        self.instance = instance
        self.rt = topology.RunningTimeTable.from_instance(network, instance)
        self.seed = seed
        self.episode = episode
        self.lookahead = tuple(lookahead)
        self.start_time = instance.start_time
        self.clock = instance.start_time
        self.time_horizon = horizon(instance) if time_horizon is None else float(time_horizon)
        self.trains = collections.OrderedDict(
            (spec.id, Train(spec, instance.start_time)) for spec in instance.trains)
        self.headway_ledger = dict()
        self.track_entries = dict()
        self.blocked = dict()
        self.failures = collections.defaultdict(list)
        self.state_history = collections.defaultdict(list)
        self.step_log = []
        self.outcome = None

        for train in self.trains.values():
            for resource_id in reversed(train.occupation):
                if network.resources[resource_id].kind == common.TRACK:
                    self.track_entries.setdefault(resource_id, []).append(train.id)

        for status in instance.resource_status:
            if status.status == common.BLOCKED_STATUS:
                self.blocked[status.resource] = status.train
            else:
                self.failures[status.resource].append((status.start, status.end))

    @property
    def horizon_end(self):
        '''float: The last time an event may happen.'''
        return self.start_time + self.time_horizon

    def active_trains(self):
        '''list[:class:`Train`]: The trains that have not arrived, in file order.'''
        return [train for train in self.trains.values() if not train.arrived]

    def event_queue(self):
        '''list[:class:`Train`]: The trains still running, earliest event first.'''
        return sorted(self.active_trains(),
                      key=lambda train: (train.next_event_time, common.natural_key(train.id)))

    def fork(self):
        '''Copy the moving state, sharing the network, instance and running times.

        The copy starts with an empty step log and no state history.

        Returns:
            :class:`SimState`: The copy.

        '''
        other = SimState.__new__(SimState)
        other.__dict__.update(self.__dict__)
        other.trains = collections.OrderedDict(
            (key, train.copy()) for key, train in self.trains.items())
        other.headway_ledger = dict(self.headway_ledger)
        other.track_entries = {key: list(value) for key, value in self.track_entries.items()}
        other.blocked = dict(self.blocked)
        other.state_history = collections.defaultdict(list)
        other.step_log = []
        return other


def horizon(instance):
    '''float: 7200 s, or 14400 s when any train is longer than 8000 ft.'''
    if instance.max_length > common.OVERLENGTH_FT:
        return common.LONG_HORIZON_S
    return common.HORIZON_S


def _get_train(sim, train):
    '''Accept a train or a train id and return the simulator's train.'''
    train_id = getattr(train, 'id', train)
    try:
        return sim.trains[train_id]
    except KeyError:
        raise ContractViolation('Train: "{train}" is not part of this episode.'
                                ''.format(train=train_id), sim.step_log)


def occupants(sim, resource_id):
    '''list[:class:`Train`]: The running trains with any part on a resource.'''
    return [train for train in sim.trains.values()
            if not train.arrived and resource_id in train.occupation]


def failure_end(sim, resource_id, clock=None):
    '''float or NoneType: The end of the failure covering the clock, if any.'''
    if clock is None:
        clock = sim.clock

    for start, end in sim.failures.get(resource_id, ()):
        if start <= clock < end:
            return end
    return None


def blocked_for(sim, resource_id, train):
    '''bool: If the resource is reserved for another train that is still running.'''
    holder = sim.blocked.get(resource_id)
    if holder is None or holder == train.id:
        return False
    return not sim.trains[holder].arrived if holder in sim.trains else True


def can_enter(sim, train, resource_id, static=False):
    '''Check if a train may put its head into a resource right now.

    Args:
        sim (:class:`SimState`): The episode.
        train (:class:`Train`): The train that wants to move.
        resource_id (str): The resource it wants.
        static (:obj:`bool`, optional):
            If True, failure windows are treated as passable. Deadlock
            searches use this because failures always end.

    Returns:
        bool: If the move respects every capacity rule.

    '''
    network = sim.network
    if not static and failure_end(sim, resource_id) is not None:
        return False

    if blocked_for(sim, resource_id, train):
        return False

    resource = network.resources[resource_id]
    others = [other for other in occupants(sim, resource_id) if other is not train]

    if resource.kind == common.TRACK:
        if not others:
            return True
        if any(other.direction != train.direction for other in others):
            return False
        return train.length <= resource.length

    if others:
        return False

    if resource.kind == common.STATION_ROUTE and network.route_exclusion.get(resource.parallel_group):
        for sibling in network.group_members(resource_id):
            if sibling != resource_id and any(
                    other is not train for other in occupants(sim, sibling)):
                return False

    return True


def held_by_leader(sim, train):
    '''Find the train that keeps this one from leaving its track.

    A train cannot overtake inside a track, so it waits while a train that
    entered the same track earlier still has its head there.

    Returns:
        :class:`Train` or NoneType: The leader, if there is one.

    '''
    head = train.head
    entries = sim.track_entries.get(head)
    if not entries or train.id not in entries:
        return None

    for other_id in entries[:entries.index(train.id)]:
        other = sim.trains[other_id]
        if not other.arrived and other.head == head:
            return other
    return None


def route_options(sim, train):
    '''Get the resource behind each go action.

    Returns:
        list[str or NoneType]: Four entries, for actions 1 to 4. Missing options are None.

    '''
    options = topology.ranked_successors(
        sim.network, sim.rt, train.id, train.head, train.direction, train.destination)
    options = options[:1 + common.REACHABLE_COUNT]
    return options + [None] * (1 + common.REACHABLE_COUNT - len(options))


def legal_actions(sim, train, static=False):
    '''Check which of the five actions a train may take.

    Args:
        sim (:class:`SimState`): The episode.
        train (:class:`Train` or str): The train to check.
        static (:obj:`bool`, optional): If True, failure windows count as passable.

    Returns:
        tuple[bool]: Five flags. Holding is always legal.

    '''
    train = _get_train(sim, train)
    if train.arrived:
        return (True, False, False, False, False)

    leader = held_by_leader(sim, train)
    allowed = [True]
    for option in route_options(sim, train):
        allowed.append(option is not None and leader is None
                       and can_enter(sim, train, option, static=static))

    return tuple(allowed)


def backward_resources(train, count):
    '''list[str]: Up to count resources crossed before the head, nearest last.'''
    if count <= 0:
        return []
    return train.path[-1 - count:-1]


def _window_clear(sim, train):
    '''bool: If nothing else stands in the train's forward and backward window.'''
    forward, backward = sim.lookahead
    window = topology.best_chain(sim.network, sim.rt, train, forward)
    window.extend(backward_resources(train, backward))

    for resource_id in window:
        if any(other is not train for other in occupants(sim, resource_id)):
            return False
        if blocked_for(sim, resource_id, train) or failure_end(sim, resource_id) is not None:
            return False

    return True


def _release(sim, train, resource_id):
    '''Drop one resource from a train's occupation.'''
    train.occupation.remove(resource_id)
    entries = sim.track_entries.get(resource_id)
    if entries and train.id in entries:
        entries.remove(train.id)


def _enter(sim, train, resource_id):
    '''Move a train's head into a resource, without checking the rules.

    Returns:
        float: The time the train's head enters the resource.

    '''
    network = sim.network
    resource = network.resources[resource_id]
    entry = sim.clock

    if resource.kind == common.TRACK:
        key = (resource_id, train.direction)
        last = sim.headway_ledger.get(key)
        if last is not None:
            entry = max(entry, last + network.headway)
        sim.headway_ledger[key] = entry
        sim.track_entries.setdefault(resource_id, []).append(train.id)

    if sim.blocked.get(resource_id) == train.id:
        del sim.blocked[resource_id]

    train.occupation.insert(0, resource_id)
    train.path.append(resource_id)
    finish = entry + sim.rt.seconds(train.id, resource_id)
    train.next_event_time = finish

    if resource_id in topology.destination_group(network, train.destination):
        train.arrived = True
        train.arrival_time = finish
        train.delay = max(0.0, finish - instance_.scheduled_time(train.spec, train.destination))
        for occupied in list(train.occupation):
            _release(sim, train, occupied)
        return entry

    lengths = [network.resources[item].length for item in train.occupation]
    while len(train.occupation) > 1 and sum(lengths[:-1]) >= train.length:
        lengths.pop()
        _release(sim, train, train.occupation[-1])

    return entry


def _availability(sim, train):
    '''Find when the best resource is known to become free.

    Returns:
        float or NoneType: The time, or None if it cannot be known.

    '''
    best = route_options(sim, train)[0]
    if best is None:
        return None

    times = []
    leader = held_by_leader(sim, train)
    if leader is not None:
        times.append(leader.next_event_time)

    end = failure_end(sim, best)
    if end is not None:
        times.append(end)

    if blocked_for(sim, best, train):
        return None

    for other in occupants(sim, best):
        if other is not train:
            times.append(other.next_event_time)

    if not times or min(times) <= sim.clock:
        return None

    return max(times)


def _hold(sim, train):
    '''Reschedule a held train.'''
    available = _availability(sim, train)
    if available is not None:
        train.next_event_time = available
        return

    others = [other.next_event_time for other in sim.active_trains() if other is not train]
    upcoming = min(others) if others else sim.clock
    train.next_event_time = max(upcoming, sim.clock) + common.EPSILON_TIME_S


def _log_step(sim, train, action, resource_id, kind, fingerprint):
    '''Append one record to the step log.'''
    sim.step_log.append(StepRecord(
        episode=sim.episode,
        step=len(sim.step_log),
        clock=sim.clock,
        train=train.id,
        action=action,
        resource=resource_id,
        kind=kind,
        fingerprint=fingerprint,
    ))


def apply_action(sim, train, action, fingerprint=None, kind=AGENT):
    '''Apply a hold or go action to the train that is waiting for a decision.

    Args:
        sim (:class:`SimState`): The episode.
        train (:class:`Train` or str): The train to move.
        action (int): 0 holds, 1 goes best, 2 to 4 go to a reachable resource.
        fingerprint (:obj:`bytes`, optional):
            The encoded state the decision was taken in. Holds with a
            fingerprint count toward the forced-move rule.
        kind (:obj:`str`, optional): "agent", "auto" or "forced", for the step log.

    Raises:
        ContractViolation: If the action is masked out or the train has arrived.

    Returns:
        float: Seconds until the train's next event.

    '''
    train = _get_train(sim, train)
    if train.arrived:
        raise ContractViolation('Train: "{train}" has already arrived.'.format(train=train.id),
                                sim.step_log)

    allowed = legal_actions(sim, train)
    if action not in range(common.ACTION_COUNT) or not allowed[action]:
        raise ContractViolation(
            'Action: "{action}" is not allowed for train "{train}" at "{head}". Mask was "{mask}".'
            ''.format(action=action, train=train.id, head=train.head, mask=allowed),
            sim.step_log)

    if action == HOLD:
        resource_id = train.head
        if fingerprint is not None:
            streak = train.hold_streak
            if streak.resource == resource_id and streak.fingerprint == fingerprint:
                count = min(common.MAX_HOLD_STREAK, streak.count + 1)
            else:
                count = 1
            train.hold_streak = HoldStreak(resource_id, fingerprint, count)

        _log_step(sim, train, action, resource_id, kind, fingerprint)
        _hold(sim, train)
        _LOGGER.debug('t=%s train "%s" holds at "%s" until %s (%s).',
                      sim.clock, train.id, resource_id, train.next_event_time, kind)
        return train.next_event_time - sim.clock

    resource_id = route_options(sim, train)[action - 1]
    _log_step(sim, train, action, resource_id, kind, fingerprint)
    _enter(sim, train, resource_id)
    train.hold_streak = _EMPTY_STREAK
    _LOGGER.debug('t=%s train "%s" enters "%s" (%s).', sim.clock, train.id, resource_id, kind)

    return train.next_event_time - sim.clock


def forced_move_check(sim, train, fingerprint):
    '''Check if a train has held long enough in one state to be forced to move.

    Args:
        sim (:class:`SimState`): The episode.
        train (:class:`Train` or str): The train waiting for a decision.
        fingerprint (bytes): The encoded state of the pending decision.

    Returns:
        bool: If the agent's choice must be replaced by :func:`forced_action`.

    '''
    train = _get_train(sim, train)
    streak = train.hold_streak
    if streak.count < common.MAX_HOLD_STREAK:
        return False

    if streak.resource != train.head or streak.fingerprint != fingerprint:
        return False

    return any(legal_actions(sim, train)[GO_BEST:])


def forced_action(sim, train):
    '''int: The best go action that is currently legal.'''
    allowed = legal_actions(sim, train)
    for action in range(GO_BEST, common.ACTION_COUNT):
        if allowed[action]:
            return action

    raise ContractViolation('Train: "{train}" has no legal go action.'
                            ''.format(train=getattr(train, 'id', train)), sim.step_log)


def train_delay(sim, train):
    '''float: Seconds late at the destination, or late so far for a running train.'''
    if train.arrived:
        return train.delay

    scheduled = instance_.scheduled_time(train.spec, train.destination)
    return max(0.0, min(sim.clock, sim.horizon_end) - scheduled)


def weighted_delay(obj):
    '''Sum the weighted delay of an episode.

    Args:
        obj (:class:`EpisodeOutcome` or :class:`SimState`):
            A finished episode, or a running one.

    Returns:
        float or NoneType:
            The sum of weight times delay. A deadlocked outcome has no
            weighted delay and returns None.

    '''
    if isinstance(obj, EpisodeOutcome):
        return obj.weighted_delay

    return float(sum(train.weight * train_delay(obj, train) for train in obj.trains.values()))


def _finish(sim, terminal_class, deadlocked=frozenset()):
    '''Close the episode and build its outcome.'''
    if terminal_class == common.HORIZON_EXCEEDED:
        sim.clock = max(sim.clock, sim.horizon_end)

    per_train = collections.OrderedDict(
        (train.id, train_delay(sim, train)) for train in sim.trains.values())

    if terminal_class == common.DEADLOCK:
        total = None
    else:
        total = weighted_delay(sim)

    sim.outcome = EpisodeOutcome(
        terminal_class=terminal_class,
        weighted_delay=total,
        per_train_delay=per_train,
        deadlocked_trains=frozenset(deadlocked),
        step_log=tuple(sim.step_log),
        clock=sim.clock,
    )
    _LOGGER.debug('Episode %s ended with "%s" at t=%s.', sim.episode, terminal_class, sim.clock)
    return Decision(TERMINAL, None, None, None, sim.outcome)


def _search_key(sim):
    '''tuple: Identify a configuration by positions and track order only.'''
    trains = tuple((train.id, tuple(train.occupation), train.arrived)
                   for train in sim.trains.values())
    entries = tuple(sorted((key, tuple(value)) for key, value in sim.track_entries.items() if value))
    return trains + entries


def _search_moves(sim):
    '''Yield every configuration one untimed move away.'''
    for train in sim.active_trains():
        allowed = legal_actions(sim, train, static=True)
        options = route_options(sim, train)
        for action in range(GO_BEST, common.ACTION_COUNT):
            if not allowed[action]:
                continue

            child = sim.fork()
            _enter(child, child.trains[train.id], options[action - 1])
            yield child


def completion_exists(sim):
    '''bool: If some sequence of moves lets every running train arrive.'''
    return deadlock.completion_exists(
        sim.fork(),
        expand=_search_moves,
        is_complete=lambda node: not node.active_trains(),
        key=_search_key,
    )


def detect_deadlock(sim):
    '''Check if the running trains can still all reach their destinations.

    Three checks run in order. A configuration where no train can move at
    all is a deadlock. Small configurations are then settled by searching
    every move sequence. Larger ones fall back to the flow test between
    opposing trains.

    Args:
        sim (:class:`SimState`): The episode.

    Returns:
        tuple[bool, frozenset[str]]: If there is a deadlock, and the trains caught in it.

    '''
    active = sim.active_trains()
    if len(active) < 2:
        return (False, frozenset())

    if not any(any(legal_actions(sim, train, static=True)[GO_BEST:]) for train in active):
        return (True, frozenset(train.id for train in active))

    if len(active) <= EXACT_SEARCH_TRAINS and len(sim.network) <= EXACT_SEARCH_RESOURCES:
        if completion_exists(sim):
            return (False, frozenset())
        return (True, frozenset(train.id for train in active))

    views = [deadlock.TrainView(train.id, train.direction, train.head, train.destination,
                                train.length, tuple(train.occupation)) for train in active]
    flagged = deadlock.flow_conflicts(sim.network, views)
    return (bool(flagged), flagged)


def next_decision(sim):
    '''Advance the episode to the next event.

    The earliest train is popped (ties go to the lowest train id). If it
    cannot move it holds; if it is not at a control point, or nothing stands
    in its window, it goes to its best resource. Otherwise the caller must
    decide.

    Args:
        sim (:class:`SimState`): The episode.

    Returns:
        :class:`Decision`:
            kind "decision" with the train and its mask, "auto_applied"
            with the train and the action taken, or "terminal" with the
            episode outcome.

    '''
    if sim.outcome is not None:
        return Decision(TERMINAL, None, None, None, sim.outcome)

    queue = sim.event_queue()
    if not queue:
        return _finish(sim, common.ALL_ARRIVED)

    train = queue[0]
    if train.next_event_time > sim.horizon_end:
        return _finish(sim, common.HORIZON_EXCEEDED)

    sim.clock = max(sim.clock, train.next_event_time)

    stuck, trains = detect_deadlock(sim)
    if stuck:
        return _finish(sim, common.DEADLOCK, trains)

    allowed = legal_actions(sim, train)

    if not any(allowed[GO_BEST:]):
        apply_action(sim, train, HOLD, kind=AUTO)
        return Decision(AUTO_APPLIED, train, allowed, HOLD, None)

    if not sim.network.is_control_point(train.head):
        action = GO_BEST if allowed[GO_BEST] else HOLD
        apply_action(sim, train, action, kind=AUTO)
        return Decision(AUTO_APPLIED, train, allowed, action, None)

    if allowed[GO_BEST] and _window_clear(sim, train):
        apply_action(sim, train, GO_BEST, kind=AUTO)
        return Decision(AUTO_APPLIED, train, allowed, GO_BEST, None)

    return Decision(DECISION, train, allowed, None, None)
