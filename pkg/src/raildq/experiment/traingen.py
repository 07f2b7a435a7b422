#!/usr/bin/env python
# -*- coding: utf-8 -*-

'''Random dispatching instances and the named fixtures used across the package.

Random instances are drawn from a :class:`GenerationProfile`: how many
trains, which priorities and which lengths. Placement is uniform over the
resources a train can start from, and a placement that is already
deadlocked is thrown away and drawn again.

'''

# IMPORT STANDARD LIBRARIES
import os
import logging
import collections

# IMPORT THIRD-PARTY LIBRARIES
import numpy

# IMPORT LOCAL LIBRARIES
from ..base import loader
from ..base import deadlock
from ..base import simcore
from ..base import topology
from ..base import instance as instance_
from ..helper import common

# Instance documents are part of the generator's surface
instance_to_document = instance_.instance_to_document
instance_from_document = instance_.instance_from_document
load_instance = instance_.load_instance
save_instance = instance_.save_instance

_LOGGER = logging.getLogger(__name__)

MAX_ATTEMPTS = 1000
_PROFILE_KEYS = ('id', 'train_counts', 'priorities', 'lengths')


class GenerationError(RuntimeError):

    '''No valid placement was found for a drawn instance.'''


GenerationProfile = collections.namedtuple(
    'GenerationProfile', 'id train_counts priorities lengths')


def make_profile(id_, train_counts, priorities, lengths):
    '''Build and check a generation profile.

    Args:
        id_ (str): The profile name.
        train_counts (dict[int, float]): Train count -> probability.
        priorities (dict[int, float]): Priority -> probability.
        lengths (iterable[float]): Lengths drawn uniformly, in feet.

    Raises:
        ValueError: If a distribution does not sum to 1 or a value is out of range.

    Returns:
        :class:`GenerationProfile`: The profile.

    '''
    counts = collections.OrderedDict(sorted((int(key), float(value))
                                            for key, value in train_counts.items()))
    priorities = collections.OrderedDict(sorted((int(key), float(value))
                                                for key, value in priorities.items()))
    lengths = tuple(float(value) for value in lengths)

    for name, distribution in (('train_counts', counts), ('priorities', priorities)):
        if not distribution or any(value < 0 for value in distribution.values()):
            raise ValueError('Profile: "{id}" field "{name}" must hold non-negative '
                             'probabilities.'.format(id=id_, name=name))
        if abs(sum(distribution.values()) - 1.0) > 1e-9:
            raise ValueError('Profile: "{id}" field "{name}" sums to "{total}", not 1.'
                             ''.format(id=id_, name=name, total=sum(distribution.values())))

    if any(count < 1 for count in counts):
        raise ValueError('Profile: "{id}" field "train_counts" needs counts of at least 1.'
                         ''.format(id=id_))

    for priority in priorities:
        common.weight_of(priority)

    if not lengths or any(value <= 0 for value in lengths):
        raise ValueError('Profile: "{id}" field "lengths" must hold positive lengths.'
                         ''.format(id=id_))

    return GenerationProfile(str(id_), counts, priorities, lengths)


_PRIORITIES = {1: 0.05, 2: 0.15, 3: 0.23, 4: 0.27, 5: 0.30}

PROFILES = {
    'exp1': make_profile(
        'exp1',
        {4: 0.1, 5: 0.2, 6: 0.2, 7: 0.2, 8: 0.15, 9: 0.1, 10: 0.05},
        _PRIORITIES,
        range(4000, 6501, 500),
    ),
    'exp2': make_profile(
        'exp2',
        {4: 0.05, 5: 0.15, 6: 0.15, 7: 0.15, 8: 0.15, 9: 0.1, 10: 0.1, 11: 0.1, 12: 0.05},
        _PRIORITIES,
        range(4000, 8001, 500),
    ),
}


def profile_from_document(document):
    '''Build a custom profile from a parsed document.

    Raises:
        ValueError: If a key is unknown or missing.

    '''
    loader.check_keys(document, _PROFILE_KEYS, 'profile',
                      required=('train_counts', 'priorities', 'lengths'))
    return make_profile(document.get('id', 'custom'), document['train_counts'],
                        document['priorities'], document['lengths'])


def get_profile(name):
    '''Get a named profile, or load a custom one from a file.

    Args:
        name (str): "exp1", "exp2" or the path to a JSON or YAML profile.

    Raises:
        ValueError: If the name is neither a profile nor a readable file.

    Returns:
        :class:`GenerationProfile`: The profile.

    '''
    try:
        return PROFILES[name]
    except KeyError:
        pass

    if not os.path.isfile(name):
        raise ValueError('Profile: "{name}" is not a file or one of "{opt}".'
                         ''.format(name=name, opt=sorted(PROFILES)))

    return profile_from_document(loader.load_document(name))


def _draw(distribution, rng):
    '''Draw one key of a probability mapping.'''
    keys = list(distribution)
    return keys[rng.choice(len(keys), p=list(distribution.values()))]


def draw_train_count(profile, rng):
    '''int: How many trains the next instance gets.'''
    return _draw(profile.train_counts, rng)


def draw_priority(profile, rng):
    '''int: The priority of the next train.'''
    return _draw(profile.priorities, rng)


def draw_length(profile, rng):
    '''float: The length of the next train.'''
    return profile.lengths[rng.randint(len(profile.lengths))]


def far_destination(network, direction):
    '''str: The lowest-id resource of the terminal group a direction ends in.'''
    return sorted(network.terminals(direction), key=common.natural_key)[0]


def free_running_schedule(network, rt, train_id, origin, direction, destination, start=0.0):
    '''Time a train that is never held.

    The first event is the exit from the origin at start. Each later
    resource on the best route is exited its free running time later.

    Returns:
        collections.OrderedDict[str, float]: Resource -> scheduled exit time.

    '''
    view = deadlock.TrainView(train_id, direction, origin, destination, 0.0)

    schedule = collections.OrderedDict()
    clock = start
    for resource_id in topology.best_chain(network, rt, view, len(network)):
        clock += rt.seconds(train_id, resource_id)
        schedule[resource_id] = clock

    # Arriving in any member of the destination group is on time
    if schedule and destination not in schedule:
        schedule[destination] = clock

    return schedule


def _train_document(network, train_id, priority, length, direction, origin, destination,
                    start=0.0, **extra):
    '''dict: An instance train entry with a free-running schedule.'''
    rt = topology.RunningTimeTable(network, {train_id: common.SPEED_FT_S[priority]})
    schedule = free_running_schedule(network, rt, train_id, origin, direction, destination, start)

    info = collections.OrderedDict([
        ('id', train_id),
        ('priority', priority),
        ('length_ft', float(length)),
        ('direction', direction),
        ('origin', origin),
        ('destination', destination),
        ('schedule', [collections.OrderedDict([('resource', key), ('time_s', value)])
                      for key, value in schedule.items()]),
        ('weight', float(common.weight_of(priority))),
    ])
    info.update(extra)
    return info


def _origins(network, direction, destination, taken):
    '''list[str]: Where a train going one way may start.'''
    targets = topology.destination_group(network, destination)
    return [resource_id for resource_id in network.order
            if network.resources[resource_id].kind != common.STATION_ROUTE
            and resource_id not in taken
            and resource_id not in targets
            and network.reaches(resource_id, direction, targets)]


def _place(profile, network, rng, count, network_name):
    ''':class:`raildq.base.instance.Instance` or NoneType: One placement attempt.'''
    trains = []
    taken = set()

    for number in range(1, count + 1):
        direction = common.DIRECTIONS[rng.randint(2)]
        priority = draw_priority(profile, rng)
        length = draw_length(profile, rng)
        destination = far_destination(network, direction)

        options = _origins(network, direction, destination, taken)
        if not options:
            return None

        origin = options[rng.randint(len(options))]
        taken.add(origin)
        trains.append(_train_document(network, 'T{number}'.format(number=number), priority,
                                      length, direction, origin, destination))

    document = collections.OrderedDict([('trains', trains), ('start_time_s', 0.0)])
    if network_name is not None:
        document['network'] = network_name

    return instance_.instance_from_document(document)


def sample_instance(profile, network, rng, network_name=None):
    '''Draw one valid instance from a profile.

    The train count is drawn once. Placements that are already frozen or
    deadlocked are drawn again.

    Args:
        profile (:class:`GenerationProfile`): The distributions to draw from.
        network (:class:`raildq.base.topology.Network`): The line.
        rng (:class:`numpy.random.RandomState`): The random stream.
        network_name (:obj:`str`, optional): Written into the instance.

    Raises:
        GenerationError: If no valid placement was found in 1000 attempts.

    Returns:
        :class:`raildq.base.instance.Instance`: The instance.

    '''
    count = draw_train_count(profile, rng)

    for attempt in range(1, MAX_ATTEMPTS + 1):
        candidate = _place(profile, network, rng, count, network_name)
        if candidate is None:
            continue

        try:
            sim = simcore.SimState(network, candidate)
        except instance_.InstanceError as error:
            _LOGGER.debug('Attempt %s was invalid: %s', attempt, error)
            continue

        if not simcore.detect_deadlock(sim)[0]:
            if attempt > 100:
                _LOGGER.warning('Placing %s trains took %s attempts.', count, attempt)
            return candidate

    raise GenerationError('Could not place "{count}" trains on a "{size}" resource network in '
                          '"{attempts}" attempts.'.format(count=count, size=len(network),
                                                          attempts=MAX_ATTEMPTS))


def generate_instances(profile, network, count, seed=0, network_name=None):
    '''list[:class:`raildq.base.instance.Instance`]: Draw several instances from one seed.'''
    rng = numpy.random.RandomState(seed)
    return [sample_instance(profile, network, rng, network_name=network_name)
            for _ in range(count)]


def _line_document(stations, stop_length, track_length):
    '''dict: A straight line of two-member stations joined by single tracks.'''
    resources = []
    layers = []
    for index, station in enumerate(stations):
        if index:
            track = 't{index}'.format(index=index)
            resources.append({'id': track, 'kind': common.TRACK, 'length_ft': track_length})
            layers.append([track])

        layer = []
        for suffix in '12':
            resource_id = station + suffix
            resources.append({'id': resource_id, 'kind': common.STOPPING_POINT,
                              'length_ft': stop_length, 'parallel_group': station})
            layer.append(resource_id)
        layers.append(layer)

    return {'resources': resources, 'adjacency': _join(layers)}


def _join(layers):
    '''list[dict]: Left-to-right adjacency between every member of neighbouring layers.'''
    return [{'from': from_, 'to': to, 'direction': common.LEFT_TO_RIGHT}
            for left, right in zip(layers, layers[1:]) for from_ in left for to in right]


def _resource(id_, kind, length, group=None):
    '''dict: One network resource entry.'''
    info = {'id': id_, 'kind': kind, 'length_ft': length}
    if group is not None:
        info['parallel_group'] = group
    return info


def _figure_document():
    '''dict: The three-train example layout, listed tracks first.'''
    stop = common.STOPPING_POINT
    resources = [_resource('2', common.TRACK, 8000.0),
                 _resource('4', common.TRACK, 8000.0),
                 _resource('6', common.TRACK, 8000.0)]
    for group in '1357':
        for suffix in 'ab':
            resources.append(_resource(group + suffix, stop, 5000.0, group))

    layers = [['3a', '3b'], ['1a', '1b'], ['2'], ['4'], ['5a', '5b'], ['6'], ['7a', '7b']]
    return {'resources': resources, 'adjacency': _join(layers)}


def _single_track_document():
    '''dict: Two stopping points joined by one track.'''
    resources = [_resource('L', common.STOPPING_POINT, 2000.0),
                 _resource('t1', common.TRACK, 5000.0),
                 _resource('R', common.STOPPING_POINT, 2000.0)]
    return {'resources': resources, 'adjacency': _join([['L'], ['t1'], ['R']])}


def _passing_loop_document():
    '''dict: A single track with one two-member station in the middle.'''
    resources = [_resource('L', common.STOPPING_POINT, 2000.0),
                 _resource('t1', common.TRACK, 5000.0),
                 _resource('m1', common.STOPPING_POINT, 2000.0, 'm'),
                 _resource('m2', common.STOPPING_POINT, 2000.0, 'm'),
                 _resource('t2', common.TRACK, 5000.0),
                 _resource('R', common.STOPPING_POINT, 2000.0)]
    layers = [['L'], ['t1'], ['m1', 'm2'], ['t2'], ['R']]
    return {'resources': resources, 'adjacency': _join(layers)}


def _loop_end_document():
    '''dict: A two-member loop next to the left end, then two single tracks.'''
    resources = [_resource('L', common.STOPPING_POINT, 2000.0),
                 _resource('p1', common.STOPPING_POINT, 2000.0, 'p'),
                 _resource('p2', common.STOPPING_POINT, 2000.0, 'p'),
                 _resource('t1', common.TRACK, 5000.0),
                 _resource('t2', common.TRACK, 5000.0),
                 _resource('R', common.STOPPING_POINT, 2000.0)]
    layers = [['L'], ['p1', 'p2'], ['t1'], ['t2'], ['R']]
    return {'resources': resources, 'adjacency': _join(layers)}


_NETWORK_DOCUMENTS = {
    'desk-line': lambda: _line_document('abcde', 5000.0, 8000.0),
    'desk-line-long': lambda: _line_document('abcde', 9000.0, 12000.0),
    'figure': _figure_document,
    'single-track': _single_track_document,
    'passing-loop': _passing_loop_document,
    'loop-end': _loop_end_document,
    'synthetic': lambda: topology.serialize_network(topology.synthetic_line()),
}


def get_fixture_network_names():
    '''list[str]: Every fixture network name.'''
    return sorted(_NETWORK_DOCUMENTS)


@common.memoize
def fixture_network(name):
    '''Build a named fixture network.

    Args:
        name (str): One of :func:`get_fixture_network_names`.

    Raises:
        ValueError: If the name is unknown.

    Returns:
        :class:`raildq.base.topology.Network`: The network.

    '''
    try:
        build = _NETWORK_DOCUMENTS[name]
    except KeyError:
        raise ValueError('Network: "{name}" is not a fixture. Options were, "{opt}".'
                         ''.format(name=name, opt=get_fixture_network_names()))

    return topology.load_network(build())


_L2R = common.LEFT_TO_RIGHT
_R2L = common.RIGHT_TO_LEFT

# Instance name -> (network, [(id, priority, length, direction, origin, destination, extra)])
_FIXTURES = {
    'first-instance': ('desk-line', [
        ('T1', 3, 4000, _L2R, 'a1', 'e1', {}),
        ('T2', 3, 4000, _R2L, 'e1', 'a1', {}),
        ('T3', 3, 4000, _R2L, 'e2', 'a1', {}),
    ]),
    'second-instance': ('desk-line', [
        ('T1', 5, 4000, _L2R, 'a1', 'e1', {}),
        ('T2', 5, 4000, _L2R, 'a2', 'e1', {}),
        ('T3', 2, 4000, _R2L, 'e1', 'a1', {}),
    ]),
    'reduced': ('desk-line', [
        ('T1', 3, 4000, _L2R, 'a1', 'e1', {}),
        ('T2', 3, 4000, _R2L, 'e1', 'a1', {}),
    ]),
    'overlength': ('desk-line-long', [
        ('T1', 4, 8500, _L2R, 'a1', 'e1', {}),
        ('T2', 2, 4000, _R2L, 'e1', 'a1', {}),
    ]),
    'single-train': ('desk-line', [
        ('T1', 3, 4000, _L2R, 'a1', 'e1', {}),
    ]),
    'figure': ('figure', [
        ('blue', 3, 4000, _L2R, '2', '7a', {'state_value': 3.0}),
        ('red', 2, 4000, _L2R, '4', '7a', {'state_value': 9.0, 'history': ['1a', '2']}),
        ('green', 1, 4000, _R2L, '5b', '3a', {'state_value': 10.0}),
    ]),
    'head-on': ('loop-end', [
        ('A', 3, 1000, _L2R, 'L', 'R', {}),
        ('B', 3, 1000, _R2L, 'R', 'L', {}),
    ]),
}


def get_fixture_names():
    '''list[str]: Every fixture instance name.'''
    return sorted(_FIXTURES)


def fixture(name):
    '''Build a named fixture instance.

    The instance records the fixture network it runs on, see :func:`fixture_network`.

    Args:
        name (str): One of :func:`get_fixture_names`.

    Raises:
        ValueError: If the name is unknown.

    Returns:
        :class:`raildq.base.instance.Instance`: The instance.

    '''
    try:
        network_name, trains = _FIXTURES[name]
    except KeyError:
        raise ValueError('Instance: "{name}" is not a fixture. Options were, "{opt}".'
                         ''.format(name=name, opt=get_fixture_names()))

    network = fixture_network(network_name)
    documents = [_train_document(network, train_id, priority, length, direction, origin,
                                 destination, **extra)
                 for train_id, priority, length, direction, origin, destination, extra in trains]

    return instance_.instance_from_document(collections.OrderedDict([
        ('trains', documents),
        ('start_time_s', 0.0),
        ('network', network_name),
    ]))


def resolve_instance(value):
    '''Get an instance from a fixture name or an instance file.

    Raises:
        ValueError: If the value is neither.

    '''
    if value in _FIXTURES:
        return fixture(value)

    if os.path.isfile(value):
        return load_instance(value)

    raise ValueError('Instance: "{value}" is not a file or one of "{opt}".'
                     ''.format(value=value, opt=get_fixture_names()))


def resolve_network(value):
    '''Get a network from a fixture name or a network file.

    Raises:
        ValueError: If the value is neither.

    '''
    if value in _NETWORK_DOCUMENTS:
        return fixture_network(value)

    if os.path.isfile(value):
        return topology.load_network_file(value)

    raise ValueError('Network: "{value}" is not a file or one of "{opt}".'
                     ''.format(value=value, opt=get_fixture_network_names()))


def network_for(instance, default=None):
    '''Get the network an instance runs on.

    Args:
        instance (:class:`raildq.base.instance.Instance`): The instance.
        default (:class:`raildq.base.topology.Network`, optional): Used when the instance names none.

    Raises:
        ValueError: If there is no network to use.

    '''
    if default is not None:
        return default

    if instance.network is None:
        raise ValueError('Instance: "{instance!r}" names no network and none was given.'
                         ''.format(instance=instance))

    if instance.network in _NETWORK_DOCUMENTS:
        return fixture_network(instance.network)

    return topology.load_network_file(instance.network)
