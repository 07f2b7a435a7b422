#!/usr/bin/env python
# -*- coding: utf-8 -*-

'''The static railway model: resources, how they connect and how long they take.

A :class:`Network` is immutable once it is loaded. Episodes running side by
side can share one, along with its :class:`RunningTimeTable`.

'''

# IMPORT STANDARD LIBRARIES
import math
import logging
import collections

# IMPORT THIRD-PARTY LIBRARIES
import six

# IMPORT LOCAL LIBRARIES
from . import loader
from ..helper import common
from ..helper import dict_classes

_LOGGER = logging.getLogger(__name__)

_NETWORK_KEYS = ('resources', 'adjacency', 'control_points', 'headway_s', 'route_exclusion')
_RESOURCE_KEYS = ('id', 'kind', 'length_ft', 'parallel_group')
_ADJACENCY_KEYS = ('from', 'to', 'direction')


class NetworkError(ValueError):

    '''A network document broke the schema or one of the network invariants.'''


Resource = collections.namedtuple('Resource', 'id kind length parallel_group')


class Network(object):

    '''A single-track line made of stopping points, tracks and station routes.

    Attributes:
        resources (:class:`raildq.helper.dict_classes.ReadOnlyDict`):
            Every resource, keyed by id, in file order.
        order (tuple[str]): The resource ids in file order.
        control_points (frozenset[str]): Where decisions are requested.
        headway (float): Seconds between same-direction entries onto a track.
        route_exclusion (dict[str, bool]):
            Station groups whose routes disable each other while occupied.
        parallel_groups (:class:`raildq.helper.dict_classes.ReadOnlyDict`):
            Group id -> member ids.

    '''

    def __init__(self, resources, successors, control_points, headway, route_exclusion):
        '''Build the network from already-validated parts.

        Args:
            resources (list[:class:`Resource`]): The resources, in file order.
            successors (dict[tuple[str, str], list[str]]):
                (resource id, direction) -> ordered successor ids.
            control_points (iterable[str]):
                Decision boundaries. If empty, every resource is one.
            headway (float): The line headway, in seconds.
            route_exclusion (dict[str, bool]): Station groups with exclusive routes.

        '''
        super(Network, self).__init__()
        self.resources = dict_classes.ReadOnlyDict(
            collections.OrderedDict((resource.id, resource) for resource in resources),
            name='resources')
        self.order = tuple(resource.id for resource in resources)
        self.index = {resource_id: index for index, resource_id in enumerate(self.order)}
        self.headway = float(headway)
        self.route_exclusion = dict(route_exclusion)
        self._explicit_control_points = frozenset(control_points)
        self.control_points = self._explicit_control_points or frozenset(self.order)
        self._successors = {key: tuple(value) for key, value in successors.items()}

        groups = collections.OrderedDict()
        for resource in resources:
            if resource.parallel_group is not None:
                groups.setdefault(resource.parallel_group, []).append(resource.id)
        self.parallel_groups = dict_classes.ReadOnlyDict(
            collections.OrderedDict((key, tuple(value)) for key, value in groups.items()),
            name='parallel groups')

        self.positions = _get_positions(self)
        layers = collections.defaultdict(list)
        for resource_id in self.order:
            layers[self.positions[resource_id]].append(resource_id)
        self._layers = {key: tuple(value) for key, value in layers.items()}
        self._reach_cache = dict()

    def __len__(self):
        '''int: The number of resources.'''
        return len(self.order)

    def __repr__(self):
        '''str: A short description of the line.'''
        return '{name}({count} resources, {groups} parallel groups)'.format(
            name=self.__class__.__name__, count=len(self), groups=len(self.parallel_groups))

    @property
    def explicit_control_points(self):
        '''frozenset[str]: The control points the document listed, possibly none.'''
        return self._explicit_control_points

    def successors(self, resource_id, direction):
        '''tuple[str]: The ordered successors of a resource in a direction.'''
        return self._successors.get((resource_id, direction), tuple())

    def group_members(self, resource_id):
        '''tuple[str]: Every member of the resource's parallel group, itself included.'''
        group = self.resources[resource_id].parallel_group
        if group is None:
            return (resource_id, )
        return self.parallel_groups[group]

    def is_control_point(self, resource_id):
        '''bool: If a train leaving this resource asks for a decision.'''
        return resource_id in self.control_points

    def terminals(self, direction):
        '''tuple[str]: Resources with no successor in the given direction.'''
        return tuple(resource_id for resource_id in self.order
                     if not self.successors(resource_id, direction))

    def members_at(self, position):
        '''tuple[str]: Every resource sharing one line position.'''
        return self._layers.get(position, tuple())

    def reaches(self, resource_id, direction, targets):
        '''Check if any target can be reached from a resource.

        Args:
            resource_id (str): Where the search starts. It counts as reached.
            direction (str): The travel direction.
            targets (frozenset[str]): The resources to look for.

        Returns:
            bool: If a path exists.

        '''
        key = (resource_id, direction, targets)
        try:
            return self._reach_cache[key]
        except KeyError:
            pass

        seen = set()
        pending = [resource_id]
        found = False
        while pending:
            current = pending.pop()
            if current in targets:
                found = True
                break

            if current in seen:
                continue

            seen.add(current)
            pending.extend(self.successors(current, direction))

        self._reach_cache[key] = found
        return found


class RunningTimeTable(object):

    '''The free running time of every (train, resource) pair, in seconds.

    Explicit entries win. Anything else falls back to the resource length
    divided by the speed of the train's priority class.

    '''

    def __init__(self, network, speeds, entries=None):
        '''Keep the network, each train's speed and the explicit entries.

        Args:
            network (:class:`Network`): The line the trains run on.
            speeds (dict[str, float]): Train id -> feet per second.
            entries (:obj:`dict[tuple[str, str], float]`, optional):
                (train id, resource id) -> seconds.

        Raises:
            ValueError: If an entry is not strictly positive and finite.

        '''
        super(RunningTimeTable, self).__init__()
        self.network = network
        self.speeds = dict(speeds)
        self.entries = dict_classes.ReadOnlyDict(dict(entries or {}), name='running times')

        for (train, resource), seconds in six.iteritems(self.entries):
            if not _is_positive(seconds):
                raise ValueError('Running time for train "{train}" on resource "{resource}" '
                                 'must be positive and finite, got "{seconds}".'
                                 ''.format(train=train, resource=resource, seconds=seconds))

    @classmethod
    def from_instance(cls, network, instance):
        '''Build the table for every train in an instance.'''
        speeds = {train.id: common.SPEED_FT_S[train.priority] for train in instance.trains}
        return cls(network, speeds, instance.running_times)

    def seconds(self, train_id, resource_id):
        '''float: The free running time of a train over a resource.'''
        try:
            return self.entries[(train_id, resource_id)]
        except KeyError:
            return self.network.resources[resource_id].length / self.speeds[train_id]


def _is_positive(value):
    '''bool: If the value is a finite number above zero.'''
    try:
        return value > 0 and math.isfinite(value)
    except TypeError:
        return False


def _get_positions(network):
    '''Find the line position of every resource.

    The position is the longest left-to-right path from a left terminal, so
    parallel members between the same endpoints share one.

    Raises:
        NetworkError: If the left-to-right adjacency has a cycle.

    '''
    indegree = {resource_id: 0 for resource_id in network.order}
    for resource_id in network.order:
        for successor in network.successors(resource_id, common.LEFT_TO_RIGHT):
            indegree[successor] += 1

    positions = {resource_id: 0 for resource_id in network.order}
    ready = [resource_id for resource_id in network.order if not indegree[resource_id]]
    visited = 0

    while ready:
        current = ready.pop(0)
        visited += 1
        for successor in network.successors(current, common.LEFT_TO_RIGHT):
            positions[successor] = max(positions[successor], positions[current] + 1)
            indegree[successor] -= 1
            if not indegree[successor]:
                ready.append(successor)

    if visited != len(network.order):
        looping = sorted((key for key, value in indegree.items() if value), key=common.natural_key)
        raise NetworkError('Resource: "{resource}" field "adjacency": the left_to_right '
                           'adjacency has a cycle.'.format(resource=looping[0]))

    return positions


def _check_type(document, field, type_, description, required=False):
    '''Raise a NetworkError when a top-level field has the wrong type.'''
    value = document.get(field)
    if value is None and not required:
        return

    if not isinstance(value, type_):
        raise NetworkError('Network field "{field}": "{value}" must be {description}.'
                           ''.format(field=field, value=value, description=description))


def load_network(document):
    '''Validate a network document and build the network it describes.

    Args:
        document (dict): The parsed network file.

    Raises:
        NetworkError:
            If the document breaks the schema, references an unknown resource
            or puts a resource in two parallel groups.

    Returns:
        :class:`Network`: The validated network.

    '''
    try:
        loader.check_keys(document, _NETWORK_KEYS, 'network', required=('resources', 'adjacency'))
    except ValueError as error:
        raise NetworkError(str(error))

    _check_type(document, 'resources', list, 'a list', required=True)
    _check_type(document, 'adjacency', list, 'a list', required=True)
    _check_type(document, 'control_points', list, 'a list')
    _check_type(document, 'route_exclusion', dict, 'a mapping')

    resources = []
    groups = dict()

    for info in document['resources']:
        owner = 'resource "{id}"'.format(id=info.get('id') if isinstance(info, dict) else info)
        try:
            loader.check_keys(info, _RESOURCE_KEYS, owner, required=('id', 'kind', 'length_ft'))
        except ValueError as error:
            raise NetworkError(str(error))

        resource_id = str(info['id'])
        kind = info['kind']
        length = info['length_ft']
        group = info.get('parallel_group')
        group = None if group is None else str(group)

        if kind not in common.RESOURCE_KINDS:
            raise NetworkError('Resource: "{id}" field "kind": "{kind}" is not one of "{opt}".'
                               ''.format(id=resource_id, kind=kind, opt=common.RESOURCE_KINDS))

        if not _is_positive(length):
            raise NetworkError('Resource: "{id}" field "length_ft": "{length}" must be '
                               'positive.'.format(id=resource_id, length=length))

        if resource_id in groups:
            if groups[resource_id] != group:
                raise NetworkError('Resource: "{id}" field "parallel_group": overlapping parallel '
                                   'groups "{one}" and "{two}".'
                                   ''.format(id=resource_id, one=groups[resource_id], two=group))
            raise NetworkError('Resource: "{id}" field "id": duplicate resource.'
                               ''.format(id=resource_id))

        groups[resource_id] = group
        resources.append(Resource(resource_id, kind, float(length), group))

    successors = collections.OrderedDict()

    def add(from_, to, direction):
        '''Append one successor, skipping repeats.'''
        items = successors.setdefault((from_, direction), [])
        if to not in items:
            items.append(to)

    for info in document['adjacency']:
        try:
            loader.check_keys(info, _ADJACENCY_KEYS, 'adjacency entry', required=_ADJACENCY_KEYS)
        except ValueError as error:
            raise NetworkError(str(error))

        from_ = str(info['from'])
        to = str(info['to'])
        direction = info['direction']

        for field, value in (('from', from_), ('to', to)):
            if value not in groups:
                raise NetworkError('Resource: "{id}" field "{field}": dangling adjacency '
                                   'reference.'.format(id=value, field=field))

        if direction not in common.DIRECTIONS:
            raise NetworkError('Resource: "{id}" field "direction": "{direction}" is not one '
                               'of "{opt}".'.format(id=from_, direction=direction,
                                                    opt=common.DIRECTIONS))

        if from_ == to:
            raise NetworkError('Resource: "{id}" field "to": a resource cannot succeed itself.'
                               ''.format(id=from_))

        add(from_, to, direction)
        add(to, from_, common.reverse_direction(direction))

    control_points = [str(item) for item in document.get('control_points', [])]
    for item in control_points:
        if item not in groups:
            raise NetworkError('Resource: "{id}" field "control_points": dangling reference.'
                               ''.format(id=item))

    headway = document.get('headway_s', common.DEFAULT_HEADWAY_S)
    if isinstance(headway, bool) or not isinstance(headway, (int, float)) or headway < 0:
        raise NetworkError('Network field "headway_s": "{value}" must be a non-negative number.'
                           ''.format(value=headway))

    known_groups = set(group for group in groups.values() if group is not None)
    route_exclusion = dict()
    for group, flag in six.iteritems(document.get('route_exclusion', {}) or {}):
        if str(group) not in known_groups:
            raise NetworkError('Resource group: "{group}" field "route_exclusion": unknown '
                               'parallel group.'.format(group=group))
        if not isinstance(flag, bool):
            raise NetworkError('Resource group: "{group}" field "route_exclusion": "{flag}" '
                               'must be a boolean.'.format(group=group, flag=flag))
        route_exclusion[str(group)] = flag

    network = Network(resources, successors, control_points, headway, route_exclusion)
    _LOGGER.debug('Loaded %r.', network)

    return network


def load_network_file(path):
    '''Load a network from a JSON or YAML file.'''
    return load_network(loader.load_document(path))


def serialize_network(network):
    '''Write a network back into its document form.

    Only the left-to-right half of the adjacency is written. Loading the
    result gives back an equal network.

    Args:
        network (:class:`Network`): The network to describe.

    Returns:
        dict: The network document.

    '''
    resources = []
    for resource in network.resources.values():
        info = collections.OrderedDict(
            [('id', resource.id), ('kind', resource.kind), ('length_ft', resource.length)])
        if resource.parallel_group is not None:
            info['parallel_group'] = resource.parallel_group
        resources.append(info)

    adjacency = []
    for resource_id in network.order:
        for successor in network.successors(resource_id, common.LEFT_TO_RIGHT):
            adjacency.append(collections.OrderedDict(
                [('from', resource_id), ('to', successor), ('direction', common.LEFT_TO_RIGHT)]))

    return collections.OrderedDict([
        ('resources', resources),
        ('adjacency', adjacency),
        ('control_points', [resource_id for resource_id in network.order
                            if resource_id in network.explicit_control_points]),
        ('headway_s', network.headway),
        ('route_exclusion', dict(sorted(network.route_exclusion.items()))),
    ])


def destination_group(network, destination):
    '''frozenset[str]: The resources where a train bound for destination arrives.'''
    return frozenset(network.group_members(destination))


def ranked_successors(network, rt, train_id, resource_id, direction, destination):
    '''Order the usable successors of a resource by free running time.

    Successors that can no longer reach the destination group are dropped.
    Ties go to the lowest resource id.

    Args:
        network (:class:`Network`): The line.
        rt (:class:`RunningTimeTable`): The running times to compare.
        train_id (str): The train whose running times are used.
        resource_id (str): Where the train's head is.
        direction (str): The travel direction.
        destination (str): The train's destination.

    Returns:
        list[str]: The successors, best first.

    '''
    targets = destination_group(network, destination)
    options = [successor for successor in network.successors(resource_id, direction)
               if network.reaches(successor, direction, targets)]

    return sorted(options, key=lambda item: (rt.seconds(train_id, item), common.natural_key(item)))


def best_next(network, rt, train):
    '''Find the successor with the minimum free running time for a train.

    Args:
        network (:class:`Network`): The line.
        rt (:class:`RunningTimeTable`): The running times to compare.
        train: Any object with ``id``, ``head``, ``direction`` and ``destination``.

    Raises:
        ValueError: If the train's head has no usable successor.

    Returns:
        str: The best successor id.

    '''
    options = ranked_successors(
        network, rt, train.id, train.head, train.direction, train.destination)

    if not options:
        raise ValueError('Train: "{train}" at resource "{resource}" has no successor going '
                         '"{direction}".'.format(train=train.id, resource=train.head,
                                                 direction=train.direction))

    return options[0]


def reachable_next(network, rt, train, count=common.REACHABLE_COUNT):
    '''list[str]: The successors after the best one, by running time, at most count.'''
    options = ranked_successors(
        network, rt, train.id, train.head, train.direction, train.destination)
    return options[1:1 + count]


def best_chain(network, rt, train, length):
    '''Walk the best successors ahead of a train.

    The walk stops after the destination group or when the line ends.

    Args:
        network (:class:`Network`): The line.
        rt (:class:`RunningTimeTable`): The running times to compare.
        train: Any object with ``id``, ``head``, ``direction`` and ``destination``.
        length (int): The most resources to return.

    Returns:
        list[str]: Up to length resource ids, nearest first.

    '''
    targets = destination_group(network, train.destination)
    chain = []
    current = train.head

    if current in targets:
        return chain

    while len(chain) < length:
        options = ranked_successors(
            network, rt, train.id, current, train.direction, train.destination)
        if not options:
            break

        current = options[0]
        chain.append(current)

        if current in targets:
            break

    return chain


def parallel_count(network, resource_id):
    '''Count the resources parallel to a resource.

    Raises:
        KeyError: If the resource is unknown.

    Returns:
        int: The group size minus one, or 0 for an ungrouped resource.

    '''
    if resource_id not in network.resources:
        raise KeyError('Resource: "{id}" is not in the network.'.format(id=resource_id))

    return len(network.group_members(resource_id)) - 1


def synthetic_line(resources=140,
                   parallel=42,
                   track_length=10000.0,
                   siding_lengths=(8500.0, 9000.0),
                   headway=common.DEFAULT_HEADWAY_S):
    '''Build a deterministic line of tracks and two-member stations.

    Stations sit at both ends and are spread evenly along the line. Every
    resource is a control point.

    Args:
        resources (:obj:`int`, optional): The total resource count.
        parallel (:obj:`int`, optional):
            How many resources belong to a parallel group. Must be even
            and cover at least two stations.
        track_length (:obj:`float`, optional): Feet per track.
        siding_lengths (:obj:`tuple[float, float]`, optional):
            Feet of the first and second member of every station.
        headway (:obj:`float`, optional): The line headway, in seconds.

    Raises:
        ValueError: If the counts cannot make a line.

    Returns:
        :class:`Network`: The line.

    '''
    if parallel % 2 or parallel < 4 or parallel > resources:
        raise ValueError('Parallel: "{parallel}" must be an even number between 4 and '
                         '"{resources}".'.format(parallel=parallel, resources=resources))

    stations = parallel // 2
    positions = stations + resources - parallel
    station_positions = set(
        int(round(index * (positions - 1) / float(stations - 1))) for index in range(stations))

    document = {'resources': [], 'adjacency': [], 'headway_s': headway}
    layers = []
    station_index = 0
    track_index = 0

    for position in range(positions):
        if position in station_positions:
            station_index += 1
            group = 'S{index}'.format(index=station_index)
            layer = []
            for suffix, length in zip('ab', siding_lengths):
                resource_id = '{group}{suffix}'.format(group=group, suffix=suffix)
                document['resources'].append({'id': resource_id, 'kind': common.STOPPING_POINT,
                                              'length_ft': length, 'parallel_group': group})
                layer.append(resource_id)
        else:
            track_index += 1
            resource_id = 'T{index}'.format(index=track_index)
            document['resources'].append(
                {'id': resource_id, 'kind': common.TRACK, 'length_ft': track_length})
            layer = [resource_id]

        layers.append(layer)

    for left, right in zip(layers, layers[1:]):
        for from_ in left:
            for to in right:
                document['adjacency'].append(
                    {'from': from_, 'to': to, 'direction': common.LEFT_TO_RIGHT})

    return load_network(document)
