#!/usr/bin/env python
# -*- coding: utf-8 -*-

'''Dispatching instances: which trains start where, and when they are due.'''

# IMPORT STANDARD LIBRARIES
import math
import collections

# IMPORT THIRD-PARTY LIBRARIES
import six

# IMPORT LOCAL LIBRARIES
from . import loader
from . import topology
from ..helper import common

_INSTANCE_KEYS = ('trains', 'start_time_s', 'running_times', 'resource_status', 'network')
_TRAIN_KEYS = ('id', 'priority', 'length_ft', 'direction', 'origin', 'destination', 'schedule',
               'occupation', 'history', 'weight', 'state_value', 'ready_s')
_TRAIN_REQUIRED = ('id', 'priority', 'length_ft', 'direction', 'origin', 'destination', 'schedule')
_STATUS_KEYS = ('resource', 'status', 'train', 'start_s', 'end_s')


class InstanceError(ValueError):

    '''An instance document is malformed or does not fit its network.'''


TrainSpec = collections.namedtuple(
    'TrainSpec',
    'id priority length direction origin destination schedule occupation history '
    'weight state_value ready')

ResourceStatus = collections.namedtuple('ResourceStatus', 'resource status train start end')


class Instance(object):

    '''A snapshot of the line: the trains, their schedules and the resource statuses.

    Attributes:
        trains (tuple[:class:`TrainSpec`]): The trains, in file order.
        start_time (float): The snapshot time, in seconds.
        running_times (dict[tuple[str, str], float]):
            Explicit (train id, resource id) -> seconds entries.
        resource_status (tuple[:class:`ResourceStatus`]): Blocked or failed resources.
        network (str or NoneType): The name of a fixture network, if any.

    '''

    def __init__(self, trains, start_time=0.0, running_times=None, resource_status=(),
                 network=None):
        '''Store the instance parts.'''
        super(Instance, self).__init__()
        self.trains = tuple(trains)
        self.start_time = float(start_time)
        self.running_times = dict(running_times or {})
        self.resource_status = tuple(resource_status)
        self.network = network

    def __repr__(self):
        '''str: A short description of the instance.'''
        return '{name}({count} trains, start {start})'.format(
            name=self.__class__.__name__, count=len(self.trains), start=self.start_time)

    def __eq__(self, other):
        '''bool: If both instances produce the same document.'''
        if not isinstance(other, Instance):
            return NotImplemented
        return instance_to_document(self) == instance_to_document(other)

    def __ne__(self, other):
        '''bool: If the instances differ.'''
        equal = self.__eq__(other)
        if equal is NotImplemented:
            return equal
        return not equal

    __hash__ = None

    @property
    def max_length(self):
        '''float: The longest train length, or 0 for an empty instance.'''
        return max([train.length for train in self.trains] or [0.0])


def scheduled_time(train, resource_id):
    '''float: The scheduled exit time of a train from one resource.'''
    return train.schedule[resource_id]


def _number(value, owner, field, positive=False):
    '''float: Check that a document value is a finite number.'''
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise InstanceError('{owner} field "{field}": "{value}" must be a finite number.'
                            ''.format(owner=owner, field=field, value=value))

    if positive and value <= 0:
        raise InstanceError('{owner} field "{field}": "{value}" must be positive.'
                            ''.format(owner=owner, field=field, value=value))

    return float(value)


def _train_from_document(info, number):
    '''Build one :class:`TrainSpec` from its document mapping.'''
    owner = 'Train "{id}"'.format(id=info.get('id') if isinstance(info, dict) else info)
    try:
        loader.check_keys(info, _TRAIN_KEYS, owner, required=_TRAIN_REQUIRED)
    except ValueError as error:
        raise InstanceError(str(error))

    train_id = str(info['id'])
    owner = 'Train "{id}"'.format(id=train_id)
    priority = info['priority']

    if priority not in common.OMEGA or isinstance(priority, bool):
        raise InstanceError('{owner} field "priority": "{value}" must be one of "{opt}".'
                            ''.format(owner=owner, value=priority, opt=sorted(common.OMEGA)))

    direction = info['direction']
    if direction not in common.DIRECTIONS:
        raise InstanceError('{owner} field "direction": "{value}" must be one of "{opt}".'
                            ''.format(owner=owner, value=direction, opt=common.DIRECTIONS))

    schedule = collections.OrderedDict()
    for item in info['schedule']:
        try:
            loader.check_keys(item, ('resource', 'time_s'), owner + ' schedule entry',
                              required=('resource', 'time_s'))
        except ValueError as error:
            raise InstanceError(str(error))
        schedule[str(item['resource'])] = _number(item['time_s'], owner, 'schedule')

    origin = str(info['origin'])
    occupation = tuple(str(item) for item in info.get('occupation') or [origin])
    if origin not in occupation:
        raise InstanceError('{owner} field "occupation": "{value}" must contain the origin '
                            '"{origin}".'.format(owner=owner, value=list(occupation), origin=origin))

    weight = info.get('weight')
    weight = float(common.weight_of(priority)) if weight is None else _number(weight, owner, 'weight')
    state_value = info.get('state_value')
    state_value = 3.0 * number if state_value is None else _number(state_value, owner, 'state_value')

    return TrainSpec(
        id=train_id,
        priority=priority,
        length=_number(info['length_ft'], owner, 'length_ft', positive=True),
        direction=direction,
        origin=origin,
        destination=str(info['destination']),
        schedule=schedule,
        occupation=occupation,
        history=tuple(str(item) for item in info.get('history') or []),
        weight=weight,
        state_value=state_value,
        ready=_number(info.get('ready_s', 0.0), owner, 'ready_s'),
    )


def instance_from_document(document):
    '''Read an instance from its parsed document.

    Args:
        document (dict): The parsed instance file.

    Raises:
        InstanceError: If the document breaks the schema.

    Returns:
        :class:`Instance`: The instance. It is not yet checked against a network.

    '''
    try:
        loader.check_keys(document, _INSTANCE_KEYS, 'instance', required=('trains', ))
    except ValueError as error:
        raise InstanceError(str(error))

    trains = [_train_from_document(info, number)
              for number, info in enumerate(document['trains'], 1)]

    ids = [train.id for train in trains]
    duplicates = sorted(set(item for item in ids if ids.count(item) > 1))
    if duplicates:
        raise InstanceError('Train ids "{ids}" appear more than once.'.format(ids=duplicates))

    running_times = dict()
    for item in document.get('running_times') or []:
        try:
            loader.check_keys(item, ('train', 'resource', 'seconds'), 'running time entry',
                              required=('train', 'resource', 'seconds'))
        except ValueError as error:
            raise InstanceError(str(error))
        key = (str(item['train']), str(item['resource']))
        running_times[key] = _number(
            item['seconds'], 'Running time "{key}"'.format(key=key), 'seconds', positive=True)

    statuses = []
    for item in document.get('resource_status') or []:
        try:
            loader.check_keys(item, _STATUS_KEYS, 'resource status', required=('resource', 'status'))
        except ValueError as error:
            raise InstanceError(str(error))

        owner = 'Resource "{id}"'.format(id=item['resource'])
        status = item['status']
        if status not in (common.BLOCKED_STATUS, common.FAILED_STATUS):
            raise InstanceError('{owner} field "status": "{value}" must be "blocked" or "failed".'
                                ''.format(owner=owner, value=status))

        train = item.get('train')
        if status == common.BLOCKED_STATUS and train is None:
            raise InstanceError('{owner} field "train": a blocked resource names its train.'
                                ''.format(owner=owner))

        start = _number(item.get('start_s', 0.0), owner, 'start_s')
        end = _number(item.get('end_s', 1e18), owner, 'end_s')
        statuses.append(ResourceStatus(str(item['resource']), status,
                                       None if train is None else str(train), start, end))

    return Instance(
        trains,
        start_time=_number(document.get('start_time_s', 0.0), 'Instance', 'start_time_s'),
        running_times=running_times,
        resource_status=statuses,
        network=document.get('network'),
    )


def instance_to_document(instance):
    '''Describe an instance as a document.

    Args:
        instance (:class:`Instance`): The instance to describe.

    Returns:
        dict: A document that :func:`instance_from_document` reads back.

    '''
    trains = []
    for train in instance.trains:
        trains.append(collections.OrderedDict([
            ('id', train.id),
            ('priority', train.priority),
            ('length_ft', train.length),
            ('direction', train.direction),
            ('origin', train.origin),
            ('destination', train.destination),
            ('schedule', [collections.OrderedDict([('resource', key), ('time_s', value)])
                          for key, value in six.iteritems(train.schedule)]),
            ('occupation', list(train.occupation)),
            ('history', list(train.history)),
            ('weight', train.weight),
            ('state_value', train.state_value),
            ('ready_s', train.ready),
        ]))

    document = collections.OrderedDict([
        ('trains', trains),
        ('start_time_s', instance.start_time),
        ('running_times', [
            collections.OrderedDict([('train', train), ('resource', resource), ('seconds', value)])
            for (train, resource), value in sorted(instance.running_times.items())]),
    ])

    if instance.resource_status:
        document['resource_status'] = [
            collections.OrderedDict([('resource', item.resource), ('status', item.status),
                                     ('train', item.train), ('start_s', item.start),
                                     ('end_s', item.end)])
            for item in instance.resource_status]

    if instance.network is not None:
        document['network'] = instance.network

    return document


def load_instance(path):
    '''Load an instance from a JSON or YAML file.'''
    return instance_from_document(loader.load_document(path))


def save_instance(instance, path):
    '''Write an instance to disk. Equal instances give identical bytes.'''
    loader.dump_document(instance_to_document(instance), path)


def validate_instance(network, instance):
    '''Check that an instance fits a network.

    Args:
        network (:class:`raildq.base.topology.Network`): The line.
        instance (:class:`Instance`): The instance to check.

    Raises:
        InstanceError:
            If a train references an unknown resource, cannot reach its
            destination, has a broken occupation or shares a stopping point.
            Also if a running time names a train or resource that does not exist.

    '''
    holders = dict()

    for train in instance.trains:
        owner = 'Train "{id}"'.format(id=train.id)
        referenced = [('origin', train.origin), ('destination', train.destination)]
        referenced.extend(('schedule', item) for item in train.schedule)
        referenced.extend(('occupation', item) for item in train.occupation)
        referenced.extend(('history', item) for item in train.history)

        for field, resource_id in referenced:
            if resource_id not in network.resources:
                raise InstanceError('{owner} field "{field}": unknown resource "{id}".'
                                    ''.format(owner=owner, field=field, id=resource_id))

        targets = topology.destination_group(network, train.destination)
        if train.destination not in train.schedule:
            raise InstanceError('{owner} field "schedule": the destination "{id}" has no '
                                'scheduled time.'.format(owner=owner, id=train.destination))

        head = train.occupation[0]
        if head in targets:
            raise InstanceError('{owner} field "occupation": the train already stands in its '
                                'destination group.'.format(owner=owner))

        if not network.reaches(head, train.direction, targets):
            raise InstanceError('{owner} field "destination": "{id}" cannot be reached going '
                                '"{direction}".'.format(owner=owner, id=train.destination,
                                                        direction=train.direction))

        for ahead, behind in zip(train.occupation, train.occupation[1:]):
            if ahead not in network.successors(behind, train.direction):
                raise InstanceError('{owner} field "occupation": "{ahead}" does not follow '
                                    '"{behind}".'.format(owner=owner, ahead=ahead, behind=behind))

        for resource_id in train.occupation:
            kind = network.resources[resource_id].kind
            if kind == common.TRACK:
                continue

            if resource_id in holders:
                raise InstanceError('{owner} field "occupation": resource "{id}" is already held '
                                    'by train "{other}".'.format(owner=owner, id=resource_id,
                                                                 other=holders[resource_id]))
            holders[resource_id] = train.id

    for item in instance.resource_status:
        if item.resource not in network.resources:
            raise InstanceError('Resource status field "resource": unknown resource "{id}".'
                                ''.format(id=item.resource))

    train_ids = set(train.id for train in instance.trains)
    for train_id, resource_id in sorted(instance.running_times):
        owner = 'Running time "{key}"'.format(key=(train_id, resource_id))
        if train_id not in train_ids:
            raise InstanceError('{owner} field "train": unknown train "{id}".'
                                ''.format(owner=owner, id=train_id))

        if resource_id not in network.resources:
            raise InstanceError('{owner} field "resource": unknown resource "{id}".'
                                ''.format(owner=owner, id=resource_id))
