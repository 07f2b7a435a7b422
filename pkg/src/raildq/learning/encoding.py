#!/usr/bin/env python
# -*- coding: utf-8 -*-

'''Turn a simulator state into the vectors and matrices the agents read.

There are two families of encodings.

Local encodings describe the resources around one train: a few it has
crossed, the one it stands in, its best resources ahead and the other
resources it could go to next. Each of those "slots" carries six numbers.

Global encodings describe the whole line for the train that has to decide.
They come in six variants, "S0" to "S5".

'''

# IMPORT STANDARD LIBRARIES
import collections

# IMPORT THIRD-PARTY LIBRARIES
import numpy

# IMPORT LOCAL LIBRARIES
from ..base import topology
from ..base import simcore
from ..helper import common

LOCAL = 'local'
LOCAL_HISTORY = 'local_history'
GLOBAL_VARIANTS = ('S0', 'S1', 'S2', 'S3', 'S4', 'S5')
LOCAL_VARIANTS = (LOCAL, LOCAL_HISTORY)
VARIANTS = LOCAL_VARIANTS + GLOBAL_VARIANTS

# Remaining failure time, in seconds, below which the failure counts as short or medium
SHORT_FAILURE_S = 15 * 60
MEDIUM_FAILURE_S = 60 * 60

_FORWARD_BY_LENGTH_CLASS = {1: 5, 2: 7, 3: 10}

_DIRECTION_CODES = {common.LEFT_TO_RIGHT: 1, common.RIGHT_TO_LEFT: 2}

_CROSSING = 1
_FOLLOWER = 2


class EncoderConfig(collections.namedtuple('EncoderConfig', 'lf lb n_r history_depth')):

    '''How many resources a local encoding looks at.

    Attributes:
        lf (int): Best resources ahead.
        lb (int): Crossed resources behind.
        n_r (int): Reachable resources besides the best one.
        history_depth (int): Rows of a local history matrix.

    '''

    __slots__ = ()

    def __new__(cls, lf=3, lb=common.BACKWARD_COUNT, n_r=common.REACHABLE_COUNT,
                history_depth=common.HISTORY_DEPTH):
        '''Check that every count makes sense.'''
        for name, value in (('lf', lf), ('lb', lb), ('n_r', n_r),
                            ('history_depth', history_depth)):
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise ValueError('Field: "{name}" must be a non-negative integer, got "{value}".'
                                 ''.format(name=name, value=value))

        if history_depth < 1:
            raise ValueError('Field: "history_depth" must be at least 1.')

        return super(EncoderConfig, cls).__new__(cls, lf, lb, n_r, history_depth)

    @classmethod
    def for_length(cls, max_length, **kwargs):
        '''Pick lf from the longest train: 5, 7 or 10 by length class.

        Args:
            max_length (float): The longest train length, in feet.
            **kwargs: The other fields.

        Returns:
            :class:`EncoderConfig`: The config.

        '''
        return cls(lf=_FORWARD_BY_LENGTH_CLASS[common.length_class(max_length)], **kwargs)

    @property
    def slot_count(self):
        '''int: How many resources one local vector describes.'''
        return self.lb + 1 + self.lf + self.n_r

    @property
    def local_size(self):
        '''int: The length of one local vector.'''
        return self.slot_count * common.FEATURE_COUNT


def _missing_slot():
    '''list[int]: The features of a resource that does not exist.'''
    return [common.NON_EXISTENT] * common.FEATURE_COUNT


def describe_resource(sim, train, resource_id):
    '''Get the first feature of a resource slot.

    Returns:
        int:
            1 for a stopping point, 0 for a track or station route, 2 when
            the resource is reserved for another train and 3, 4 or 5 when
            it has failed, by how long the failure has left to run.

    '''
    end = simcore.failure_end(sim, resource_id)
    if end is not None:
        remaining = end - sim.clock
        if remaining < SHORT_FAILURE_S:
            return 3
        if remaining < MEDIUM_FAILURE_S:
            return 4
        return 5

    if simcore.blocked_for(sim, resource_id, train):
        return 2

    if sim.network.resources[resource_id].kind == common.STOPPING_POINT:
        return 1

    return 0


def slot_features(sim, train, resource_id):
    '''Describe one resource as seen by one train.

    Args:
        sim (:class:`raildq.base.simcore.SimState`): The episode.
        train (:class:`raildq.base.simcore.Train`): The train being described.
        resource_id (str or NoneType): The resource. None gives the all-9 slot.

    Returns:
        list[int]:
            The resource description, the number of other trains on it,
            their highest priority, whether that train crosses or follows,
            whether the train fits and the number of parallel resources.

    '''
    if resource_id is None:
        return _missing_slot()

    resource = sim.network.resources[resource_id]
    others = [other for other in simcore.occupants(sim, resource_id) if other is not train]

    priority = 0
    relation = 0
    if others:
        leader = min(others, key=lambda other: (other.priority, common.natural_key(other.id)))
        priority = leader.priority
        relation = _FOLLOWER if leader.direction == train.direction else _CROSSING

    return [
        describe_resource(sim, train, resource_id),
        len(others),
        priority,
        relation,
        int(train.length <= resource.length),
        topology.parallel_count(sim.network, resource_id),
    ]


def _pad(items, count, front=False):
    '''Fill a list of resource ids up to count with None.'''
    items = list(items)[-count:] if front else list(items)[:count]
    padding = [None] * (count - len(items))
    if front:
        return padding + items
    return items + padding


def local_slots(sim, train, config):
    '''list[str or NoneType]: The resources behind, under, ahead and beside a train.'''
    backward = _pad(simcore.backward_resources(train, config.lb), config.lb, front=True)
    forward = _pad(topology.best_chain(sim.network, sim.rt, train, config.lf), config.lf)
    reachable = _pad(simcore.route_options(sim, train)[1:], config.n_r)

    return backward + [train.head] + forward + reachable


def encode_local(sim, train, config):
    '''Describe the resources around a train as one flat vector.

    Args:
        sim (:class:`raildq.base.simcore.SimState`): The episode.
        train (:class:`raildq.base.simcore.Train` or str): The train to describe.
        config (:class:`EncoderConfig`): How far to look.

    Returns:
        :class:`numpy.ndarray`: (lb + 1 + lf + n_r) * 6 floats.

    '''
    train = _get_train(sim, train)
    values = []
    for resource_id in local_slots(sim, train, config):
        values.extend(slot_features(sim, train, resource_id))

    return numpy.array(values, dtype=numpy.float64)


def fingerprint(local):
    '''bytes: Identify a local vector for the hold-streak rule.'''
    return numpy.asarray(local, dtype=numpy.float64).tobytes()


def state_history_record(sim, train, vector):
    '''Remember a local vector for later history matrices.'''
    sim.state_history[getattr(train, 'id', train)].append(numpy.array(vector, dtype=numpy.float64))


def encode_local_history(sim, train, config, history_depth=None, current=None):
    '''Stack a train's current local vector over its latest different ones.

    Past rows never equal the current row, and a past state repeated in a
    row is only used once.

    Args:
        sim (:class:`raildq.base.simcore.SimState`): The episode.
        train (:class:`raildq.base.simcore.Train` or str): The train to describe.
        config (:class:`EncoderConfig`): How far to look.
        history_depth (:obj:`int`, optional): Rows. Defaults to the config's.
        current (:obj:`numpy.ndarray`, optional): An already computed local vector.

    Returns:
        :class:`numpy.ndarray`: A history_depth x local size matrix, padded with 9s.

    '''
    train = _get_train(sim, train)
    if history_depth is None:
        history_depth = config.history_depth

    if current is None:
        current = encode_local(sim, train, config)

    rows = [current]
    for past in reversed(sim.state_history.get(train.id, [])):
        if len(rows) >= history_depth:
            break

        if numpy.array_equal(past, current) or numpy.array_equal(past, rows[-1]):
            continue

        rows.append(past)

    while len(rows) < history_depth:
        rows.append(numpy.full(config.local_size, common.NON_EXISTENT, dtype=numpy.float64))

    return numpy.vstack(rows[:history_depth])


def _get_train(sim, train):
    '''Accept a train or its id.'''
    if isinstance(train, simcore.Train):
        return train
    return sim.trains[train]


def _train_number(sim, train):
    '''int: The 1-based position of a train in the instance.'''
    return list(sim.trains).index(train.id) + 1


def _column_leader(sim, resource_id):
    ''':class:`raildq.base.simcore.Train` or NoneType: The most important train on a resource.'''
    trains = simcore.occupants(sim, resource_id)
    if not trains:
        return None
    return min(trains, key=lambda item: (item.priority, common.natural_key(item.id)))


def _line_rows(sim):
    '''numpy.ndarray: Priority, direction and length class of every resource's leading train.'''
    network = sim.network
    rows = numpy.zeros((3, len(network)), dtype=numpy.float64)

    for column, resource_id in enumerate(network.order):
        leader = _column_leader(sim, resource_id)
        if leader is None:
            continue

        rows[0, column] = leader.priority
        rows[1, column] = _DIRECTION_CODES[leader.direction]
        rows[2, column] = common.length_class(leader.length)

    return rows


def encode_s0(sim, train):
    '''Mark each occupied resource with its train's value, the deciding train's raised by 2.

    A resource shared by several trains shows the highest value.

    '''
    network = sim.network
    values = numpy.zeros(len(network), dtype=numpy.float64)

    for other in sim.active_trains():
        value = other.spec.state_value
        if other is train:
            value += 2
        for resource_id in other.occupation:
            column = network.index[resource_id]
            values[column] = max(values[column], value)

    return values


def encode_global(sim, train, variant, max_trains=None):
    '''Describe the whole line for the train that has to decide.

    Args:
        sim (:class:`raildq.base.simcore.SimState`): The episode.
        train (:class:`raildq.base.simcore.Train` or str): The deciding train.
        variant (str): One of "S0" to "S5".
        max_trains (:obj:`int`, optional):
            The one-hot width of "S5". Defaults to the number of trains in the episode.

    Raises:
        ValueError: If the variant is unknown or the train does not fit the one-hot width.

    Returns:
        :class:`numpy.ndarray`: A vector for "S0", a 3 or 4 row matrix otherwise.

    '''
    train = _get_train(sim, train)

    if variant == 'S0':
        return encode_s0(sim, train)

    if variant not in GLOBAL_VARIANTS:
        raise ValueError('Variant: "{variant}" is unknown. Options were, "{opt}".'
                         ''.format(variant=variant, opt=GLOBAL_VARIANTS))

    rows = _line_rows(sim)
    number = _train_number(sim, train)

    if variant in ('S1', 'S2', 'S3'):
        marker = {
            'S1': train.spec.state_value,
            'S2': number,
            'S3': number / 10.0,
        }[variant]
        return numpy.hstack([rows, numpy.full((3, 1), marker, dtype=numpy.float64)])

    if variant == 'S4':
        return numpy.vstack([rows, numpy.full((1, rows.shape[1]), number, dtype=numpy.float64)])

    if max_trains is None:
        max_trains = len(sim.trains)

    if number > max_trains:
        raise ValueError('Train: "{train}" is number "{number}" but the one-hot width is '
                         '"{width}".'.format(train=train.id, number=number, width=max_trains))

    one_hot = numpy.zeros((3, max_trains), dtype=numpy.float64)
    one_hot[:, number - 1] = 1.0
    return numpy.hstack([rows, one_hot])


def input_size(variant, network, config, max_trains):
    '''Get the flat input length an encoding variant produces.

    Args:
        variant (str): Any of :data:`VARIANTS`.
        network (:class:`raildq.base.topology.Network`): The line.
        config (:class:`EncoderConfig`): The local window.
        max_trains (int): The one-hot width of "S5".

    Raises:
        ValueError: If the variant is unknown.

    Returns:
        int: The number of values a model receives.

    '''
    resources = len(network)
    sizes = {
        LOCAL: config.local_size,
        LOCAL_HISTORY: config.local_size * config.history_depth,
        'S0': resources,
        'S1': 3 * (resources + 1),
        'S2': 3 * (resources + 1),
        'S3': 3 * (resources + 1),
        'S4': 4 * resources,
        'S5': 3 * (resources + max_trains),
    }

    try:
        return sizes[variant]
    except KeyError:
        raise ValueError('Variant: "{variant}" is unknown. Options were, "{opt}".'
                         ''.format(variant=variant, opt=VARIANTS))


def encode(sim, train, variant, config, max_trains=None, local=None):
    '''Encode a state in any variant and flatten it for a model.

    Args:
        sim (:class:`raildq.base.simcore.SimState`): The episode.
        train (:class:`raildq.base.simcore.Train` or str): The deciding train.
        variant (str): Any of :data:`VARIANTS`.
        config (:class:`EncoderConfig`): The local window.
        max_trains (:obj:`int`, optional): The one-hot width of "S5".
        local (:obj:`numpy.ndarray`, optional): An already computed local vector.

    Returns:
        :class:`numpy.ndarray`: A flat vector.

    '''
    if variant == LOCAL:
        if local is None:
            local = encode_local(sim, train, config)
        return local

    if variant == LOCAL_HISTORY:
        return encode_local_history(sim, train, config, current=local).ravel()

    return encode_global(sim, train, variant, max_trains=max_trains).ravel()


def build_action_mask(sim, train):
    '''tuple[bool]: Which of the five actions the train may take right now.'''
    return simcore.legal_actions(sim, train)
