#!/usr/bin/env python
# -*- coding: utf-8 -*-

'''Deadlock tests that only need the line layout and where trains stand.

The simulator asks two questions here. The flow test answers "can these two
opposing trains still meet somewhere?" for any network size. The exhaustive
search answers "does any sequence of moves let every train arrive?" and is
only affordable on small configurations.

'''

# IMPORT STANDARD LIBRARIES
import logging
import itertools
import collections

# IMPORT LOCAL LIBRARIES
from ..helper import common

_LOGGER = logging.getLogger(__name__)

SEARCH_LIMIT = 200000

TrainView = collections.namedtuple('TrainView', 'id direction head destination length occupation')
TrainView.__new__.__defaults__ = ((),)


def _can_wait(network, train, member):
    '''Check if a train can stand clear of the line inside one member.

    A train already in the member must hold nothing else. A train that has
    still to come in needs the member to be at least as long as itself.

    '''
    if member in train.occupation:
        return tuple(train.occupation) == (member, )

    return train.length <= network.resources[member].length


def _meet_possible(network, position, right, left):
    '''Check if two opposing trains can pass each other at one line position.

    One train must wait inside a member while the other goes through a
    different one. A member the waiting train does not hold must be free of
    the passing train, and a train that already holds a member at the
    position cannot switch to another one.

    Args:
        network (:class:`raildq.base.topology.Network`): The line.
        position (int): The line position to check.
        right (:class:`TrainView`): The left-to-right train.
        left (:class:`TrainView`): The right-to-left train.

    Returns:
        bool: If the position has room for one train to wait while the other passes.

    '''
    members = network.members_at(position)
    if len(members) < 2:
        return False

    destinations = (network.positions[right.destination], network.positions[left.destination])
    if position in destinations:
        return True

    def _usable(train, other):
        held = [member for member in members if member in train.occupation]
        if held:
            return held
        return [member for member in members if member not in other.occupation]

    for waiting, passing in ((right, left), (left, right)):
        for member in _usable(waiting, passing):
            if not _can_wait(network, waiting, member):
                continue

            if any(other != member for other in _usable(passing, waiting)):
                return True

    return False


def flow_conflicts(network, trains):
    '''Find opposing trains that can no longer pass each other.

    Two trains conflict when they face each other, each must get past the
    other's head to arrive, and no position between their heads offers a
    meet.

    Args:
        network (:class:`raildq.base.topology.Network`): The line.
        trains (iterable[:class:`TrainView`]): The trains still running.

    Returns:
        frozenset[str]: The ids of every train in a conflicting pair.

    '''
    positions = network.positions
    flagged = set()

    for first, second in itertools.combinations(trains, 2):
        if first.direction == second.direction:
            continue

        if first.direction == common.LEFT_TO_RIGHT:
            right, left = first, second
        else:
            right, left = second, first

        right_head = positions[right.head]
        left_head = positions[left.head]

        if left_head <= right_head:
            continue

        if positions[right.destination] < left_head or positions[left.destination] > right_head:
            continue

        if not any(_meet_possible(network, position, right, left)
                   for position in range(right_head, left_head + 1)):
            _LOGGER.debug('Trains "%s" and "%s" cannot meet between positions %s and %s.',
                          right.id, left.id, right_head, left_head)
            flagged.update((right.id, left.id))

    return frozenset(flagged)


def completion_exists(root, expand, is_complete, key, limit=SEARCH_LIMIT):
    '''Search every move sequence for one that completes.

    Args:
        root: The starting configuration.
        expand (callable[object] -> iterable[object]):
            Every configuration one move away.
        is_complete (callable[object] -> bool): If every train has arrived.
        key (callable[object] -> hashable): Identifies equal configurations.
        limit (:obj:`int`, optional):
            The most configurations to visit. Past it, completion is assumed.

    Returns:
        bool: If some sequence of moves completes.

    '''
    stack = [root]
    seen = {key(root)}

    while stack:
        node = stack.pop()
        if is_complete(node):
            return True

        for child in expand(node):
            child_key = key(child)
            if child_key in seen:
                continue

            seen.add(child_key)
            stack.append(child)

        if len(seen) > limit:
            _LOGGER.warning('Stopped the completion search after %s configurations.', limit)
            return True

    return False
