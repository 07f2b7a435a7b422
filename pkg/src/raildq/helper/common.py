#!/usr/bin/env python
# -*- coding: utf-8 -*-

'''A collection of constants and small functions used by modules in this package.

This module is not likely to change often.

'''

# IMPORT STANDARD LIBRARIES
import re

LEFT_TO_RIGHT = 'left_to_right'
RIGHT_TO_LEFT = 'right_to_left'
DIRECTIONS = (LEFT_TO_RIGHT, RIGHT_TO_LEFT)

STOPPING_POINT = 'stopping_point'
TRACK = 'track'
STATION_ROUTE = 'station_route'
RESOURCE_KINDS = (STOPPING_POINT, TRACK, STATION_ROUTE)

BLOCKED_STATUS = 'blocked'
FAILED_STATUS = 'failed'

# Priority -> weight in the weighted delay
OMEGA = {1: 20, 2: 10, 3: 5, 4: 2, 5: 1}

# Free running speed in feet per second, by priority
SPEED_FT_S = {1: 88.0, 2: 88.0, 3: 73.0, 4: 59.0, 5: 59.0}

DEFAULT_HEADWAY_S = 120.0
EPSILON_TIME_S = 1.0

HORIZON_S = 7200.0
LONG_HORIZON_S = 14400.0
OVERLENGTH_FT = 8000

MAX_HOLD_STREAK = 3

NON_EXISTENT = 9
FEATURE_COUNT = 6
ACTION_COUNT = 5
REACHABLE_COUNT = 3
BACKWARD_COUNT = 2
HISTORY_DEPTH = 3

REWARD_SCALE = 15000.0
DEADLOCK_PENALTY = -3.0
BEST_RATIO = 1.25

BEST = 'best'
NORMAL = 'normal'
DEADLOCK = 'deadlock'
REWARD_CLASSES = (BEST, NORMAL, DEADLOCK)

ALL_ARRIVED = 'all_arrived'
HORIZON_EXCEEDED = 'horizon_exceeded'

LOG_LEVEL_ENV_VAR = 'RAILDQ_LOG_LEVEL'
LONG_TESTS_ENV_VAR = 'RAILDQ_LONG_TESTS'

_DIGITS = re.compile(r'(\d+)')


def memoize(function):
    '''Create cache of values for a function.'''
    memo = {}

    def wrapper(*args):
        '''Run the original function and store its output, given some args.'''
        if args in memo:
            return memo[args]

        value = function(*args)
        memo[args] = value

        return value

    return wrapper


def natural_key(text):
    '''Build a sort key that orders embedded numbers by value.

    Example:
        >>> sorted(['10', '9', '5b', '5a', 'S1'], key=natural_key)
        ['5a', '5b', '9', '10', 'S1']

    Args:
        text (str): A resource or train id.

    Returns:
        tuple: Alternating text and integer pieces.

    '''
    return tuple((0, int(part), '') if part.isdigit() else (1, 0, part)
                 for part in _DIGITS.split(str(text)) if part)


def reverse_direction(direction):
    '''str: The opposite of a travel direction.'''
    if direction == LEFT_TO_RIGHT:
        return RIGHT_TO_LEFT
    if direction == RIGHT_TO_LEFT:
        return LEFT_TO_RIGHT

    raise ValueError('Direction: "{direction}" is unknown. Options were, "{opt}".'
                     ''.format(direction=direction, opt=DIRECTIONS))


def length_class(length):
    '''int: 1 for trains up to 4000 ft, 2 up to 8000 ft, 3 above that.'''
    if length <= 4000:
        return 1
    if length <= OVERLENGTH_FT:
        return 2
    return 3


def weight_of(priority):
    '''int: The delay weight of a priority class.'''
    try:
        return OMEGA[priority]
    except KeyError:
        raise ValueError('Priority: "{priority}" must be one of "{opt}".'
                         ''.format(priority=priority, opt=sorted(OMEGA)))
