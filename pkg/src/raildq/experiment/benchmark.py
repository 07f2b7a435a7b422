#!/usr/bin/env python
# -*- coding: utf-8 -*-

'''Compare dispatchers by their weighted delays.

A delay table maps each solver and problem to a weighted delay, or None
when the run deadlocked. :func:`summarize` gives the usual statistics of
one solver and :func:`performance_profile` compares several solvers on
the same problems.

'''

# IMPORT STANDARD LIBRARIES
import bisect
import collections

# IMPORT THIRD-PARTY LIBRARIES
import numpy

# IMPORT LOCAL LIBRARIES
from ..helper import common

ZERO_SHIFT = 1.0

EvaluationStats = collections.namedtuple(
    'EvaluationStats', 'minimum mean maximum std deadlocks delays')


def summarize(delays):
    '''Describe the weighted delays of one solver.

    Deadlocked runs are counted but left out of the delay moments.

    Args:
        delays (iterable[float or NoneType]): One delay per run, None for a deadlock.

    Returns:
        :class:`EvaluationStats`:
            The statistics. The moments are None when every run deadlocked.
            The standard deviation is the population one.

    '''
    delays = [None if delay is None else float(delay) for delay in delays]
    finite = numpy.array([delay for delay in delays if delay is not None], dtype=numpy.float64)
    deadlocks = len(delays) - finite.size

    if not finite.size:
        return EvaluationStats(None, None, None, None, deadlocks, delays)

    return EvaluationStats(
        minimum=float(finite.min()),
        mean=float(finite.mean()),
        maximum=float(finite.max()),
        std=float(finite.std()),
        deadlocks=deadlocks,
        delays=delays,
    )


def _problems(table):
    '''list[str]: Every problem named in a delay table, in first-seen order.'''
    problems = collections.OrderedDict()
    for results in table.values():
        for problem in results:
            problems[problem] = None
    return list(problems)


def performance_profile(table):
    '''Build the performance profile of every solver in a delay table.

    The ratio of a solver on a problem is its delay over the best delay on
    that problem. Failed runs get an infinite ratio. When any problem's best
    delay is 0, every delay is shifted by 1 s first.

    Args:
        table (dict[str, dict[str, float or NoneType]]):
            Solver -> problem -> weighted delay. None, or a missing
            problem, is a failure.

    Raises:
        ValueError: If the table has no solver or no problem.

    Returns:
        collections.OrderedDict[str, list[tuple[float, float]]]:
            Solver -> (tau, rho) breakpoints, tau ascending. rho is the
            share of problems whose ratio is at most tau.

    '''
    if not table:
        raise ValueError('The delay table has no solver.')

    problems = _problems(table)
    if not problems:
        raise ValueError('The delay table has no problem.')

    def value(solver, problem):
        '''float: A delay, or infinity for a failure.'''
        delay = table[solver].get(problem)
        return float('inf') if delay is None else float(delay)

    best = dict()
    for problem in problems:
        finite = [value(solver, problem) for solver in table
                  if numpy.isfinite(value(solver, problem))]
        best[problem] = min(finite) if finite else None

    shift = ZERO_SHIFT if any(delay == 0 for delay in best.values()) else 0.0

    curves = collections.OrderedDict()
    for solver in table:
        ratios = []
        for problem in problems:
            delay = value(solver, problem)
            if best[problem] is None or not numpy.isfinite(delay):
                ratios.append(float('inf'))
                continue
            ratios.append((delay + shift) / (best[problem] + shift))

        ratios.sort()
        breakpoints = sorted(set(ratio for ratio in ratios if numpy.isfinite(ratio)))
        curves[solver] = [(tau, bisect.bisect_right(ratios, tau) / float(len(problems)))
                          for tau in breakpoints]

    return curves


def profile_value(curve, tau):
    '''float: The rho of a profile curve at tau.'''
    taus = [point for point, _ in curve]
    position = bisect.bisect_right(taus, tau)
    if not position:
        return 0.0
    return curve[position - 1][1]


def delay_table(results):
    '''Group (problem, solver, delay) rows into a delay table.

    Args:
        results (iterable[tuple[str, str, float or NoneType]]): The rows.

    Returns:
        collections.OrderedDict[str, collections.OrderedDict[str, float or NoneType]]:
            Solver -> problem -> delay.

    '''
    table = collections.OrderedDict()
    for problem, solver, delay in results:
        table.setdefault(solver, collections.OrderedDict())[problem] = delay

    for solver in table:
        table[solver] = collections.OrderedDict(
            sorted(table[solver].items(), key=lambda item: common.natural_key(item[0])))

    return table
