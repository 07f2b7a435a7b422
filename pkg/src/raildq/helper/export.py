#!/usr/bin/env python
# -*- coding: utf-8 -*-

'''CSV files written and read by the package.

Every writer creates missing parent folders and writes "\\n" line endings so
that equal data gives identical bytes on every platform.

'''

# IMPORT STANDARD LIBRARIES
import io
import os
import csv

# IMPORT LOCAL LIBRARIES
from . import common

STEP_LOG_HEADER = ('episode', 'step', 'clock_s', 'train', 'action', 'resource')
EPISODE_LOG_HEADER = ('episode', 'class', 'weighted_delay', 'epsilon', 'loss', 'ms')
DELAY_TABLE_HEADER = ('problem', 'solver', 'delay')
PROFILE_HEADER = ('solver', 'tau', 'rho')
DEADLOCK_MARKER = common.DEADLOCK


def format_number(value):
    '''str: A number written so it reads back exactly, or "" for None.'''
    if value is None:
        return ''
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def _open(path):
    '''Open a CSV file for writing, creating its folder.'''
    directory = os.path.dirname(path)
    if directory and not os.path.isdir(directory):
        os.makedirs(directory)

    return io.open(path, 'w', encoding='utf-8', newline='')


def _writer(file_):
    ''':class:`csv.writer`: A writer with fixed line endings.'''
    return csv.writer(file_, lineterminator='\n')


def write_rows(path, header, rows):
    '''Write a header and rows to a CSV file.'''
    with _open(path) as file_:
        writer = _writer(file_)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def write_step_log_csv(records, path):
    '''Write a simulator step log.

    Args:
        records (iterable[:class:`raildq.base.simcore.StepRecord`]): The steps.
        path (str): The CSV file.

    '''
    write_rows(path, STEP_LOG_HEADER, (
        (record.episode, record.step, format_number(record.clock), record.train, record.action,
         record.resource)
        for record in records))


def write_encodings_csv(rows, path):
    '''Write encoded states for offline inspection.

    Args:
        rows (iterable[tuple]): (episode, step, train, variant, values) entries.
        path (str): The CSV file.

    '''
    rows = [(episode, step, train, variant, [format_number(float(value)) for value in values])
            for episode, step, train, variant, values in rows]
    width = max([len(row[-1]) for row in rows] or [0])
    header = ('episode', 'step', 'train', 'variant') + tuple(
        'v{index}'.format(index=index) for index in range(width))

    write_rows(path, header, ([episode, step, train, variant] + values
                              for episode, step, train, variant, values in rows))


def write_memory_csv(memory, path):
    '''Write a snapshot of a replay memory.

    Args:
        memory: Anything with an ``items()`` method yielding (store, experience) pairs.
        path (str): The CSV file.

    '''
    header = ('store', 'episode', 'train', 'action') + tuple(
        'y{index}'.format(index=index) for index in range(common.ACTION_COUNT)) + ('key', )

    write_rows(path, header, (
        [store, experience.episode, experience.train, experience.action]
        + [format_number(float(value)) for value in experience.y]
        + [experience.digest()]
        for store, experience in memory.items()))


class EpisodeLogWriter(object):

    '''Write the training log one episode at a time.

    Example:
        >>> with EpisodeLogWriter('log.csv') as writer:
        ...     writer.write(record)

    '''

    def __init__(self, path):
        '''Open the log and write its header.'''
        super(EpisodeLogWriter, self).__init__()
        self.path = path
        self._file = _open(path)
        self._writer = _writer(self._file)
        self._writer.writerow(EPISODE_LOG_HEADER)
        self._file.flush()

    def __enter__(self):
        '''Use the writer as a context manager.'''
        return self

    def __exit__(self, *args):
        '''Close the log.'''
        self.close()

    def write(self, record):
        '''Append one :class:`raildq.experiment.harness.EpisodeRecord`.'''
        self._writer.writerow((
            record.episode,
            record.reward_class,
            format_number(record.weighted_delay),
            format_number(record.epsilon),
            format_number(record.loss),
            record.ms,
        ))
        self._file.flush()

    def close(self):
        '''Close the file.'''
        if not self._file.closed:
            self._file.close()


def write_delay_table(rows, path):
    '''Write (problem, solver, delay) rows. A None delay is written as "deadlock".'''
    write_rows(path, DELAY_TABLE_HEADER, (
        (problem, solver, DEADLOCK_MARKER if delay is None else format_number(delay))
        for problem, solver, delay in rows))


def read_delay_table(path):
    '''Read a (problem, solver, delay) CSV file.

    An empty delay or "deadlock" marks a failed run.

    Args:
        path (str): The CSV file.

    Raises:
        ValueError: If the header is wrong or a delay is not a number.

    Returns:
        list[tuple[str, str, float or NoneType]]: The rows.

    '''
    with io.open(path, 'r', encoding='utf-8', newline='') as file_:
        reader = csv.reader(file_)
        header = next(reader, None)
        if header is None or tuple(item.strip() for item in header) != DELAY_TABLE_HEADER:
            raise ValueError('Path: "{path}" must start with the header "{header}".'
                             ''.format(path=path, header=','.join(DELAY_TABLE_HEADER)))

        rows = []
        for line, row in enumerate(reader, 2):
            if not row:
                continue

            if len(row) != len(DELAY_TABLE_HEADER):
                raise ValueError('Path: "{path}" line "{line}" needs 3 columns, got "{row}".'
                                 ''.format(path=path, line=line, row=row))

            problem, solver, delay = (item.strip() for item in row)
            if not delay or delay.lower() == DEADLOCK_MARKER:
                rows.append((problem, solver, None))
                continue

            try:
                rows.append((problem, solver, float(delay)))
            except ValueError:
                raise ValueError('Path: "{path}" line "{line}" delay "{delay}" is not a number.'
                                 ''.format(path=path, line=line, delay=delay))

    return rows


def write_profile_csv(curves, path):
    '''Write performance profile breakpoints as (solver, tau, rho) rows.'''
    write_rows(path, PROFILE_HEADER, (
        (solver, format_number(tau), format_number(rho))
        for solver, curve in curves.items() for tau, rho in curve))
