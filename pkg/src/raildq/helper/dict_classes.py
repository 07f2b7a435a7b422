#!/usr/bin/env python
# -*- coding: utf-8 -*-

'''Mappings that a network shares with every episode that runs on it.'''

# IMPORT THIRD-PARTY LIBRARIES
from six.moves import collections_abc


class ReadOnlyDict(collections_abc.Mapping, object):

    '''A named mapping that refuses writes unless it was made settable.

    Networks and running-time tables are built once and then read by many
    episodes, including forked search states, so none of them may edit it.

    Attributes:
        name (str): What the mapping holds, used in error messages.
        settable (bool): If the instance has write permissions.

    '''

    def __init__(self, data=None, name='mapping', settable=False):
        '''Wrap the data.

        Args:
            data (:obj:`dict`, optional): The information to store. Default is empty.
            name (:obj:`str`, optional): What the mapping holds, e.g. "resources".
            settable (:obj:`bool`, optional): If True, items may be set. Default is False.

        '''
        super(ReadOnlyDict, self).__init__()
        self._data = dict() if data is None else data
        self.name = name
        self.settable = settable

    def __getitem__(self, key):
        '''Get the item at some key.

        Raises:
            KeyError: Naming the mapping and the missing key.

        '''
        try:
            return self._data[key]
        except KeyError:
            raise KeyError('{name}: "{key}" does not exist.'.format(name=self.name, key=key))

    def __iter__(self):
        '''iter: The keys, in insertion order.'''
        return iter(self._data)

    def __len__(self):
        return len(self._data)

    def __setitem__(self, key, value):
        '''Set the key with item, if the dict is not in read-only mode.

        Raises:
            RuntimeError: If the instance is in read-only mode.

        '''
        if not self.settable:
            raise RuntimeError('Mapping: "{name}" is read-only. "{key}" cannot be set.'
                               ''.format(name=self.name, key=key))

        self._data[key] = value

    def __repr__(self):
        '''str: A short description of the wrapped data.'''
        return '{cls}({name!r}, {count} items)'.format(
            cls=self.__class__.__name__, name=self.name, count=len(self))
