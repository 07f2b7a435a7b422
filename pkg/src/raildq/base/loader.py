#!/usr/bin/env python
# -*- coding: utf-8 -*-

'''Read and write the structured documents used across the package.

Network files, instance files, training configs and generation profiles are
all plain JSON or YAML. Every loader is described once, in
:func:`get_loaders`, and the rest of the package goes through
:func:`load_document` or :func:`try_load`.

'''

# IMPORT STANDARD LIBRARIES
import io
import os
import json
import logging
import functools
import itertools

# IMPORT THIRD-PARTY LIBRARIES
import yaml
import yamlordereddictloader

# IMPORT LOCAL LIBRARIES
from ..helper import common

_LOGGER = logging.getLogger(__name__)


@common.memoize
def get_loaders():
    '''Get descriptions for how we load document files.

    Note:
        This function is cached after it is run.

    Returns:
        dict[str]: The installed loaders.

    '''
    def use_yaml():
        '''Describe how YAML documents load.'''
        extensions = ('.yml', '.yaml')

        def is_valid(item):
            '''If this item is a valid YAML file.'''
            return item.endswith(extensions)

        load = functools.partial(yaml.load, Loader=yamlordereddictloader.SafeLoader)

        return {
            'yaml': {
                'exceptions': (yaml.YAMLError, ),
                'extensions': extensions,
                'is_valid': is_valid,
                'load': (load, ),
            },
        }

    def use_json():
        '''Describe how JSON documents load.'''
        extensions = ('.json', )

        def is_valid(item):
            '''If this item is a valid JSON file.'''
            return item.endswith(extensions)

        return {
            'json': {
                'exceptions': (ValueError, TypeError),
                'extensions': extensions,
                'is_valid': is_valid,
                'load': (json.load, ),
            },
        }

    output_dict = dict()
    for loader in [use_json, use_yaml]:
        output_dict.update(loader())

    return output_dict


def get_supported_extensions():
    '''tuple[str]: Every file extension that some loader understands.'''
    return tuple(extension for _, info in sorted(get_loaders().items())
                 for extension in info['extensions'])


def find_loader(path):
    '''Get the callable method needed to parse this file.

    Args:
        path (str): The path to get the loader of.

    Raises:
        NotImplementedError: If no loader accepts the file's extension.

    Returns:
        callable[file]: A method that loads an open file object.

    '''
    lower = path.lower()
    most_preferred_load_index = 0

    for loader in get_loaders().values():
        if loader['is_valid'](lower):
            return loader['load'][most_preferred_load_index]

    raise NotImplementedError(
        'Path: "{path}" has no implementation. Expected one of "{opt}".'
        ''.format(path=path, opt=get_supported_extensions()))


def try_load(path, default=None):
    '''Try our best to load the given file, using a number of different methods.

    The preferred loader is picked by extension. If it fails, every other
    loader is tried before giving up.

    Args:
        path (str):
            The absolute path to some file with serialized data.
        default (:obj:`dict`, optional):
            The information to return back if no data could be found.
            Default is an empty dict.

    Returns:
        dict: The information stored in the file.

    '''
    if default is None:
        default = dict()

    if not os.path.isfile(path):
        return default

    loaders = get_loaders()
    loader_options = [loader for _, info in sorted(loaders.items()) for loader in info['load']]

    try:
        preferred = [find_loader(path)]
    except NotImplementedError:
        preferred = []

    known_loader_exceptions = tuple(exception for _, info in loaders.items()
                                    for exception in info.get('exceptions', []))

    for loader_option in itertools.chain(preferred, loader_options):
        try:
            with io.open(path, 'r', encoding='utf-8') as file_:
                return loader_option(file_)
        except known_loader_exceptions:  # pylint: disable=catching-non-exception
            _LOGGER.debug('Loader "%s" could not read "%s".', loader_option, path)

    return default


def load_document(path):
    '''Load a JSON or YAML document and fail loudly if that is not possible.

    Args:
        path (str): The file to read.

    Raises:
        ValueError: If the file is missing or no loader could read it.

    Returns:
        dict: The loaded document.

    '''
    if not os.path.isfile(path):
        raise ValueError('Path: "{path}" does not exist.'.format(path=path))

    data = try_load(path, default=None)

    if data is None:
        raise ValueError('Path: "{path}" could not be loaded as any of "{opt}".'
                         ''.format(path=path, opt=get_supported_extensions()))

    return data


def dump_document(data, path):
    '''Write a document to disk, as JSON or YAML depending on its extension.

    JSON output uses sorted keys and a fixed indent so that equal documents
    produce identical bytes.

    Args:
        data (dict): The information to write.
        path (str): The file to write. Its extension picks the format.

    '''
    directory = os.path.dirname(path)
    if directory and not os.path.isdir(directory):
        os.makedirs(directory)

    if path.lower().endswith(('.yml', '.yaml')):
        with io.open(path, 'w', encoding='utf-8') as file_:
            yaml.safe_dump(_to_plain(data), file_, default_flow_style=False)
        return

    with io.open(path, 'w', encoding='utf-8') as file_:
        file_.write(to_json(data))


def to_json(data):
    '''str: The canonical JSON text of a document.'''
    return json.dumps(_to_plain(data), sort_keys=True, indent=2) + '\n'


def _to_plain(data):
    '''Convert ordered mappings and tuples into plain dicts and lists.'''
    if isinstance(data, dict):
        return {key: _to_plain(value) for key, value in data.items()}

    if isinstance(data, (list, tuple)):
        return [_to_plain(value) for value in data]

    return data


def check_keys(info, allowed, owner, required=()):
    '''Reject unknown or missing keys in one document mapping.

    Args:
        info (dict): The mapping to check.
        allowed (iterable[str]): Every key that may appear.
        owner (str): A description of the mapping, used in error messages.
        required (:obj:`iterable[str]`, optional): Keys that must appear.

    Raises:
        ValueError: If a key is unknown or a required key is missing.

    '''
    if not isinstance(info, dict):
        raise ValueError('Owner: "{owner}" must be a mapping, got "{obj!r}".'
                         ''.format(owner=owner, obj=info))

    unknown = sorted(set(info) - set(allowed))
    if unknown:
        raise ValueError('Owner: "{owner}" has unknown keys "{keys}". Options were, "{opt}".'
                         ''.format(owner=owner, keys=unknown, opt=sorted(allowed)))

    missing = [key for key in required if key not in info]
    if missing:
        raise ValueError('Owner: "{owner}" is missing keys "{keys}".'
                         ''.format(owner=owner, keys=missing))
