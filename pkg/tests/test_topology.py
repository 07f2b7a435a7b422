#!/usr/bin/env python
# -*- coding: utf-8 -*-

'''Test loading networks and walking their routes.'''

# IMPORT STANDARD LIBRARIES
import copy
import collections
import unittest

# IMPORT RAILDQ LIBRARIES
from raildq.base import topology
from raildq.helper import common
from raildq.experiment import traingen

# IMPORT LOCAL LIBRARIES
from . import common_test

_Train = collections.namedtuple('_Train', 'id head direction destination')


def _small_document():
    '''dict: Two stopping points joined by one track.'''
    return {
        'resources': [
            {'id': 'L', 'kind': common.STOPPING_POINT, 'length_ft': 2000},
            {'id': 't1', 'kind': common.TRACK, 'length_ft': 5000},
            {'id': 'R', 'kind': common.STOPPING_POINT, 'length_ft': 2000},
        ],
        'adjacency': [
            {'from': 'L', 'to': 't1', 'direction': common.LEFT_TO_RIGHT},
            {'from': 't1', 'to': 'R', 'direction': common.LEFT_TO_RIGHT},
        ],
    }


class LoadNetworkTestCase(common_test.TempTestCase):

    '''Test building networks from documents.'''

    def test_desk_line(self):
        '''Load the five-station line and check its shape.'''
        network = traingen.fixture_network('desk-line')

        self.assertEqual(14, len(network))
        self.assertEqual(['a', 'b', 'c', 'd', 'e'], list(network.parallel_groups))
        self.assertEqual(('a1', 'a2'), network.group_members('a1'))
        self.assertEqual(('t1', ), network.group_members('t1'))
        self.assertEqual(('t1', ), network.successors('a1', common.LEFT_TO_RIGHT))
        self.assertEqual(('b1', 'b2'), network.successors('t1', common.LEFT_TO_RIGHT))
        self.assertEqual(('a1', 'a2'), network.successors('t1', common.RIGHT_TO_LEFT))
        self.assertEqual(('e1', 'e2'), network.terminals(common.LEFT_TO_RIGHT))
        self.assertEqual(('a1', 'a2'), network.terminals(common.RIGHT_TO_LEFT))

    def test_positions(self):
        '''Give parallel members one shared line position.'''
        network = traingen.fixture_network('desk-line')

        self.assertEqual(0, network.positions['a2'])
        self.assertEqual(1, network.positions['t1'])
        self.assertEqual(('b1', 'b2'), network.members_at(2))

    def test_default_control_points(self):
        '''Make every resource a control point when none are listed.'''
        network = topology.load_network(_small_document())

        self.assertEqual(frozenset(['L', 't1', 'R']), network.control_points)
        self.assertEqual(frozenset(), network.explicit_control_points)
        self.assertEqual(common.DEFAULT_HEADWAY_S, network.headway)

    def test_explicit_control_points(self):
        '''Only request decisions where the document says so.'''
        document = _small_document()
        document['control_points'] = ['t1']
        network = topology.load_network(document)

        self.assertTrue(network.is_control_point('t1'))
        self.assertFalse(network.is_control_point('L'))

    def test_load_file(self):
        '''Load a network from a JSON file.'''
        path = self.write_json(_small_document(), 'network.json')
        self.assertEqual(('L', 't1', 'R'), topology.load_network_file(path).order)

    def test_serialize(self):
        '''Write a network back out and load an equal one.'''
        network = traingen.fixture_network('figure')
        document = topology.serialize_network(network)
        again = topology.load_network(document)

        self.assertEqual(network.order, again.order)
        self.assertEqual(document, topology.serialize_network(again))
        for resource_id in network.order:
            for direction in common.DIRECTIONS:
                self.assertEqual(network.successors(resource_id, direction),
                                 again.successors(resource_id, direction))


class NetworkErrorTestCase(unittest.TestCase):

    '''Test that broken documents are rejected with a useful message.'''

    def _assert_error(self, document, *words):
        '''Load a document, expect a NetworkError and check its message.'''
        with self.assertRaises(topology.NetworkError) as context:
            topology.load_network(document)

        for word in words:
            self.assertIn(word, str(context.exception))

    def test_unknown_key(self):
        '''Reject an unknown resource field.'''
        document = _small_document()
        document['resources'][1]['speed'] = 10
        self._assert_error(document, 't1', 'speed')

    def test_bad_kind(self):
        '''Reject an unknown resource kind.'''
        document = _small_document()
        document['resources'][1]['kind'] = 'tunnel'
        self._assert_error(document, 't1', 'kind')

    def test_bad_length(self):
        '''Reject a resource without a positive length.'''
        document = _small_document()
        document['resources'][0]['length_ft'] = 0
        self._assert_error(document, 'L', 'length_ft')

    def test_dangling_adjacency(self):
        '''Reject adjacency that names a missing resource.'''
        document = _small_document()
        document['adjacency'].append({'from': 'R', 'to': 'X', 'direction': common.LEFT_TO_RIGHT})
        self._assert_error(document, 'X', 'dangling')

    def test_overlapping_groups(self):
        '''Reject a resource listed in two parallel groups.'''
        document = _small_document()
        document['resources'][0]['parallel_group'] = 'one'
        duplicate = copy.deepcopy(document['resources'][0])
        duplicate['parallel_group'] = 'two'
        document['resources'].append(duplicate)
        self._assert_error(document, 'L', 'overlapping')

    def test_duplicate_resource(self):
        '''Reject a resource listed twice.'''
        document = _small_document()
        document['resources'].append(copy.deepcopy(document['resources'][1]))
        self._assert_error(document, 't1', 'duplicate')

    def test_cycle(self):
        '''Reject a left-to-right adjacency with a cycle.'''
        document = _small_document()
        document['adjacency'].append({'from': 'R', 'to': 'L', 'direction': common.LEFT_TO_RIGHT})
        self._assert_error(document, 'cycle')

    def test_self_successor(self):
        '''Reject a resource that succeeds itself.'''
        document = _small_document()
        document['adjacency'].append({'from': 'R', 'to': 'R', 'direction': common.LEFT_TO_RIGHT})
        self._assert_error(document, 'R')

    def test_bad_headway(self):
        '''Reject a negative headway.'''
        document = _small_document()
        document['headway_s'] = -1
        self._assert_error(document, 'headway_s')

    def test_unknown_route_exclusion(self):
        '''Reject route exclusion on a group that does not exist.'''
        document = _small_document()
        document['route_exclusion'] = {'z': True}
        self._assert_error(document, 'z', 'route_exclusion')

    def test_resources_not_a_list(self):
        '''Reject resources given as a mapping instead of a list.'''
        document = _small_document()
        document['resources'] = {'L': document['resources'][0]}
        self._assert_error(document, 'resources', 'list')

    def test_resources_null(self):
        '''Reject an empty resources field.'''
        document = _small_document()
        document['resources'] = None
        self._assert_error(document, 'resources', 'list')

    def test_adjacency_not_a_list(self):
        '''Reject adjacency given as a string.'''
        document = _small_document()
        document['adjacency'] = 'L-t1-R'
        self._assert_error(document, 'adjacency', 'list')

    def test_route_exclusion_not_a_mapping(self):
        '''Reject route exclusion given as a list.'''
        document = _small_document()
        document['route_exclusion'] = ['z']
        self._assert_error(document, 'route_exclusion', 'mapping')

    def test_not_a_mapping(self):
        '''Reject a document that is not a mapping.'''
        with self.assertRaises(topology.NetworkError):
            topology.load_network(['resources'])


class RouteTestCase(unittest.TestCase):

    '''Test successor ranking and running times.'''

    def setUp(self):
        '''Use the five-station line with one train.'''
        self.network = traingen.fixture_network('desk-line')
        self.rt = topology.RunningTimeTable(self.network, {'T1': 73.0})

    def test_default_running_time(self):
        '''Divide the resource length by the train speed.'''
        self.assertAlmostEqual(8000.0 / 73.0, self.rt.seconds('T1', 't1'))

    def test_explicit_running_time(self):
        '''Prefer an explicit entry over the default.'''
        rt = topology.RunningTimeTable(self.network, {'T1': 73.0}, {('T1', 'b2'): 10.0})
        self.assertEqual(10.0, rt.seconds('T1', 'b2'))
        self.assertEqual(['b2', 'b1'], topology.ranked_successors(
            self.network, rt, 'T1', 't1', common.LEFT_TO_RIGHT, 'e1'))

    def test_bad_running_time(self):
        '''Reject a running time that is not positive.'''
        with self.assertRaises(ValueError):
            topology.RunningTimeTable(self.network, {'T1': 73.0}, {('T1', 'b2'): 0.0})

    def test_ties_by_id(self):
        '''Break running time ties with the lowest resource id.'''
        self.assertEqual(['b1', 'b2'], topology.ranked_successors(
            self.network, self.rt, 'T1', 't1', common.LEFT_TO_RIGHT, 'e1'))

        train = _Train('T1', 't1', common.LEFT_TO_RIGHT, 'e1')
        self.assertEqual('b1', topology.best_next(self.network, self.rt, train))
        self.assertEqual(['b2'], topology.reachable_next(self.network, self.rt, train))

    def test_best_chain(self):
        '''Walk the best resources and stop after the destination group.'''
        train = _Train('T1', 'a1', common.LEFT_TO_RIGHT, 'e1')

        self.assertEqual(['t1', 'b1', 't2', 'c1', 't3'],
                         topology.best_chain(self.network, self.rt, train, 5))
        self.assertEqual(['t1', 'b1', 't2', 'c1', 't3', 'd1', 't4', 'e1'],
                         topology.best_chain(self.network, self.rt, train, 20))

    def test_best_chain_arrived(self):
        '''Return nothing for a train already in its destination group.'''
        train = _Train('T1', 'e2', common.LEFT_TO_RIGHT, 'e1')
        self.assertEqual([], topology.best_chain(self.network, self.rt, train, 5))

    def test_no_successor(self):
        '''Fail to find a next resource at the end of the line.'''
        train = _Train('T1', 'e1', common.LEFT_TO_RIGHT, 'e1')

        with self.assertRaises(ValueError):
            topology.best_next(self.network, self.rt, train)

    def test_destination_group(self):
        '''Arrive anywhere in the destination's parallel group.'''
        self.assertEqual(frozenset(['e1', 'e2']), topology.destination_group(self.network, 'e1'))

    def test_parallel_count(self):
        '''Count the parallel resources of a resource.'''
        self.assertEqual(1, topology.parallel_count(self.network, 'a1'))
        self.assertEqual(0, topology.parallel_count(self.network, 't1'))

        with self.assertRaises(KeyError):
            topology.parallel_count(self.network, 'missing')


class SyntheticLineTestCase(unittest.TestCase):

    '''Test the generated benchmark line.'''

    def test_default_line(self):
        '''Build 140 resources, 42 of them in two-member stations.'''
        network = topology.synthetic_line()

        self.assertEqual(140, len(network))
        self.assertEqual(21, len(network.parallel_groups))
        self.assertEqual(42, sum(len(members) for members in network.parallel_groups.values()))
        self.assertEqual(('S1a', 'S1b'), network.terminals(common.RIGHT_TO_LEFT))
        self.assertEqual(('S21a', 'S21b'), network.terminals(common.LEFT_TO_RIGHT))

    def test_bad_parallel_count(self):
        '''Refuse an odd parallel resource count.'''
        with self.assertRaises(ValueError):
            topology.synthetic_line(parallel=5)
