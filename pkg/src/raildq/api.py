#!/usr/bin/env python
# -*- coding: utf-8 -*-

'''Expose common functionality.

Import from here instead of the sub-packages so that modules can move
without breaking tools that use this package.

'''

# IMPORT LOCAL LIBRARIES
from .base.loader import load_document
from .base.loader import dump_document
from .base.topology import Network
from .base.topology import NetworkError
from .base.topology import RunningTimeTable
from .base.topology import load_network
from .base.topology import synthetic_line
from .base.topology import load_network_file
from .base.topology import serialize_network
from .base.instance import Instance
from .base.instance import InstanceError
from .base.instance import load_instance
from .base.instance import save_instance
from .base.instance import validate_instance
from .base.simcore import SimState
from .base.simcore import apply_action
from .base.simcore import next_decision
from .base.simcore import legal_actions
from .base.simcore import detect_deadlock
from .base.simcore import weighted_delay
from .base.simcore import ContractViolation
from .helper.common import LOG_LEVEL_ENV_VAR
from .helper.common import LONG_TESTS_ENV_VAR
from .learning.encoding import EncoderConfig
from .learning.encoding import encode
from .learning.encoding import encode_local
from .learning.encoding import encode_global
from .learning.qmodel import DeepQ
from .learning.qmodel import LinearQ
from .learning.qmodel import Policy
from .learning.qmodel import load_model
from .learning.qmodel import save_model
from .learning.qmodel import select_action
from .learning.qmodel import NonFiniteLossError
from .learning.replay import Experience
from .learning.replay import BoundedMemory
from .learning.replay import TripartiteMemory
from .learning.replay import build_memory
from .experiment.harness import Agent
from .experiment.harness import ConfigError
from .experiment.harness import TrainingConfig
from .experiment.harness import train
from .experiment.harness import evaluate
from .experiment.harness import build_agent
from .experiment.harness import run_episode
from .experiment.harness import window_counts
from .experiment.benchmark import EvaluationStats
from .experiment.benchmark import summarize
from .experiment.benchmark import performance_profile
from .experiment.traingen import fixture
from .experiment.traingen import get_profile
from .experiment.traingen import fixture_network
from .experiment.traingen import sample_instance
from .experiment.traingen import generate_instances


__all__ = [
    'Agent',
    'BoundedMemory',
    'ConfigError',
    'ContractViolation',
    'DeepQ',
    'EncoderConfig',
    'EvaluationStats',
    'Experience',
    'Instance',
    'InstanceError',
    'LOG_LEVEL_ENV_VAR',
    'LONG_TESTS_ENV_VAR',
    'LinearQ',
    'Network',
    'NetworkError',
    'NonFiniteLossError',
    'Policy',
    'RunningTimeTable',
    'SimState',
    'TrainingConfig',
    'TripartiteMemory',
    'apply_action',
    'build_agent',
    'build_memory',
    'detect_deadlock',
    'dump_document',
    'encode',
    'encode_global',
    'encode_local',
    'evaluate',
    'fixture',
    'fixture_network',
    'generate_instances',
    'get_profile',
    'legal_actions',
    'load_document',
    'load_instance',
    'load_model',
    'load_network',
    'load_network_file',
    'next_decision',
    'performance_profile',
    'run_episode',
    'sample_instance',
    'save_instance',
    'save_model',
    'select_action',
    'serialize_network',
    'summarize',
    'synthetic_line',
    'train',
    'validate_instance',
    'weighted_delay',
    'window_counts',
]
