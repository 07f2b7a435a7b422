#!/usr/bin/env python
# -*- coding: utf-8 -*-

'''A single-track train dispatching laboratory.'''

# IMPORT STANDARD LIBRARIES
import logging

__version__ = "0.1.0"

logging.getLogger(__name__).addHandler(logging.NullHandler())
