#!/usr/bin/env python
# -*- coding: utf-8 -*-

'''Run the command line with ``python -m raildq``.'''

# IMPORT STANDARD LIBRARIES
import sys

# IMPORT LOCAL LIBRARIES
from .cli import main


if __name__ == '__main__':
    sys.exit(main())
