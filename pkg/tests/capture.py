#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
Capture function
----------------------------------

"""

import sys
from io import StringIO


def capture(func, *args, **kwds):
    """Call func and return what it printed as utf8 bytes."""
    saved = sys.stdout
    sys.stdout = StringIO()
    try:
        func(*args, **kwds)
        out = sys.stdout.getvalue()
    finally:
        sys.stdout = saved
    return bytes(out, "utf8")
