#!/usr/bin/env python
"""Exact lattice laboratory for density response, inversion and Lieb functionals."""

from __future__ import absolute_import, division, print_function

import os.path
import sys

import mando
import numpy as np

from . import lbutils
from .functions.batch import batch
from .functions.list_presets import list_presets
from .functions.run import run


@mando.command()
def about():
    """Display version number and system information."""
    lbutils.about(__name__)


def main():
    """Set debug and run mando.main function.

    Validation errors exit with status 2 and numerical failures with 3.
    """
    debug = os.path.exists("debug_liebtoolbox")
    if not debug:
        sys.tracebacklimit = 0
    try:
        mando.main()
    except lbutils.ValidationError as e:
        if debug:
            raise
        print(str(e), file=sys.stderr)
        sys.exit(2)
    except (lbutils.NumericalError, np.linalg.LinAlgError) as e:
        if debug:
            raise
        print(str(e), file=sys.stderr)
        sys.exit(3)


if __name__ == "__main__":
    main()
