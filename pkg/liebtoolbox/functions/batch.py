#!/usr/bin/env python
"""Run many presets in a worker pool."""

from __future__ import absolute_import, division, print_function

import os
import sys
from multiprocessing import Pool

import mando
import numpy as np
import pandas as pd
from mando.rst_text_formatter import RSTHelpFormatter

from .. import lbutils, presets
from .run import run


def _task(args):
    name, out, seed = args
    try:
        run(name, out=out, seed=seed, quiet=True)
    except lbutils.ValidationError as e:
        return name, 2, str(e).strip("*\n ")
    except (lbutils.NumericalError, np.linalg.LinAlgError) as e:
        return name, 3, str(e).strip("*\n ")
    return name, 0, ""


def workers():
    """Pool size from LIEBTOOLBOX_WORKERS, default the CPU count."""
    value = os.environ.get("LIEBTOOLBOX_WORKERS", "")
    if value.strip() == "":
        return os.cpu_count() or 1
    return lbutils.check("batch", "LIEBTOOLBOX_WORKERS", value, int, "range", [1, None])


@mando.command("batch", formatter_class=RSTHelpFormatter, doctype="numpy")
@lbutils.doc(lbutils.docstrings)
def batch_cli(tag=None, name=None, out=None, seed=None, tablefmt="simple"):
    """Run every preset matching the selection in a worker pool.

    Each experiment writes into its own '<out>/<scenario>/' directory.  The
    number of worker processes is read from the LIEBTOOLBOX_WORKERS
    environment variable, by default the number of CPUs.  The exit status
    is the largest exit status of the experiments.

    Parameters
    ----------
    {tag}
    {name}
    {out}
    {seed}
    {tablefmt}

    """
    status = batch(tag=tag, name=name, out=out, seed=seed)
    lbutils.printiso(status, tablefmt=tablefmt)
    code = int(status["exit_code"].max()) if len(status) else 0
    if code:
        sys.exit(code)


@lbutils.validator(seed=[int, ["range", [0, None]], 1])
def batch(tag=None, name=None, out=None, seed=None):
    """Run every preset matching the selection in a worker pool."""
    names = [c.name for c in presets.select(tag=tag, name=name)]
    tasks = [(n, out, seed) for n in names]
    if tasks:
        with Pool(min(workers(), len(tasks))) as pool:
            results = pool.map(_task, tasks)
    else:
        results = []
    return pd.DataFrame(results, columns=["name", "exit_code", "message"])


batch.__doc__ = batch_cli.__doc__
