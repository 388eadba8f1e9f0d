#!/usr/bin/env python
"""List the packaged experiment presets."""

from __future__ import absolute_import, division, print_function

import mando
from mando.rst_text_formatter import RSTHelpFormatter

from .. import lbutils, presets


@mando.command("list-presets", formatter_class=RSTHelpFormatter, doctype="numpy")
@lbutils.doc(lbutils.docstrings)
def list_presets_cli(tag=None, name=None, tablefmt="simple"):
    """Print the preset catalog.

    The catalog holds the uniform rings with L in 2, 4, 6, 8, 16 and 32,
    biased chains, the degenerate 4-site ring with two particles, the
    zero-density chain target and the conditioning family.

    Parameters
    ----------
    {tag}
    {name}
    {tablefmt}

    """
    lbutils.printiso(list_presets(tag=tag, name=name), tablefmt=tablefmt)


def list_presets(tag=None, name=None):
    """Print the preset catalog."""
    return presets.catalog_frame(tag=tag, name=name)


list_presets.__doc__ = list_presets_cli.__doc__
