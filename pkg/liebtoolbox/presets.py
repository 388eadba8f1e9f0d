"""Catalog of packaged experiment presets.

Presets are the ``presets/*.cfg`` files shipped with the package plus a
generated family of uniform rings.
"""

import os
from dataclasses import dataclass

import pandas as pd
import pkg_resources

from . import lbutils
from .config import parse_config

UNIFORM_RING_SIZES = (2, 4, 6, 8, 16, 32)

UNIFORM_RING_TEMPLATE = """
[scenario]
name = uniform_ring_L{sites}
operation = kernel
tags = ring, uniform, conditioning
description = Response kernel of one particle on the uniform {sites}-site ring.

[system]
sites = {sites}
topology = ring
particles = 1
"""


@dataclass(frozen=True)
class Preset:
    name: str
    text: str
    source: str

    def load(self):
        return parse_config(self.text, source=self.source)


def _packaged():
    presets = []
    for filename in sorted(pkg_resources.resource_listdir("liebtoolbox", "presets")):
        if not filename.endswith(".cfg"):
            continue
        path = pkg_resources.resource_filename("liebtoolbox", "presets/" + filename)
        with open(path) as fp:
            presets.append(Preset(os.path.splitext(filename)[0], fp.read(), path))
    return presets


def _generated():
    return [
        Preset(
            "uniform_ring_L{0}".format(sites),
            UNIFORM_RING_TEMPLATE.format(sites=sites),
            "uniform_ring_L{0}".format(sites),
        )
        for sites in UNIFORM_RING_SIZES
    ]


def catalog():
    """Every preset by name."""
    return {p.name: p for p in _packaged() + _generated()}


def get_preset(name):
    presets = catalog()
    try:
        return presets[name]
    except KeyError:
        raise lbutils.ValidationError(
            lbutils.error_wrapper(
                """
There is no configuration file or preset called "{0}".  Known presets are
{1}.
""".format(
                    name, sorted(presets)
                )
            )
        )


def select(tag=None, name=None):
    """Loaded configurations matching ``tag`` and ``name``."""
    configs = []
    for preset in catalog().values():
        if name is not None and preset.name != name:
            continue
        config = preset.load()
        if tag is not None and tag not in config.tags:
            continue
        configs.append(config)
    return configs


def catalog_frame(tag=None, name=None):
    rows = [
        {
            "name": c.name,
            "operation": c.operation,
            "sites": c.sites,
            "particles": c.particles,
            "tags": ",".join(c.tags),
            "description": c.description,
        }
        for c in select(tag=tag, name=name)
    ]
    return pd.DataFrame(
        rows, columns=["name", "operation", "sites", "particles", "tags", "description"]
    )
