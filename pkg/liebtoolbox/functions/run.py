#!/usr/bin/env python
"""Run one experiment configuration."""

from __future__ import absolute_import, division, print_function

import datetime
import os

import mando
from mando.rst_text_formatter import RSTHelpFormatter

from .. import experiments, lbutils, presets
from ..config import read_config


@mando.command("run", formatter_class=RSTHelpFormatter, doctype="numpy")
@lbutils.doc(lbutils.docstrings)
def run_cli(config, out=None, seed=None, quiet=False):
    """Run the experiment described by a configuration file or preset.

    Writes 'result.json' (sorted keys, no timestamps), 'metadata.json' and
    one CSV file per table into '<out>/<scenario>/'.  The exit status is 0
    on success, including inversions and searches that report
    converged=false, 2 on validation errors and 3 on numerical failures.

    Parameters
    ----------
    {config}
    {out}
    {seed}
    {quiet}

    """
    outcome, _ = run(config, out=out, seed=seed, quiet=quiet)
    if not quiet:
        lbutils.printiso(outcome.summary(), float_format=".6g")


def load_config(config):
    """ExperimentConfig from a path, or from the preset named by its stem."""
    if os.path.exists(config):
        return read_config(config)
    stem = os.path.splitext(os.path.basename(config))[0]
    return presets.get_preset(stem).load()


def write_outcome(cfg, outcome):
    """Write the payload, metadata and tables of one experiment."""
    directory = lbutils.ensure_dir(os.path.join(cfg.output_dir, cfg.name))
    lbutils.write_json(
        {
            "scenario": cfg.name,
            "operation": cfg.operation,
            "seed": cfg.seed,
            "config": cfg.to_dict(),
            "result": outcome.result,
        },
        os.path.join(directory, "result.json"),
    )
    for name, frame in sorted(outcome.tables.items()):
        lbutils.write_csv(frame, os.path.join(directory, "{0}.csv".format(name)))
    metadata = {
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "source": cfg.source,
        "tables": sorted(outcome.tables),
    }
    metadata.update(lbutils.platform_info("liebtoolbox"))
    lbutils.write_json(metadata, os.path.join(directory, "metadata.json"))
    return directory


@lbutils.validator(
    seed=[int, ["range", [0, None]], 1],
    quiet=[bool, ["domain", [True, False]], 1],
)
def run(config, out=None, seed=None, quiet=False):
    """Run the experiment described by a configuration file or preset."""
    lbutils.quiet_warnings(quiet)
    cfg = load_config(config).with_overrides(seed=seed, out=out)
    outcome = experiments.execute(cfg)
    return outcome, write_outcome(cfg, outcome)


run.__doc__ = run_cli.__doc__
