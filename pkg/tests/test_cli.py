#!/usr/bin/env python
# -*- coding: utf-8 -*-

import json
import os
import shlex
import subprocess
import tempfile
from unittest import TestCase, mock

import pandas as pd

from liebtoolbox import lbutils
from liebtoolbox.functions.batch import batch, workers
from liebtoolbox.functions.list_presets import list_presets
from liebtoolbox.functions.run import run

from . import capture

BAD = """
[scenario]
name = bad
operation = spectrum

[system]
sites = 4
particles = 7
"""


class TestRun(TestCase):
    def test_spectrum_preset(self):
        with tempfile.TemporaryDirectory() as out:
            outcome, directory = run("spectrum_4ring", out=out, quiet=True)
            assert directory == os.path.join(out, "spectrum_4ring")
            with open(os.path.join(directory, "result.json")) as fp:
                payload = json.load(fp)
            assert payload["operation"] == "spectrum"
            assert payload["result"]["ground_degeneracy"] == 2
            assert abs(payload["result"]["ground_energy"] + 2.0) < 1.0e-12
            for name in ("metadata.json", "energies.csv", "density.csv"):
                assert os.path.exists(os.path.join(directory, name))
            density = pd.read_csv(os.path.join(directory, "density.csv"))
            assert density.columns.tolist() == ["site", "density"]
            assert outcome.summary()["quantity"].tolist() == sorted(
                outcome.summary()["quantity"].tolist()
            )

    def test_rerun_is_byte_identical(self):
        with tempfile.TemporaryDirectory() as out:
            _, directory = run("cancellation_4ring", out=out, quiet=True)
            with open(os.path.join(directory, "result.json"), "rb") as fp:
                first = fp.read()
            run("cancellation_4ring", out=out, quiet=True)
            with open(os.path.join(directory, "result.json"), "rb") as fp:
                second = fp.read()
            assert first == second
            assert json.loads(first)["result"]["verdict"] == "cancels"

    def test_unequal_weights_contrast(self):
        with tempfile.TemporaryDirectory() as out:
            four, _ = run("cancellation_4ring", out=out, quiet=True)
            six, _ = run("cancellation_6ring", out=out, quiet=True)
        assert four.result["verdict"] == "cancels"
        assert not four.result["unequal_weights_survive"]
        assert six.result["verdict"] == "cancels"
        assert six.result["unequal_weights_survive"]

    def test_degenerate_remainder_preset(self):
        with tempfile.TemporaryDirectory() as out:
            outcome, _ = run("degenerate_4ring_remainder", out=out, quiet=True)
        assert outcome.result["verdict"] == "decays"
        assert outcome.result["loglog_slope"] >= 0.8

    def test_seed_override(self):
        with tempfile.TemporaryDirectory() as out:
            outcome, directory = run("cancellation_4ring", out=out, seed=5, quiet=True)
            with open(os.path.join(directory, "result.json")) as fp:
                assert json.load(fp)["seed"] == 5
            assert outcome.result["max_equal_weights"] < 1.0e-10

    def test_inversion_preset(self):
        with tempfile.TemporaryDirectory() as out:
            outcome, _ = run("roundtrip_inversion", out=out, quiet=True)
            assert outcome.result["converged"]
            assert outcome.result["error_inf"] < 1.0e-8

    def test_config_file(self):
        with tempfile.TemporaryDirectory() as out:
            path = os.path.join(out, "bad.cfg")
            with open(path, "w") as fp:
                fp.write(BAD)
            with self.assertRaises(lbutils.ValidationError):
                run(path, out=out, quiet=True)
            with open(path, "w") as fp:
                fp.write(BAD.replace("particles = 7", "particles = 1"))
            outcome, directory = run(path, out=out, quiet=True)
            assert directory == os.path.join(out, "bad")
            assert outcome.result["ground_degeneracy"] == 1

    def test_bad_seed(self):
        with self.assertRaises(lbutils.ValidationError):
            run("spectrum_4ring", seed=-3, quiet=True)


class TestListPresets(TestCase):
    def test_all(self):
        frame = list_presets()
        assert "uniform_ring_L32" in frame["name"].tolist()
        assert frame.columns.tolist() == [
            "name",
            "operation",
            "sites",
            "particles",
            "tags",
            "description",
        ]

    def test_filters(self):
        assert list_presets(name="cancellation_4ring")["operation"].tolist() == [
            "cancellation"
        ]
        tagged = list_presets(tag="acceptance")
        assert "cancellation_4ring" in tagged["name"].tolist()
        assert len(list_presets(name="no_such_preset")) == 0

    def test_print(self):
        out = capture.capture(lbutils.printiso, list_presets(name="spectrum_4ring"))
        assert b"spectrum_4ring" in out


class TestBatch(TestCase):
    def test_workers(self):
        with mock.patch.dict(os.environ, {"LIEBTOOLBOX_WORKERS": "3"}):
            assert workers() == 3
        with mock.patch.dict(os.environ, {"LIEBTOOLBOX_WORKERS": "0"}):
            with self.assertRaises(lbutils.ValidationError):
                workers()

    def test_batch(self):
        with tempfile.TemporaryDirectory() as out:
            with mock.patch.dict(os.environ, {"LIEBTOOLBOX_WORKERS": "1"}):
                status = batch(name="spectrum_4ring", out=out)
            assert status["exit_code"].tolist() == [0]
            assert os.path.exists(os.path.join(out, "spectrum_4ring", "result.json"))


class TestCommandLine(TestCase):
    def test_validation_exit_code(self):
        with tempfile.TemporaryDirectory() as out:
            path = os.path.join(out, "bad.cfg")
            with open(path, "w") as fp:
                fp.write(BAD)
            args = shlex.split("liebtoolbox run {0} --out {1}".format(path, out))
            proc = subprocess.Popen(args, stdout=subprocess.PIPE, stderr=subprocess.PIPE)
            _, err = proc.communicate()
            assert proc.returncode == 2
            assert b"particle" in err

    def test_unknown_preset_exit_code(self):
        args = shlex.split("liebtoolbox run no_such_preset.cfg --quiet")
        proc = subprocess.Popen(args, stdout=subprocess.PIPE, stderr=subprocess.PIPE)
        proc.communicate()
        assert proc.returncode == 2

    def test_list_presets(self):
        args = shlex.split("liebtoolbox list-presets --name spectrum_4ring")
        out = subprocess.Popen(args, stdout=subprocess.PIPE).communicate()[0]
        assert b"spectrum_4ring" in out
