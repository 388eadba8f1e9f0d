#!/usr/bin/env python
# -*- coding: utf-8 -*-

from unittest import TestCase

import numpy as np
from numpy.testing import assert_allclose

from liebtoolbox import config, presets
from liebtoolbox.lbutils import ValidationError

GOOD = """
[scenario]
name = roundtrip_inversion
operation = inversion
seed = 3
tags = ring, inversion

[system]
sites = 4
topology = ring
particles = 1

[potential]
values = 0.3, -0.1, 0.2, -0.4

[tolerances]
residual_tol = 1e-11

[inversion]
step_damping = 0.5
"""


class TestParse(TestCase):
    def test_good(self):
        cfg = config.parse_config(GOOD)
        assert cfg.name == "roundtrip_inversion"
        assert cfg.operation == "inversion"
        assert cfg.seed == 3
        assert cfg.tags == ("ring", "inversion")
        assert cfg.inversion.step_damping == 0.5
        assert cfg.inversion.residual_tol == 1.0e-11
        assert_allclose(cfg.potential().values, [0.3, -0.1, 0.2, -0.4])
        assert cfg.interaction() is None
        assert cfg.pairs == 200
        text = GOOD.replace("operation = inversion", "operation = lieb_family") + "\n[study]\npairs = 12\n"
        assert config.parse_config(text).pairs == 12

    def test_overrides(self):
        cfg = config.parse_config(GOOD).with_overrides(seed=11, out="elsewhere")
        assert cfg.seed == 11
        assert cfg.output_dir == "elsewhere"
        assert "output_dir" not in cfg.to_dict()

    def test_name_from_source(self):
        text = GOOD.replace("name = roundtrip_inversion\n", "")
        assert config.parse_config(text, source="dir/my_run.cfg").name == "my_run"

    def test_bad_operation(self):
        with self.assertRaises(ValidationError):
            config.parse_config(GOOD.replace("operation = inversion", "operation = invert"))
        with self.assertRaises(ValidationError):
            config.parse_config(GOOD.replace("operation = inversion\n", ""))

    def test_unknown_section(self):
        with self.assertRaises(ValidationError):
            config.parse_config(GOOD + "\n[plotting]\nstyle = line\n")

    def test_not_ini(self):
        with self.assertRaises(ValidationError):
            config.parse_config("sites = 4\n")

    def test_bad_values(self):
        for old, new in (
            ("sites = 4", "sites = four"),
            ("sites = 4", "sites = 1"),
            ("particles = 1", "particles = 5"),
            ("topology = ring", "topology = torus"),
            ("values = 0.3, -0.1, 0.2, -0.4", "values = 0.3, -0.1, 0.2"),
            ("values = 0.3, -0.1, 0.2, -0.4", "values = 0.3, x, 0.2, 0.1"),
            ("step_damping = 0.5", "step_damping = 2"),
            ("seed = 3", "seed = -1"),
        ):
            with self.assertRaises(ValidationError):
                config.parse_config(GOOD.replace(old, new))

    def test_dense_pairwise_needs_matrix(self):
        with self.assertRaises(ValidationError):
            config.parse_config(GOOD + "\n[interaction]\nkind = dense_pairwise\n")
        matrix = ", ".join(["0, 1, 0, 1", "1, 0, 1, 0", "0, 1, 0, 1", "1, 0, 1, 0"])
        cfg = config.parse_config(
            GOOD + "\n[interaction]\nkind = dense_pairwise\nmatrix = {0}\n".format(matrix)
        )
        assert cfg.interaction().strength.shape == (4, 4)

    def test_asymmetric_matrix(self):
        matrix = ", ".join(["0, 1, 0, 0", "0, 0, 0, 0", "0, 0, 0, 0", "0, 0, 0, 0"])
        with self.assertRaises(ValidationError):
            config.parse_config(
                GOOD + "\n[interaction]\nkind = dense_pairwise\nmatrix = {0}\n".format(matrix)
            )

    def test_seeded_potential(self):
        text = GOOD.replace(
            "values = 0.3, -0.1, 0.2, -0.4", "preset = random\nscale = 0.5"
        )
        first = config.parse_config(text).potential().values
        second = config.parse_config(text).potential().values
        assert np.array_equal(first, second)
        assert np.abs(first).max() <= 0.5

    def test_density_choices(self):
        cfg = config.parse_config(GOOD)
        assert_allclose(cfg.density("uniform", None).values, [0.25] * 4)
        assert_allclose(
            cfg.density("0.1, 0.2, 0.3, 0.4", None).values, [0.1, 0.2, 0.3, 0.4]
        )

    def test_read_missing_file(self):
        with self.assertRaises(ValidationError):
            config.read_config("there_is_no_such_file.cfg")


class TestPresets(TestCase):
    def test_every_preset_parses(self):
        catalog = presets.catalog()
        for name in ("cancellation_4ring", "roundtrip_inversion", "uniform_ring_L32"):
            assert name in catalog
        for preset in catalog.values():
            cfg = preset.load()
            assert cfg.name == preset.name
            assert cfg.operation in config.OPERATIONS

    def test_unknown_preset(self):
        with self.assertRaises(ValidationError):
            presets.get_preset("no_such_preset")

    def test_select(self):
        names = [c.name for c in presets.select(tag="degenerate")]
        assert "cancellation_4ring" in names
        assert "uniform_ring_L4" not in names
        assert [c.name for c in presets.select(name="uniform_ring_L8")] == [
            "uniform_ring_L8"
        ]
