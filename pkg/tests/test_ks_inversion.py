#!/usr/bin/env python
# -*- coding: utf-8 -*-

import warnings
from unittest import TestCase

import numpy as np
from numpy.testing import assert_allclose

from liebtoolbox.lattice import ks_inversion as ks
from liebtoolbox.lattice import lattice_grid as lg
from liebtoolbox.lbutils import (
    ConvergenceWarning,
    RepresentabilityWarning,
    ValidationError,
)

V_STAR = [0.3, -0.1, 0.2, -0.4]


def forward(values, sites=4, particles=1, topology="ring"):
    system = lg.LatticeSystem(sites, topology=topology, particle_count=particles)
    return ks.forward_density(lg.make_potential(values, system))


class TestForward(TestCase):
    def test_uniform(self):
        assert_allclose(forward(np.zeros(4), particles=2).values, [0.5] * 4, atol=1.0e-12)
        assert_allclose(forward(np.zeros(6), sites=6).values, [1.0 / 6.0] * 6, atol=1.0e-12)

    def test_gauge_invariant(self):
        base = forward(V_STAR).values
        assert_allclose(forward(np.array(V_STAR) + 3.0).values, base, atol=1.0e-12)

    def test_deep_well(self):
        assert forward([-5.0, 5.0], sites=2).values[0] > 0.99


class TestInvert(TestCase):
    def test_roundtrip(self):
        report = ks.invert(forward(V_STAR))
        assert report.converged
        assert report.verdict == "converged"
        assert report.residual < 1.0e-10
        assert np.abs(report.potential.values - np.array(V_STAR)).max() < 1.0e-8
        assert report.potential.gauge == "zero_mean"
        assert report.residual_monotone(0)

    def test_zero_potential_target(self):
        report = ks.invert(forward(np.zeros(4)))
        assert report.converged
        assert report.iterations <= 2
        assert lg.norm_inf(report.potential) < 1.0e-10

    def test_degenerate_uniform_target(self):
        system = lg.LatticeSystem(4, particle_count=2)
        report = ks.invert(lg.uniform_density(system))
        assert report.converged
        assert lg.norm_inf(report.potential) < 1.0e-10

    def test_initial_guess_gauge(self):
        target = forward(V_STAR)
        system = target.system
        guess = lg.make_potential([0.25, 0.0, -0.25, 0.0], system)
        first = ks.invert(target, initial_guess=guess)
        second = ks.invert(target, initial_guess=guess.shifted(4.0))
        assert np.array_equal(first.potential.values, second.potential.values)
        assert first.iterations == second.iterations
        assert first.residual_trace == second.residual_trace

    def test_level_crossing_recorded(self):
        # the uniform start on the 4-ring with N = 2 is degenerate, the target is not
        report = ks.invert(forward(V_STAR, particles=2))
        crossings = [e for e in report.events if e["event"] == "level_crossing"]
        assert crossings[0]["iteration"] == 1
        assert crossings[0]["ground_degeneracy"] == [2, 1]

    def test_non_representable_refused(self):
        system = lg.LatticeSystem(2)
        with self.assertRaises(ValidationError):
            ks.invert(lg.make_density([1.2, -0.2], system))
        with self.assertRaises(ValidationError):
            ks.invert(lg.make_density([0.6, 0.6], system))

    def test_zero_density_target(self):
        system = lg.LatticeSystem(4, topology="open_chain", particle_count=1)
        target = lg.make_density([0.0, 0.5, 0.3, 0.2], system)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            report = ks.invert(target, ks.InversionConfig(max_iterations=20))
        categories = [w.category for w in caught]
        assert RepresentabilityWarning in categories
        assert ConvergenceWarning in categories
        assert report.verdict == "non_invertible_candidate"
        assert report.verdict in ks.VERDICTS
        assert report.zero_sites == (0,)
        assert report.iterations == 20

    def test_trace_frame(self):
        report = ks.invert(forward(V_STAR))
        frame = report.trace_frame()
        assert len(frame) == report.iterations
        assert frame.columns.tolist() == [
            "iteration",
            "residual",
            "step_inf",
            "step_2",
            "alpha_min",
            "mu",
            "damping",
        ]
        payload = report.to_dict()
        assert payload["verdict"] == "converged"
        assert len(payload["traces"]["mu"]) == report.iterations

    def test_config_checked(self):
        with self.assertRaises(ValidationError):
            ks.InversionConfig(step_damping=1.5)
        with self.assertRaises(ValidationError):
            ks.InversionConfig(max_iterations=0)
        with self.assertRaises(ValidationError):
            ks.InversionConfig(mu_ratio=2.0)
        cfg = ks.InversionConfig(mu0=1.0e-3, mu_ratio=0.5, mu_floor=1.0e-5)
        assert cfg.mu(0) == 1.0e-3
        assert cfg.mu(40) == 1.0e-5


class TestFamily(TestCase):
    def test_roundtrip_family(self):
        result = ks.roundtrip_family(draws=14, seed=7, cfg=ks.InversionConfig(step_damping=0.5))
        assert result["max_error_inf"] < 1.0e-6
        assert result["max_residual"] < 1.0e-10
        assert result["converged_fraction"] == 1.0
        assert result["monotone_fraction"] >= 0.95
        assert set(zip(result["table"]["sites"], result["table"]["particles"])) == {
            (2, 1),
            (4, 1),
            (4, 2),
            (6, 1),
            (6, 2),
            (8, 1),
            (8, 2),
        }

    def test_filled_lattices_refused(self):
        with self.assertRaises(ValidationError):
            ks.roundtrip_family(sizes=(2,), particles=(2,), draws=1)


class TestProbe(TestCase):
    def test_forward_target_is_smooth(self):
        target = forward(V_STAR, topology="open_chain")
        probe = ks.representability_probe(target)
        assert probe.verdict == "smooth"
        assert len(probe.stages) == len(ks.PROBE_SCHEDULE)
        assert probe.stages[-1].drift < 1.0e-8

    def test_zero_density_is_non_smooth(self):
        system = lg.LatticeSystem(4, topology="open_chain", particle_count=1)
        target = lg.make_density([0.0, 0.5, 0.3, 0.2], system)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RepresentabilityWarning)
            probe = ks.representability_probe(target, ks.InversionConfig(max_iterations=40))
        assert probe.verdict == "non_smooth"
        assert probe.frame().columns.tolist() == [
            "residual_tol",
            "residual",
            "drift",
            "converged",
            "iterations",
        ]
