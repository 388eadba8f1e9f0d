#!/usr/bin/env python
# -*- coding: utf-8 -*-

import warnings
from unittest import TestCase

import numpy as np
from numpy.testing import assert_allclose

from liebtoolbox.lattice import ensembles as ens
from liebtoolbox.lattice import lattice_grid as lg
from liebtoolbox.lattice import operators as ops
from liebtoolbox.lattice import response as rsp
from liebtoolbox.lattice import spectral_inverse as si
from liebtoolbox.lbutils import NearSingularWarning, ValidationError


def bundle_for(sites, particles, values=None, spacing=1.0):
    system = lg.LatticeSystem(sites, spacing=spacing, particle_count=particles)
    values = np.zeros(sites) if values is None else values
    return ops.solve(ops.HamiltonianSpec(system, lg.make_potential(values, system)))


class TestDecompose(TestCase):
    def test_two_site(self):
        dec = si.decompose(rsp.chi_nondegenerate(bundle_for(2, 1)))
        assert_allclose(dec.alphas, [0.5], atol=1.0e-12)
        assert abs(dec.null_value) < 1.0e-12
        f = dec.vectors[:, 0]
        assert_allclose(np.abs(f), [1.0 / np.sqrt(2.0)] * 2, atol=1.0e-12)
        assert f[0] * f[1] < 0

    def test_eigenpairs(self):
        rng = np.random.default_rng(13)
        bundle = bundle_for(6, 2, rng.normal(size=6), spacing=0.5)
        kernel = rsp.chi_nondegenerate(bundle)
        dec = si.decompose(kernel)
        h = bundle.system.spacing
        operator = -h * kernel.matrix
        for alpha, f in zip(dec.alphas, dec.vectors.T):
            assert np.abs(operator @ f - alpha * f).max() < 1.0e-10
            assert abs(f.sum()) < 1.0e-10
        assert_allclose(h * dec.vectors.T @ dec.vectors, np.eye(5), atol=1.0e-10)
        assert np.all(np.diff(dec.alphas) <= 0)
        assert dec.near_singular == ()

    def test_degenerate_ensemble_positive(self):
        dec = si.decompose(rsp.canonical_kernel(bundle_for(4, 2)))
        assert dec.alpha_min > 1.0e-13
        assert np.isfinite(dec.condition_ratio)

    def test_near_singular_warned(self):
        # sites 3 and 4 of the open chain sit behind a very high barrier
        system = lg.LatticeSystem(4, topology="open_chain", particle_count=1)
        spec = ops.HamiltonianSpec(system, lg.make_potential([0, 0, 1.0e4, 1.0e4], system))
        kernel = rsp.chi_nondegenerate(ops.solve(spec))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            dec = si.decompose(kernel)
        assert dec.near_singular
        assert any(issubclass(w.category, NearSingularWarning) for w in caught)

    def test_alphas_from_states(self):
        bundle = bundle_for(5, 2, [0.2, -0.3, 0.0, 0.4, -0.3])
        dec = si.decompose(rsp.chi_nondegenerate(bundle))
        assert_allclose(
            si.alphas_from_states(bundle, ens.canonical_weights(1), dec),
            dec.alphas,
            atol=1.0e-12,
        )
        bundle = bundle_for(4, 2)
        dec = si.decompose(rsp.canonical_kernel(bundle))
        assert_allclose(
            si.alphas_from_states(bundle, ens.canonical_weights(2), dec),
            dec.alphas,
            atol=1.0e-12,
        )


class TestInverse(TestCase):
    def setUp(self):
        rng = np.random.default_rng(14)
        self.bundle = bundle_for(6, 1, 0.5 * rng.normal(size=6))
        self.kernel = rsp.chi_nondegenerate(self.bundle)
        self.dec = si.decompose(self.kernel)
        self.rng = rng

    def test_roundtrip(self):
        system = self.bundle.system
        for _ in range(100):
            dw = lg.zero_mean_values(self.rng.normal(size=6), system)
            dm = rsp.apply_kernel(self.kernel, dw)
            back = si.apply_inverse(self.dec, dm)
            assert back.gauge == "zero_mean"
            assert np.abs(back.values - dw).max() < 1.0e-8

    def test_amplification(self):
        f = self.dec.vectors[:, -1]
        dm = 1.0e-3 * f
        dw = si.apply_inverse(self.dec, dm)
        system = self.bundle.system
        assert_allclose(
            lg.norm_2(dw), lg.norm_2(dm, system) / self.dec.alpha_min, rtol=1.0e-8
        )

    def test_regularization(self):
        dm = rsp.apply_kernel(self.kernel, lg.zero_mean_values(self.rng.normal(size=6), self.bundle.system))
        plain = si.apply_inverse(self.dec, dm)
        damped = si.apply_inverse(self.dec, dm, si.TikhonovPolicy(0.1))
        assert lg.norm_2(damped) < lg.norm_2(plain)
        gone = si.apply_inverse(self.dec, dm, si.TikhonovPolicy(1.0e12))
        assert lg.norm_inf(gone) < 1.0e-10
        with self.assertRaises(ValidationError):
            si.TikhonovPolicy(-1.0)

    def test_density_sum_checked(self):
        with self.assertRaises(ValidationError):
            si.apply_inverse(self.dec, np.full(6, 0.1))
        with self.assertRaises(ValidationError):
            si.apply_inverse(self.dec, np.zeros(5))

    def test_inverse_kernel_projects(self):
        system = self.bundle.system
        operator = -system.spacing * self.kernel.matrix
        product = system.spacing * si.inverse_kernel(self.dec) @ operator
        centering = np.eye(6) - np.full((6, 6), 1.0 / 6.0)
        assert_allclose(product, centering, atol=1.0e-8)


class TestConditioning(TestCase):
    def test_grows_with_size(self):
        result = si.conditioning_study(sizes=(4, 8, 16))
        assert result["increasing"]
        assert result["summary"]["sites"].tolist() == [4, 8, 16]
        assert len(result["spectrum"]) == 3 + 7 + 15
