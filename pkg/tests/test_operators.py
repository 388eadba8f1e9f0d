#!/usr/bin/env python
# -*- coding: utf-8 -*-

from functools import reduce
from unittest import TestCase, mock

import numpy as np
from numpy.testing import assert_allclose
from scipy import linalg

from liebtoolbox.lattice import lattice_grid as lg
from liebtoolbox.lattice import operators as ops
from liebtoolbox.lbutils import CapacityError, SolverError, ValidationError

REAL_EIGH = linalg.eigh


def spec_for(sites, particles, values=None, topology="ring", interaction=None):
    system = lg.LatticeSystem(sites, topology=topology, particle_count=particles)
    values = np.zeros(sites) if values is None else values
    return ops.HamiltonianSpec(
        system, lg.make_potential(values, system), interaction=interaction
    )


def fock_hamiltonian(system, hopping, potential, interaction):
    """Full Fock space Hamiltonian from explicit Jordan-Wigner matrices."""
    sites = system.sites
    eye = np.eye(2)
    zsign = np.diag([1.0, -1.0])
    lower = np.array([[0.0, 1.0], [0.0, 0.0]])
    ann = []
    for i in range(sites):
        factors = [zsign] * i + [lower] + [eye] * (sites - i - 1)
        ann.append(reduce(np.kron, factors))
    num = [a.T @ a for a in ann]
    ham = np.zeros((2 ** sites, 2 ** sites))
    for i, j in system.bonds():
        ham -= hopping * (ann[i].T @ ann[j] + ann[j].T @ ann[i])
    for i in range(sites):
        ham += potential[i] * num[i]
        for j in range(i + 1, sites):
            ham += interaction[i, j] * num[i] @ num[j]
    total = np.diag(sum(num))
    keep = np.flatnonzero(np.isclose(total, system.particle_count))
    return ham[np.ix_(keep, keep)]


class TestBasis(TestCase):
    def test_ascending_masks(self):
        system = lg.LatticeSystem(4, particle_count=2)
        masks = ops.many_body_basis(system)
        assert masks.tolist() == [3, 5, 6, 9, 10, 12]
        assert ops.occupation_matrix(system).sum(axis=1).tolist() == [2.0] * 6

    def test_capacity_guard(self):
        with self.assertRaises(CapacityError):
            ops.solve(spec_for(20, 10))


class TestHamiltonian(TestCase):
    def test_two_site(self):
        ham = ops.build_hamiltonian(spec_for(2, 1))
        assert_allclose(ham, [[0.0, -1.0], [-1.0, 0.0]])
        ham = ops.build_hamiltonian(spec_for(2, 1, [0.5, -0.5]))
        assert_allclose(ham, [[0.5, -1.0], [-1.0, -0.5]])
        bundle = ops.solve(spec_for(2, 1))
        assert_allclose(bundle.energies, [-1.0, 1.0], atol=1.0e-12)
        assert bundle.ground_degeneracy == 1
        assert_allclose(bundle.gap, 2.0)

    def test_symmetric(self):
        rng = np.random.default_rng(4)
        for topology in ("ring", "open_chain"):
            spec = spec_for(6, 3, rng.normal(size=6), topology=topology)
            ham = ops.build_hamiltonian(spec)
            assert np.array_equal(ham, ham.T)

    def test_three_site_ring(self):
        bundle = ops.solve(spec_for(3, 1))
        assert_allclose(bundle.energies, [-2.0, 1.0, 1.0], atol=1.0e-12)
        assert bundle.ground_degeneracy == 1

    def test_degenerate_four_ring(self):
        bundle = ops.solve(spec_for(4, 2))
        assert_allclose(bundle.ground_energy, -2.0, atol=1.0e-12)
        assert bundle.ground_degeneracy == 2
        levels = ops.single_particle_levels(bundle.system, 1.0, np.zeros(4))
        assert_allclose(levels, [-2.0, 0.0, 0.0, 2.0], atol=1.0e-12)
        assert_allclose(levels[:2].sum(), bundle.ground_energy, atol=1.0e-12)

    def test_noninteracting_matches_aufbau(self):
        rng = np.random.default_rng(5)
        for sites, particles, topology in ((5, 2, "ring"), (6, 3, "open_chain")):
            v = rng.normal(size=sites)
            bundle = ops.solve(spec_for(sites, particles, v, topology=topology))
            levels = ops.single_particle_levels(bundle.system, 1.0, v)
            assert_allclose(
                bundle.ground_energy, levels[:particles].sum(), atol=1.0e-10
            )

    def test_interacting_matches_fock_space(self):
        rng = np.random.default_rng(6)
        system = lg.LatticeSystem(4, particle_count=2)
        interaction = ops.nearest_neighbor_interaction(system, 1.0)
        v = rng.normal(size=4)
        bundle = ops.solve(spec_for(4, 2, v, interaction=interaction))
        reference = np.linalg.eigvalsh(
            fock_hamiltonian(system, 1.0, v, interaction.strength)
        )
        assert_allclose(bundle.energies, reference, atol=1.0e-10)

    def test_gauge_shift(self):
        rng = np.random.default_rng(7)
        v = rng.normal(size=5)
        base = ops.solve(spec_for(5, 2, v))
        shifted = ops.solve(spec_for(5, 2, v + 0.75))
        assert_allclose(shifted.energies, base.energies + 2 * 0.75, atol=1.0e-10)

    def test_interaction_checks(self):
        with self.assertRaises(ValidationError):
            ops.InteractionSpec("dense_pairwise", [[0.0, 1.0], [0.5, 0.0]])
        with self.assertRaises(ValidationError):
            ops.InteractionSpec("dense_pairwise", [[1.0, 0.0], [0.0, 0.0]])
        with self.assertRaises(ValidationError):
            ops.InteractionSpec("screened", [[0.0, 1.0], [1.0, 0.0]])

    def test_zero_hopping_refused(self):
        system = lg.LatticeSystem(2)
        with self.assertRaises(ValidationError):
            ops.HamiltonianSpec(system, lg.make_potential([0, 0], system), hopping=0.0)

    def test_asymmetric_matrix_refused(self):
        with self.assertRaises(ValidationError):
            ops.diagonalize(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_degeneracy_stable_under_noise(self):
        rng = np.random.default_rng(8)
        for sites in (4, 6):
            for _ in range(20):
                noise = 1.0e-13 * rng.standard_normal(sites)
                assert ops.solve(spec_for(sites, 2, noise)).ground_degeneracy == 2
        for _ in range(20):
            v = rng.normal(size=5) + 1.0e-13 * rng.standard_normal(5)
            assert ops.solve(spec_for(5, 2, v)).ground_degeneracy == 1

    def test_every_eigenpair_checked(self):
        spec = spec_for(12, 4, topology="open_chain")
        assert ops.many_body_basis(spec.system).size > 256

        def spoiled(ham):
            energies, states = REAL_EIGH(ham)
            energies = np.array(energies)
            energies[-1] += 1.0e-3
            return energies, states

        with mock.patch("liebtoolbox.lattice.operators.linalg.eigh", spoiled):
            with self.assertRaises(SolverError):
                ops.solve(spec)


class TestAlignment(TestCase):
    def test_nondegenerate_is_noop(self):
        bundle = ops.solve(spec_for(2, 1, [0.5, -0.5]))
        aligned = ops.align_degenerate_basis(bundle, [1.0, -1.0])
        assert np.array_equal(aligned.states, bundle.states)
        assert not aligned.slope_degenerate

    def test_bump_splits_slopes(self):
        bundle = ops.solve(spec_for(4, 2))
        aligned = ops.align_degenerate_basis(bundle, [0.0, 1.0, 0.0, 0.0])
        assert_allclose(aligned.slopes, [0.25, 0.75], atol=1.0e-12)
        assert not aligned.slope_degenerate
        proj = ops.projected_perturbation(aligned, [0.0, 1.0, 0.0, 0.0])
        assert_allclose(proj, np.diag(aligned.slopes), atol=1.0e-12)

    def test_constant_is_slope_degenerate(self):
        bundle = ops.solve(spec_for(4, 2))
        aligned = ops.align_degenerate_basis(bundle, [1.0, 1.0, 1.0, 1.0])
        assert aligned.slope_degenerate
        assert_allclose(aligned.slopes, [2.0, 2.0], atol=1.0e-12)
