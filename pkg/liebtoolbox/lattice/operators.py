"""Many-body Hamiltonians on the lattice and their spectra.

The N-particle basis is the set of occupation bit masks with N set bits,
sorted ascending.  Bit ``i`` of a mask is the occupation of site ``i``.
"""

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import linalg
from scipy.special import comb

from ..lbutils import (
    CapacityError,
    ContractError,
    DimensionError,
    SolverError,
    ValidationError,
    error_wrapper,
)
from .lattice_grid import LatticeSystem, PotentialField

MAX_BASIS = 20000
INTERACTION_KINDS = ("nearest_neighbor", "dense_pairwise")
SLOPE_TOL = 1.0e-10


@dataclass(frozen=True)
class InteractionSpec:
    """Pair interaction w_ij n_i n_j, symmetric with zero diagonal."""

    kind: str
    strength: np.ndarray

    def __post_init__(self):
        if self.kind not in INTERACTION_KINDS:
            raise ValidationError(
                error_wrapper(
                    """
The interaction kind should be one of {0}.  You gave "{1}".
""".format(
                        INTERACTION_KINDS, self.kind
                    )
                )
            )
        w = np.array(self.strength, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise DimensionError(
                error_wrapper(
                    """
The interaction strength must be a square matrix.  You gave shape {0}.
""".format(
                        w.shape
                    )
                )
            )
        if not np.all(np.isfinite(w)):
            raise ValidationError(error_wrapper("The interaction has non-finite entries."))
        if not np.array_equal(w, w.T):
            raise ValidationError(
                error_wrapper(
                    """
The interaction strength matrix must be symmetric, w_ij = w_ji.  The largest
asymmetry is {0}.
""".format(
                        np.abs(w - w.T).max()
                    )
                )
            )
        if np.any(np.diag(w) != 0):
            raise ValidationError(
                error_wrapper("The interaction strength matrix must have a zero diagonal.")
            )
        w.setflags(write=False)
        object.__setattr__(self, "strength", w)

    @property
    def is_nonnegative(self):
        return bool(np.all(self.strength >= 0))


@dataclass(frozen=True)
class HamiltonianSpec:
    system: LatticeSystem
    external: PotentialField
    hopping: float = 1.0
    interaction: Optional[InteractionSpec] = None

    def __post_init__(self):
        if self.hopping == 0 or not np.isfinite(self.hopping):
            raise ValidationError(
                error_wrapper(
                    """
The hopping must be finite and non-zero, without a kinetic term the response
kernels are undefined.  You gave {0}.
""".format(
                        self.hopping
                    )
                )
            )
        if self.external.system.sites != self.system.sites:
            raise DimensionError(
                error_wrapper(
                    """
The external potential has {0} sites, the lattice has {1}.
""".format(
                        self.external.system.sites, self.system.sites
                    )
                )
            )
        if (
            self.interaction is not None
            and self.interaction.strength.shape[0] != self.system.sites
        ):
            raise DimensionError(
                error_wrapper(
                    """
The interaction matrix is {0}x{0}, the lattice has {1} sites.
""".format(
                        self.interaction.strength.shape[0], self.system.sites
                    )
                )
            )

    def with_potential(self, values):
        """Same system, hopping and interaction with another potential."""
        return replace(self, external=PotentialField(np.asarray(values), self.system))


@dataclass(frozen=True)
class SpectrumBundle:
    """Ascending eigenpairs with the ground degeneracy partition.

    ``aligned_to`` holds the perturbation the degenerate ground manifold
    was rotated for, and ``slopes`` the first order energy slopes E'_k.
    """

    energies: np.ndarray
    states: np.ndarray
    ground_degeneracy: int
    degeneracy_tol: float
    system: Optional[LatticeSystem] = None
    aligned_to: Optional[np.ndarray] = None
    slopes: Optional[np.ndarray] = None
    slope_degenerate: bool = False

    @property
    def dimension(self):
        return self.energies.shape[0]

    @property
    def ground_energy(self):
        return float(self.energies[0])

    @property
    def ground_states(self):
        return self.states[:, : self.ground_degeneracy]

    @property
    def gap(self):
        """E_{q+1} - E_1, or None when the ground manifold fills the basis."""
        q = self.ground_degeneracy
        if q >= self.dimension:
            return None
        return float(self.energies[q] - self.energies[0])

    def occupations(self):
        if self.system is None:
            raise ContractError(
                error_wrapper(
                    """
This spectrum was diagonalized without its lattice system, densities cannot be
formed.
"""
                )
            )
        return occupation_matrix(self.system)


def _popcount(x):
    return bin(x).count("1")


@lru_cache(maxsize=64)
def _basis(sites, particles):
    size = int(comb(sites, particles, exact=True))
    if size > MAX_BASIS:
        raise CapacityError(
            error_wrapper(
                """
The {0}-particle basis on {1} sites has C({1},{0}) = {2} states, above the
dense capacity guard of {3}.
""".format(
                    particles, sites, size, MAX_BASIS
                )
            )
        )
    masks = []
    # Gosper's hack walks the N-bit masks in ascending order.
    mask = (1 << particles) - 1
    limit = 1 << sites
    while mask < limit:
        masks.append(mask)
        low = mask & -mask
        ripple = mask + low
        mask = (((ripple ^ mask) >> 2) // low) | ripple
    masks = np.array(masks, dtype=np.int64)
    occupations = ((masks[:, None] >> np.arange(sites)[None, :]) & 1).astype(float)
    masks.setflags(write=False)
    occupations.setflags(write=False)
    return masks, occupations


def many_body_basis(system):
    """Bit masks of the N-particle basis, ascending."""
    return _basis(system.sites, system.particle_count)[0]


def occupation_matrix(system):
    """Occupation numbers, one row per basis state and one column per site."""
    return _basis(system.sites, system.particle_count)[1]


@lru_cache(maxsize=64)
def _hopping_pattern(sites, particles, topology):
    system = LatticeSystem(sites, topology=topology, particle_count=particles)
    masks = _basis(sites, particles)[0]
    index = {int(m): k for k, m in enumerate(masks)}
    pattern = np.zeros((len(masks), len(masks)))
    for k, mask in enumerate(masks):
        mask = int(mask)
        for i, j in system.bonds():
            # Only i occupied -> j empty; the reverse hop is the transpose.
            if (mask >> i) & 1 and not (mask >> j) & 1:
                between = mask & (((1 << j) - 1) ^ ((1 << (i + 1)) - 1))
                sign = -1.0 if _popcount(between) % 2 else 1.0
                target = index[mask ^ (1 << i) ^ (1 << j)]
                pattern[target, k] += sign
                pattern[k, target] += sign
    pattern.setflags(write=False)
    return pattern


def nearest_neighbor_interaction(system, strength):
    """Interaction U on every lattice bond."""
    w = np.zeros((system.sites, system.sites))
    for i, j in system.bonds():
        w[i, j] = w[j, i] = strength
    return InteractionSpec("nearest_neighbor", w)


def interaction_diagonal(interaction, occupations):
    """Diagonal of W = sum_{i<j} w_ij n_i n_j in the occupation basis."""
    if interaction is None:
        return np.zeros(occupations.shape[0])
    return 0.5 * np.einsum("bi,ij,bj->b", occupations, interaction.strength, occupations)


def build_hamiltonian(spec):
    """Dense symmetric many-body matrix of T + W + V[v]."""
    system = spec.system
    occupations = occupation_matrix(system)
    pattern = _hopping_pattern(system.sites, system.particle_count, system.topology)
    ham = -spec.hopping * pattern
    diagonal = occupations @ np.asarray(spec.external.values, dtype=float)
    diagonal = diagonal + interaction_diagonal(spec.interaction, occupations)
    ham[np.diag_indices_from(ham)] += diagonal
    return ham


def _check_eigenpairs(ham, energies, states):
    scale = max(1.0, float(np.abs(ham).max()))
    overlap = states.T @ states
    ortho = np.abs(overlap - np.eye(states.shape[1])).max()
    residual = np.linalg.norm(ham @ states - states * energies, axis=0).max()
    if ortho > 1.0e-10 or residual > 1.0e-9 * scale:
        raise SolverError(
            error_wrapper(
                """
The eigensolver returned inaccurate eigenpairs: orthonormality error {0},
largest residual {1}.
""".format(
                    ortho, residual
                )
            )
        )


def diagonalize(ham, system=None, degeneracy_rtol=1.0e-9):
    """Full ascending spectrum with the ground degeneracy partition.

    The degeneracy tolerance is ``degeneracy_rtol`` times the spectral
    range.  Residual and orthonormality are verified on every eigenpair.
    """
    ham = np.asarray(ham, dtype=float)
    if ham.ndim != 2 or ham.shape[0] != ham.shape[1]:
        raise DimensionError(
            error_wrapper("The Hamiltonian must be square, got {0}.".format(ham.shape))
        )
    asym = np.abs(ham - ham.T).max() if ham.size else 0.0
    if asym > 1.0e-12:
        raise ValidationError(
            error_wrapper(
                """
The Hamiltonian must be symmetric within 1e-12.  The largest asymmetry is {0}.
""".format(
                    asym
                )
            )
        )
    try:
        energies, states = linalg.eigh(ham)
    except linalg.LinAlgError as e:
        raise SolverError(error_wrapper("The eigensolver did not converge: {0}".format(e)))
    _check_eigenpairs(ham, energies, states)

    tol = degeneracy_rtol * float(energies[-1] - energies[0])
    q = int(np.count_nonzero(energies - energies[0] <= tol))
    energies.setflags(write=False)
    states.setflags(write=False)
    return SpectrumBundle(
        energies=energies,
        states=states,
        ground_degeneracy=q,
        degeneracy_tol=tol,
        system=system,
    )


def solve(spec, degeneracy_rtol=1.0e-9):
    """Diagonalize the Hamiltonian of ``spec``."""
    return diagonalize(
        build_hamiltonian(spec), system=spec.system, degeneracy_rtol=degeneracy_rtol
    )


def ground_energy(spec):
    return solve(spec).ground_energy


def single_particle_levels(system, hopping, potential):
    """Eigenvalues of the one-body hopping matrix plus potential."""
    onebody = np.zeros((system.sites, system.sites))
    for i, j in system.bonds():
        onebody[i, j] = onebody[j, i] = -hopping
    onebody[np.diag_indices_from(onebody)] = np.asarray(potential, dtype=float)
    return linalg.eigvalsh(onebody)


def projected_perturbation(bundle, dw):
    """<psi_k| sum_i dw_i n_i |psi_l> on the ground manifold."""
    ground = bundle.ground_states
    diag = bundle.occupations() @ np.asarray(dw, dtype=float)
    return ground.T @ (diag[:, None] * ground)


def align_degenerate_basis(bundle, dw):
    """Rotate the ground manifold so the projected perturbation is diagonal.

    Returns a new bundle whose ``slopes`` are the first order energy slopes
    E'_k, ascending.  Coinciding slopes set ``slope_degenerate``; the
    quadratic response refuses such bundles.
    """
    values = np.array(getattr(dw, "values", dw), dtype=float)
    sites = bundle.occupations().shape[1]
    if values.shape != (sites,):
        raise DimensionError(
            error_wrapper(
                """
The perturbation has {0} sites, the spectrum lives on {1}.
""".format(
                    values.shape, sites
                )
            )
        )
    q = bundle.ground_degeneracy
    proj = projected_perturbation(bundle, values)
    if q == 1:
        slopes = np.array([proj[0, 0]])
        states = bundle.states
    else:
        proj = 0.5 * (proj + proj.T)
        slopes, rotation = linalg.eigh(proj)
        states = np.array(bundle.states)
        states[:, :q] = bundle.ground_states @ rotation
        states.setflags(write=False)
    slopes.setflags(write=False)
    values.setflags(write=False)
    degenerate = bool(q > 1 and np.min(np.diff(slopes)) < SLOPE_TOL)
    return replace(
        bundle,
        states=states,
        aligned_to=values,
        slopes=slopes,
        slope_degenerate=degenerate,
    )
