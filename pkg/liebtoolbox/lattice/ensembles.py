"""Pure-state and ensemble densities of a (possibly degenerate) ground manifold."""

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from ..lbutils import ValidationError, error_wrapper
from .lattice_grid import DensityField

WEIGHT_TOL = 1.0e-12


@dataclass(frozen=True)
class EnsembleWeights:
    lambdas: np.ndarray

    def __post_init__(self):
        lambdas = np.array(self.lambdas, dtype=float).ravel()
        if lambdas.size == 0 or np.any(lambdas < 0) or not np.all(np.isfinite(lambdas)):
            raise ValidationError(
                error_wrapper(
                    """
Ensemble weights must be finite and non-negative.  You gave {0}.
""".format(
                        lambdas.tolist()
                    )
                )
            )
        if abs(lambdas.sum() - 1.0) > WEIGHT_TOL:
            raise ValidationError(
                error_wrapper(
                    """
Ensemble weights must sum to 1 within 1e-12.  The sum is {0!r}.
""".format(
                        lambdas.sum()
                    )
                )
            )
        lambdas.setflags(write=False)
        object.__setattr__(self, "lambdas", lambdas)

    @property
    def is_equal(self):
        """True for the canonical choice lambda_k = 1/q."""
        return bool(np.all(self.lambdas == self.lambdas[0]))

    def __len__(self):
        return self.lambdas.size


@dataclass(frozen=True)
class DensityClass:
    """Members of a degenerate ground density class and its canonical element."""

    member_densities: tuple
    canonical: DensityField


def canonical_weights(q):
    return EnsembleWeights(np.full(int(q), 1.0 / int(q)))


def _check_weights(bundle, weights):
    if len(weights) != bundle.ground_degeneracy:
        raise ValidationError(
            error_wrapper(
                """
The ensemble has {0} weights but the ground manifold is {1}-fold degenerate.
""".format(
                    len(weights), bundle.ground_degeneracy
                )
            )
        )


def _state_values(bundle, k):
    psi = bundle.states[:, k]
    return (psi ** 2) @ bundle.occupations() / bundle.system.spacing


def state_density(bundle, k):
    """Site density <psi_k| n(r) |psi_k> of eigenstate ``k`` (0 based)."""
    if not 0 <= int(k) < bundle.dimension:
        raise ValidationError(
            error_wrapper(
                """
State index {0} is out of range, the spectrum has {1} states.
""".format(
                    k, bundle.dimension
                )
            )
        )
    return DensityField(_state_values(bundle, int(k)), bundle.system)


def manifold_density(bundle, q=None):
    """Equal-weight density of the ``q`` lowest states.

    With ``q`` the ground degeneracy this is the canonical density; a
    larger or smaller ``q`` follows a reference manifold through a
    perturbation that split or shifted its levels.
    """
    q = bundle.ground_degeneracy if q is None else int(q)
    states = bundle.states[:, :q]
    values = (states ** 2).sum(axis=1) @ bundle.occupations() / (q * bundle.system.spacing)
    return DensityField(values, bundle.system)


def ensemble_density(bundle, weights):
    """Convex combination sum_k lambda_k n_k of the ground state densities."""
    _check_weights(bundle, weights)
    ground = bundle.ground_states
    values = (ground ** 2 @ weights.lambdas) @ bundle.occupations()
    return DensityField(values / bundle.system.spacing, bundle.system)


def canonical_class(bundle):
    """All ground state densities plus their equal-weights representative."""
    members = tuple(
        state_density(bundle, k) for k in range(bundle.ground_degeneracy)
    )
    return DensityClass(member_densities=members, canonical=manifold_density(bundle))


def ground_density(bundle):
    """Canonical (equal-weights) ground density."""
    return manifold_density(bundle)


@dataclass(frozen=True)
class ManifoldFit:
    """Density matrix on the q lowest states whose density is closest to a target.

    ``excess_energy`` is Tr(gamma H) - E_0, zero on an exactly degenerate
    ground manifold.
    """

    gamma: np.ndarray
    density: DensityField
    excess_energy: float


def _gamma_density(gamma, elements):
    return np.einsum("kl,klr->r", gamma, elements)


def nearest_manifold_density(bundle, target, q=None):
    """Least squares fit of ``target`` by densities of ensembles on the q lowest states.

    The unit-trace fit over symmetric matrices is tried first and kept when
    it is positive semi-definite; otherwise gamma = A A^T / tr(A A^T) is
    refined from the clipped fit.
    """
    q = bundle.ground_degeneracy if q is None else int(q)
    system = bundle.system
    h = system.spacing
    states = bundle.states[:, :q]
    elements = np.einsum("bk,bl,br->klr", states, states, bundle.occupations()) / h
    goal = np.asarray(getattr(target, "values", target), dtype=float)

    # gamma_00 = 1 - sum of the other diagonal entries
    pairs = [(k, l) for k in range(q) for l in range(k, q) if (k, l) != (0, 0)]
    columns = [
        elements[k, k] - elements[0, 0] if k == l else 2.0 * elements[k, l]
        for k, l in pairs
    ]
    gamma = np.zeros((q, q))
    gamma[0, 0] = 1.0
    if columns:
        design = np.sqrt(h) * np.column_stack(columns)
        params = np.linalg.lstsq(design, np.sqrt(h) * (goal - elements[0, 0]), rcond=None)[0]
        for (k, l), value in zip(pairs, params):
            gamma[k, l] = gamma[l, k] = value
            if k == l:
                gamma[0, 0] -= value

    evals, evecs = np.linalg.eigh(gamma)
    if evals.min() < -1.0e-12:
        evals = np.clip(evals, 0.0, None)
        start = evecs * np.sqrt(evals / evals.sum())

        def gamma_of(a):
            a = a.reshape(q, q)
            g = a @ a.T
            return g / np.trace(g)

        def residual(a):
            return np.sqrt(h) * (_gamma_density(gamma_of(a), elements) - goal)

        fit = optimize.least_squares(
            residual, start.ravel(), xtol=1.0e-14, ftol=1.0e-14, gtol=1.0e-14
        )
        gamma = gamma_of(fit.x)

    excess = float(np.dot(np.diag(gamma), bundle.energies[:q] - bundle.energies[0]))
    return ManifoldFit(
        gamma=gamma,
        density=DensityField(_gamma_density(gamma, elements), system),
        excess_energy=excess,
    )
