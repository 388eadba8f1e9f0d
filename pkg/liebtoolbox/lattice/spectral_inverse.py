"""Eigen-decomposition and Tikhonov filtered inverse of -chi.

The operator of a kernel is ``K = -spacing * chi`` acting on site functions.
Its eigenvectors ``f_j`` are normalized in the quadrature inner product,
``sum(spacing * f_j * f_k) = delta_jk``.  The constant direction is pure
gauge and is deflated explicitly, never regularized.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import linalg

from ..lbutils import NearSingularWarning, ValidationError, error_wrapper
from .lattice_grid import (
    LatticeSystem,
    PotentialField,
    integrate,
    zero_mean_values,
)
from .operators import HamiltonianSpec, solve
from .response import canonical_kernel, transition_elements

NEAR_SINGULAR = 1.0e-13
DENSITY_SUM_TOL = 1.0e-10


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenpairs of -chi on the zero-mean subspace, alphas descending.

    ``vectors[:, j]`` is f_j.  ``null_value`` is the quadratic form of the
    operator along the normalized constant ``null_direction``.
    """

    alphas: np.ndarray
    vectors: np.ndarray
    null_direction: np.ndarray
    null_value: float
    condition_ratio: float
    near_singular: tuple
    system: LatticeSystem

    @property
    def alpha_min(self):
        return float(self.alphas[-1])

    @property
    def alpha_max(self):
        return float(self.alphas[0])

    def frame(self):
        return pd.DataFrame({"j": np.arange(1, self.alphas.size + 1), "alpha": self.alphas})


@dataclass(frozen=True)
class TikhonovPolicy:
    mu: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.mu) or self.mu < 0:
            raise ValidationError(
                error_wrapper(
                    """
The Tikhonov parameter mu must be finite and non-negative.  You gave {0}.
""".format(
                        self.mu
                    )
                )
            )

    def filter(self, alphas):
        """alpha / (alpha**2 + mu**2), the inverse 1/alpha at mu = 0."""
        alphas = np.asarray(alphas, dtype=float)
        return alphas / (alphas ** 2 + self.mu ** 2)


def _zero_mean_basis(sites):
    # Orthonormal complement of the constant vector.
    return linalg.null_space(np.ones((1, sites)))


def decompose(kernel):
    """Spectral decomposition of -chi with the constant direction deflated.

    Eigenvalues at or below 1e-13 raise a NearSingularWarning carrying the
    offending eigenvector; they stay in the decomposition.
    """
    system = kernel.system
    h = system.spacing
    operator = -h * np.asarray(kernel.matrix)
    operator = 0.5 * (operator + operator.T)

    basis = _zero_mean_basis(system.sites)
    alphas, coeffs = linalg.eigh(basis.T @ operator @ basis)
    order = np.argsort(alphas)[::-1]
    alphas = alphas[order]
    vectors = basis @ coeffs[:, order] / np.sqrt(h)

    constant = np.full(system.sites, 1.0 / np.sqrt(system.sites))
    null_value = float(constant @ operator @ constant)
    null_direction = constant / np.sqrt(h)

    near = tuple(int(j) for j in np.flatnonzero(alphas <= NEAR_SINGULAR))
    for j in near:
        warnings.warn(
            NearSingularWarning(
                error_wrapper(
                    """
Eigenvalue alpha_{0} = {1!r} of -chi is at or below {2}; its inverse is
unbounded.  Eigenvector: {3}
""".format(
                        j + 1, alphas[j], NEAR_SINGULAR, vectors[:, j].tolist()
                    )
                )
            )
        )

    alpha_min = alphas[-1] if alphas.size else np.nan
    ratio = float(alphas[0] / alpha_min) if alphas.size and alpha_min > 0 else np.inf
    alphas.setflags(write=False)
    vectors.setflags(write=False)
    return SpectralDecomposition(
        alphas=alphas,
        vectors=vectors,
        null_direction=null_direction,
        null_value=null_value,
        condition_ratio=ratio,
        near_singular=near,
        system=system,
    )


def apply_inverse(dec, dm, reg=None):
    """Potential change dw whose linear density response is ``dm``.

    dw = -sum_j alpha_j / (alpha_j**2 + mu**2) <f_j, dm> f_j, returned in the
    zero_mean gauge.
    """
    reg = TikhonovPolicy() if reg is None else reg
    system = dec.system
    values = np.asarray(getattr(dm, "values", dm), dtype=float)
    if values.shape != (system.sites,):
        raise ValidationError(
            error_wrapper(
                """
The density direction has shape {0}, the lattice has {1} sites.
""".format(
                    values.shape, system.sites
                )
            )
        )
    total = integrate(values, system)
    if abs(total) > DENSITY_SUM_TOL * max(1.0, np.abs(values).max()):
        raise ValidationError(
            error_wrapper(
                """
A density direction must integrate to zero, the weighted sum is {0!r}.
""".format(
                    total
                )
            )
        )
    coefficients = system.spacing * (dec.vectors.T @ values)
    dw = -dec.vectors @ (reg.filter(dec.alphas) * coefficients)
    return PotentialField(zero_mean_values(dw, system), system, gauge="zero_mean")


def inverse_kernel(dec, mu=0.0):
    """Dense regularized -chi^{-1} on the zero-mean subspace.

    Stored like a kernel: ``spacing * matrix`` has eigenvalues
    alpha_j / (alpha_j**2 + mu**2) on the f_j and 0 on constants.
    """
    gains = TikhonovPolicy(mu).filter(dec.alphas)
    return (dec.vectors * gains) @ dec.vectors.T


def alphas_from_states(bundle, weights, dec):
    """Quadratic form of -chi along each f_j, summed over excited states.

    alpha_j = 2 sum_k lambda_k sum_{i > q} |sum_r h <psi_k|n(r)|psi_i> f_j(r)|**2
    / (E_i - E_1).  Agrees with ``dec.alphas`` for any aligned or
    equal-weights ground manifold.
    """
    q = bundle.ground_degeneracy
    h = bundle.system.spacing
    denom = np.asarray(bundle.energies[q:]) - bundle.energies[0]
    alphas = np.zeros(dec.alphas.size)
    for lam, k in zip(weights.lambdas, range(q)):
        elements = h * (dec.vectors.T @ transition_elements(bundle, k)[:, q:])
        alphas += 2.0 * lam * np.sum(elements ** 2 / denom, axis=1)
    return alphas


def conditioning_study(sizes=(4, 8, 16, 32), particles=1, hopping=1.0, spacing=1.0):
    """alpha spectrum and condition ratio of the uniform ring for each size."""
    records = []
    ratios = []
    for sites in sizes:
        system = LatticeSystem(
            int(sites), topology="ring", spacing=spacing, particle_count=particles
        )
        spec = HamiltonianSpec(
            system, PotentialField(np.zeros(system.sites), system), hopping=hopping
        )
        dec = decompose(canonical_kernel(solve(spec)))
        ratios.append(dec.condition_ratio)
        for j, alpha in enumerate(dec.alphas):
            records.append({"sites": int(sites), "j": j + 1, "alpha": alpha})
    summary = pd.DataFrame(
        {
            "sites": [int(s) for s in sizes],
            "condition_ratio": ratios,
        }
    )
    return {
        "spectrum": pd.DataFrame.from_records(records, columns=["sites", "j", "alpha"]),
        "summary": summary,
        "increasing": bool(np.all(np.diff(ratios) > 0)),
    }
