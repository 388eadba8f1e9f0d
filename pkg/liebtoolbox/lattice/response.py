"""Static density response of non-interacting ground states.

Kernels are stored per unit length squared so that a potential change
``dw`` produces the density change ``spacing * chi @ dw``.  Every sum over
excited states runs over the full finite basis.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd
from scipy import stats

from ..lbutils import (
    ContractError,
    DegenerateGroundStateError,
    SingularGapError,
    SlopeDegenerateError,
    ValidationError,
    error_wrapper,
    matrix_frame,
)
from .ensembles import EnsembleWeights, canonical_weights, manifold_density
from .lattice_grid import norm_13, zero_mean_values
from .operators import align_degenerate_basis, solve

GAP_TOL = 1.0e-9
SOURCES = ("nondegenerate", "degenerate_ensemble")


@dataclass(frozen=True)
class ResponseKernel:
    matrix: np.ndarray
    source: str
    weights: EnsembleWeights
    system: object

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def asymmetry(self):
        return float(np.abs(self.matrix - self.matrix.T).max())

    @property
    def row_sums(self):
        """Weighted row sums, all zero by the sum rule."""
        return self.system.spacing * self.matrix.sum(axis=1)

    def frame(self):
        return matrix_frame(self.matrix)


@dataclass(frozen=True)
class QuadraticResponseData:
    """Pieces of the twice-contracted quadratic (xi) response term.

    ``n_elements[k, l, r]`` is N_kl(r), ``w_elements[l, i]`` is W_li for the
    ground state l and the excited state q + i, ``term`` the assembled
    contribution per site.
    """

    n_elements: np.ndarray
    w_elements: np.ndarray
    slopes: np.ndarray
    weights: EnsembleWeights
    term: np.ndarray

    @property
    def max_abs(self):
        return float(np.abs(self.term).max()) if self.term.size else 0.0


@dataclass(frozen=True)
class RemainderRow:
    epsilon: float
    remainder_norm: float
    ratio: float
    valid: bool
    perturbed_degeneracy: int


@dataclass(frozen=True)
class RemainderTable:
    rows: tuple
    slope: Optional[float]
    decreasing: bool

    def frame(self):
        return pd.DataFrame(
            {
                "epsilon": [r.epsilon for r in self.rows],
                "remainder_norm": [r.remainder_norm for r in self.rows],
                "ratio": [r.ratio for r in self.rows],
                "valid": [r.valid for r in self.rows],
                "perturbed_degeneracy": [r.perturbed_degeneracy for r in self.rows],
            }
        )

    def to_dict(self):
        return {
            "rows": self.frame().to_dict(orient="list"),
            "loglog_slope": self.slope,
            "decreasing": self.decreasing,
        }


def _check_gap(bundle):
    gap = bundle.gap
    if gap is None or gap <= GAP_TOL:
        raise SingularGapError(
            error_wrapper(
                """
The gap between the ground manifold and the first excited level is {0}, the
response kernel needs a gap above {1}.
""".format(
                    gap, GAP_TOL
                )
            )
        )


def transition_elements(bundle, k):
    """<psi_k| n(r) |psi_i> for every site r (rows) and eigenstate i (columns)."""
    psi = bundle.states[:, k]
    return (bundle.occupations().T * psi) @ bundle.states / bundle.system.spacing


def per_state_kernels(bundle):
    """chi_{s_k} for every state k of the ground manifold."""
    _check_gap(bundle)
    q = bundle.ground_degeneracy
    denom = np.asarray(bundle.energies[q:]) - bundle.energies[0]
    kernels = []
    for k in range(q):
        excited = transition_elements(bundle, k)[:, q:]
        chi = -2.0 * (excited / denom) @ excited.T
        kernels.append(0.5 * (chi + chi.T))
    return kernels


def _projected(dw, system):
    return zero_mean_values(getattr(dw, "values", dw), system)


def chi_nondegenerate(bundle):
    """Kernel of a non-degenerate ground state."""
    if bundle.ground_degeneracy != 1:
        raise DegenerateGroundStateError(
            error_wrapper(
                """
The ground state is {0}-fold degenerate.  Use chi_degenerate with ensemble
weights instead.
""".format(
                    bundle.ground_degeneracy
                )
            )
        )
    (chi,) = per_state_kernels(bundle)
    return ResponseKernel(chi, "nondegenerate", canonical_weights(1), bundle.system)


def chi_degenerate(bundle, weights, dw=None):
    """Ensemble kernel sum_k lambda_k chi_{s_k}.

    Unequal weights need the ground manifold aligned to ``dw`` first (see
    ``align_degenerate_basis``).  The equal-weights kernel only depends on
    the ground projector and accepts any basis.
    """
    q = bundle.ground_degeneracy
    if len(weights) != q:
        raise ValidationError(
            error_wrapper(
                """
The ensemble has {0} weights but the ground manifold is {1}-fold degenerate.
""".format(
                    len(weights), q
                )
            )
        )
    if q > 1 and not weights.is_equal:
        _check_aligned(bundle, dw)
    kernels = per_state_kernels(bundle)
    chi = sum(lam * kern for lam, kern in zip(weights.lambdas, kernels))
    source = "nondegenerate" if q == 1 else "degenerate_ensemble"
    return ResponseKernel(chi, source, weights, bundle.system)


def canonical_kernel(bundle):
    """Equal-weights kernel of whatever ground manifold ``bundle`` has."""
    if bundle.ground_degeneracy == 1:
        return chi_nondegenerate(bundle)
    return chi_degenerate(bundle, canonical_weights(bundle.ground_degeneracy))


def _check_aligned(bundle, dw):
    if dw is None or bundle.aligned_to is None:
        raise ContractError(
            error_wrapper(
                """
The degenerate ground manifold must be aligned to the perturbation with
align_degenerate_basis before unequal weights can be used.
"""
            )
        )
    wanted = _projected(dw, bundle.system)
    have = zero_mean_values(bundle.aligned_to, bundle.system)
    if not np.allclose(wanted, have, rtol=1.0e-12, atol=1.0e-14):
        raise ContractError(
            error_wrapper(
                """
The ground manifold was aligned to a different perturbation than the one
given.
"""
            )
        )


def apply_kernel(kernel, dw):
    """Integral of chi(r, r') dw(r') over r'."""
    values = np.asarray(getattr(dw, "values", dw), dtype=float)
    return kernel.system.spacing * kernel.matrix @ values


def xi_quadratic(bundle, weights, dw):
    """Assembled quadratic term in its antisymmetrized (lambda_k - lambda_l) form.

    Equal weights give exactly zero at every site.
    """
    q = bundle.ground_degeneracy
    system = bundle.system
    sites = system.sites
    if len(weights) != q:
        raise ValidationError(
            error_wrapper(
                """
The ensemble has {0} weights but the ground manifold is {1}-fold degenerate.
""".format(
                    len(weights), q
                )
            )
        )
    if q == 1:
        return QuadraticResponseData(
            n_elements=np.zeros((1, 1, sites)),
            w_elements=np.zeros((1, 0)),
            slopes=np.zeros(1),
            weights=weights,
            term=np.zeros(sites),
        )
    _check_aligned(bundle, dw)
    if bundle.slope_degenerate:
        raise SlopeDegenerateError(
            error_wrapper(
                """
The perturbation does not split the degenerate ground manifold at first order
(slopes {0}); the quadratic term divides by E'_k - E'_l and is undefined.
""".format(
                    np.asarray(bundle.slopes).tolist()
                )
            )
        )
    _check_gap(bundle)
    dwv = _projected(dw, system)
    occ = bundle.occupations()
    ground = bundle.ground_states
    excited = bundle.states[:, q:]
    denom = np.asarray(bundle.energies[q:]) - bundle.energies[0]

    n_elements = np.einsum("bk,bl,br->klr", ground, ground, occ) / system.spacing
    n_elements = 0.5 * (n_elements + n_elements.transpose(1, 0, 2))
    w_elements = ground.T @ ((occ @ dwv)[:, None] * excited)

    lambdas = weights.lambdas
    slopes = np.asarray(bundle.slopes)
    term = np.zeros(sites)
    for k in range(q):
        for l in range(k + 1, q):
            coupling = np.sum(w_elements[l] * w_elements[k] / denom)
            coeff = (lambdas[k] - lambdas[l]) / (slopes[k] - slopes[l])
            # intra-manifold mixing of state k with l, + c.c.
            term -= 2.0 * coeff * coupling * n_elements[k, l]
    return QuadraticResponseData(
        n_elements=n_elements,
        w_elements=w_elements,
        slopes=slopes,
        weights=weights,
        term=term,
    )


def continued_density(spec, reference_q, values):
    """Equal-weight density of the ``reference_q`` lowest states at potential ``values``.

    Returns the density, whether the manifold stayed separated from the
    rest of the spectrum, and the perturbed ground degeneracy.
    """
    bundle = solve(spec.with_potential(values))
    q = int(reference_q)
    separated = True
    if q < bundle.dimension:
        separated = bool(bundle.energies[q] - bundle.energies[q - 1] > bundle.degeneracy_tol)
    return manifold_density(bundle, q), separated, bundle.ground_degeneracy


def finite_difference_response(spec, dw, epsilon=1.0e-5):
    """Central difference of the canonical ground density along ``dw``."""
    reference = solve(spec)
    q = reference.ground_degeneracy
    v = np.asarray(spec.external.values)
    dwv = np.asarray(getattr(dw, "values", dw), dtype=float)
    plus, _, _ = continued_density(spec, q, v + epsilon * dwv)
    minus, _, _ = continued_density(spec, q, v - epsilon * dwv)
    return (plus.values - minus.values) / (2.0 * epsilon)


def ensemble_difference_response(spec, weights, dw, epsilon=1.0e-5):
    """Central difference of the weighted ensemble density along ``dw``.

    The ensemble members are the ground states aligned to ``dw``.  At
    +epsilon they are the q lowest perturbed states in ascending slope
    order, at -epsilon in descending order.  The result is compared with
    ``apply_kernel(chi_degenerate(...), dw) + xi_quadratic(...).term``.
    """
    reference = solve(spec)
    q = reference.ground_degeneracy
    system = spec.system
    dwv = _projected(dw, system)
    aligned = align_degenerate_basis(reference, dwv)
    if len(weights) != q:
        raise ValidationError(
            error_wrapper(
                """
The ensemble has {0} weights but the ground manifold is {1}-fold degenerate.
""".format(
                    len(weights), q
                )
            )
        )
    if aligned.slope_degenerate:
        raise SlopeDegenerateError(
            error_wrapper(
                """
The perturbation does not split the degenerate ground manifold, the perturbed
states cannot be matched to the ensemble members.
"""
            )
        )
    v = np.asarray(spec.external.values)
    lambdas = np.asarray(weights.lambdas)
    plus = solve(spec.with_potential(v + epsilon * dwv))
    minus = solve(spec.with_potential(v - epsilon * dwv))
    occ = plus.occupations()
    n_plus = (plus.states[:, :q] ** 2 @ lambdas) @ occ
    n_minus = (minus.states[:, :q][:, ::-1] ** 2 @ lambdas) @ occ
    return (n_plus - n_minus) / (2.0 * epsilon * system.spacing)


def finite_difference_kernel(spec, epsilon=1.0e-5):
    """Kernel built column by column from central differences."""
    system = spec.system
    columns = [
        finite_difference_response(spec, unit, epsilon) / system.spacing
        for unit in np.eye(system.sites)
    ]
    return np.column_stack(columns)


def remainder_diagnostic(spec, dw, epsilons):
    """Norm of the beyond-linear remainder divided by epsilon.

    Delta m = n[v + eps dw] - n[v] - eps chi dw with canonical densities.
    A row is invalid when the perturbed spectrum no longer separates the
    reference ground manifold from the excited levels.
    """
    epsilons = [float(e) for e in epsilons]
    if any(e <= 0 for e in epsilons) or any(
        a <= b for a, b in zip(epsilons, epsilons[1:])
    ):
        raise ValidationError(
            error_wrapper(
                """
The epsilons must be positive and strictly descending.  You gave {0}.
""".format(
                    epsilons
                )
            )
        )
    system = spec.system
    dwv = _projected(dw, system)
    reference = solve(spec)
    q = reference.ground_degeneracy
    n0 = manifold_density(reference).values
    if np.any(dwv):
        linear = apply_kernel(canonical_kernel(reference), dwv)
    else:
        linear = np.zeros(system.sites)
    v = np.asarray(spec.external.values)

    rows = []
    for eps in epsilons:
        n_eps, separated, q_eps = continued_density(spec, q, v + eps * dwv)
        remainder = n_eps.values - n0 - eps * linear
        size = norm_13(remainder, system)
        rows.append(RemainderRow(eps, size, size / eps, separated, q_eps))

    valid = [r for r in rows if r.valid and r.ratio > 0]
    slope = None
    if len(valid) >= 2:
        fit = stats.linregress(
            np.log([r.epsilon for r in valid]), np.log([r.ratio for r in valid])
        )
        slope = float(fit.slope)
    ratios = [r.ratio for r in rows if r.valid]
    decreasing = all(b <= a for a, b in zip(ratios, ratios[1:]))
    return RemainderTable(rows=tuple(rows), slope=slope, decreasing=decreasing)


def random_perturbation(system, rng):
    return zero_mean_values(rng.standard_normal(system.sites), system)


def cancellation_study(spec, draws=50, unequal=(0.7, 0.3), seed=0, threshold=1.0e-6):
    """Quadratic term with equal and unequal weights over random perturbations.

    Perturbations that leave the first order slopes degenerate are redrawn.
    """
    rng = np.random.default_rng(seed)
    reference = solve(spec)
    q = reference.ground_degeneracy
    if q < 2:
        raise ValidationError(
            error_wrapper(
                """
The cancellation study needs a degenerate ground manifold, this one has q_s = 1.
"""
            )
        )
    equal = canonical_weights(q)
    if unequal is not None and len(unequal) == q:
        unequal = EnsembleWeights(np.asarray(unequal, dtype=float))
    else:
        unequal = None

    equal_max, unequal_max, skipped = [], [], 0
    while len(equal_max) < draws:
        dwv = random_perturbation(spec.system, rng)
        aligned = align_degenerate_basis(reference, dwv)
        if aligned.slope_degenerate:
            skipped += 1
            continue
        if unequal is None:
            weights = EnsembleWeights(rng.dirichlet(np.ones(q)))
        else:
            weights = unequal
        equal_max.append(xi_quadratic(aligned, equal, dwv).max_abs)
        unequal_max.append(xi_quadratic(aligned, weights, dwv).max_abs)

    equal_max = np.array(equal_max)
    unequal_max = np.array(unequal_max)
    return {
        "ground_degeneracy": q,
        "draws": int(draws),
        "skipped_slope_degenerate": skipped,
        "max_equal_weights": float(equal_max.max()),
        "equal_weights_per_draw": equal_max,
        "unequal_weights_per_draw": unequal_max,
        "fraction_unequal_above_threshold": float(np.mean(unequal_max > threshold)),
        "threshold": threshold,
    }
