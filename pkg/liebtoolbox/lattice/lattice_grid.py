"""Lattice configuration space, site functions, quadrature and norms.

A density is stored as particles per unit length: the occupation of a site
divided by the quadrature weight ``spacing``, so that the weighted sum
``sum(spacing * n)`` is the particle number.
"""

from dataclasses import dataclass

import numpy as np

from ..lbutils import DimensionError, ValidationError, error_wrapper

TOPOLOGIES = ("ring", "open_chain")
GAUGES = ("raw", "zero_mean")
PERTURBATION_KINDS = ("potential_direction", "density_direction")

TOL_NEG = 1.0e-12
TOL_SUM = 1.0e-10
TOL_ZERO_MEAN = 1.0e-12


def _frozen(values):
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class LatticeSystem:
    """Finite lattice of ``sites`` sites holding ``particle_count`` spinless fermions."""

    sites: int
    topology: str = "ring"
    spacing: float = 1.0
    particle_count: int = 1

    def __post_init__(self):
        if self.topology not in TOPOLOGIES:
            raise ValidationError(
                error_wrapper(
                    """
The topology should be one of {0}.  You gave "{1}".
""".format(
                        TOPOLOGIES, self.topology
                    )
                )
            )
        if int(self.sites) != self.sites or self.sites < 2:
            raise ValidationError(
                error_wrapper(
                    """
A lattice needs at least 2 sites.  You gave {0}.
""".format(
                        self.sites
                    )
                )
            )
        if (
            int(self.particle_count) != self.particle_count
            or self.particle_count < 1
            or self.particle_count > self.sites
        ):
            raise ValidationError(
                error_wrapper(
                    """
The particle count must satisfy 1 <= N <= L for spinless fermions.  You
gave N={0} on L={1} sites.
""".format(
                        self.particle_count, self.sites
                    )
                )
            )
        if not np.isfinite(self.spacing) or self.spacing <= 0:
            raise ValidationError(
                error_wrapper(
                    """
The quadrature weight (spacing) must be strictly positive.  You gave {0}.
""".format(
                        self.spacing
                    )
                )
            )

    @property
    def weights(self):
        return np.full(self.sites, float(self.spacing))

    def bonds(self):
        """Nearest neighbour bonds as sorted, de-duplicated (i, j) pairs."""
        pairs = set()
        for i in range(self.sites - 1):
            pairs.add((i, i + 1))
        if self.topology == "ring":
            pairs.add(tuple(sorted((self.sites - 1, 0))))
        return sorted(pairs)


@dataclass(frozen=True)
class DensityField:
    """Site density of ``system``; see ``is_representable`` for membership."""

    values: np.ndarray
    system: LatticeSystem

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        _check_length(self.values, self.system, "density")


@dataclass(frozen=True)
class PotentialField:
    values: np.ndarray
    system: LatticeSystem
    gauge: str = "raw"

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        _check_length(self.values, self.system, "potential")
        if self.gauge not in GAUGES:
            raise ValidationError(
                error_wrapper(
                    """
The gauge should be one of {0}.  You gave "{1}".
""".format(
                        GAUGES, self.gauge
                    )
                )
            )
        if self.gauge == "zero_mean":
            mean = weighted_mean(self.values, self.system)
            if abs(mean) > TOL_ZERO_MEAN * max(1.0, np.abs(self.values).max()):
                raise ValidationError(
                    error_wrapper(
                        """
A zero_mean potential must have vanishing weighted mean.  The mean is {0}.
""".format(
                            mean
                        )
                    )
                )

    def shifted(self, constant):
        """Same potential plus an additive constant (raw gauge)."""
        return PotentialField(self.values + constant, self.system)


@dataclass(frozen=True)
class PerturbationField:
    values: np.ndarray
    system: LatticeSystem
    kind: str = "potential_direction"

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))
        _check_length(self.values, self.system, "perturbation")
        if self.kind not in PERTURBATION_KINDS:
            raise ValidationError(
                error_wrapper(
                    """
The perturbation kind should be one of {0}.  You gave "{1}".
""".format(
                        PERTURBATION_KINDS, self.kind
                    )
                )
            )
        if self.kind == "density_direction":
            total = integrate(self.values, self.system)
            if abs(total) > TOL_ZERO_MEAN * max(1.0, np.abs(self.values).max()):
                raise ValidationError(
                    error_wrapper(
                        """
A density direction must integrate to zero.  The weighted sum is {0}.
""".format(
                            total
                        )
                    )
                )


@dataclass(frozen=True)
class RepresentabilityReport:
    representable: bool
    negative_sites: tuple
    weighted_sum: float
    sum_violation: float
    sobolev_satisfied: bool = True

    def to_dict(self):
        return {
            "representable": self.representable,
            "negative_sites": list(self.negative_sites),
            "weighted_sum": self.weighted_sum,
            "sum_violation": self.sum_violation,
            "sobolev_satisfied": self.sobolev_satisfied,
        }

    def __bool__(self):
        return self.representable


def _check_length(values, system, label):
    if values.ndim != 1 or values.shape[0] != system.sites:
        raise DimensionError(
            error_wrapper(
                """
The {0} has shape {1}, the lattice has {2} sites.
""".format(
                    label, values.shape, system.sites
                )
            )
        )


def _values(field, system=None):
    if hasattr(field, "values") and hasattr(field, "system"):
        return np.asarray(field.values), field.system
    values = np.asarray(field, dtype=float)
    if system is None:
        raise ValidationError(
            error_wrapper(
                """
A bare array needs the lattice system to be integrated.
"""
            )
        )
    _check_length(values, system, "field")
    return values, system


def integrate(values, system):
    """Quadrature sum of a site function."""
    return float(np.sum(system.spacing * np.asarray(values, dtype=float)))


def weighted_inner(f, g, system=None):
    """Quadrature inner product of two site functions."""
    fv, system = _values(f, system)
    gv, _ = _values(g, system)
    _check_length(gv, system, "field")
    return float(np.sum(system.spacing * fv * gv))


def weighted_mean(values, system):
    values = np.asarray(values, dtype=float)
    return float(np.sum(system.spacing * values) / (system.spacing * system.sites))


def norm_13(field, system=None):
    """max of the weighted l1 and l3 norms of a density or perturbation.

    Finite dimensional stand-in of the L1 intersect L3 norm.
    """
    values, system = _values(field, system)
    absvals = np.abs(values)
    norm1 = np.sum(system.spacing * absvals)
    norm3 = np.sum(system.spacing * absvals ** 3) ** (1.0 / 3.0)
    return float(max(norm1, norm3))


def norm_2(field, system=None):
    values, system = _values(field, system)
    return float(np.sqrt(np.sum(system.spacing * values ** 2)))


def norm_inf(field, system=None):
    values, _ = _values(field, system)
    return float(np.max(np.abs(values)))


def is_representable(n, tol_neg=TOL_NEG, tol_sum=TOL_SUM):
    """Check non-negativity and normalization of a density.

    The discrete Sobolev condition (finite gradient of sqrt(n)) holds on
    every finite lattice and is always reported as satisfied.
    """
    values = np.asarray(n.values)
    system = n.system
    negative = tuple(int(i) for i in np.flatnonzero(values < -tol_neg))
    total = integrate(values, system)
    violation = abs(total - system.particle_count)
    return RepresentabilityReport(
        representable=(not negative) and violation <= tol_sum,
        negative_sites=negative,
        weighted_sum=total,
        sum_violation=violation,
    )


def project_zero_mean(v):
    """Remove the weighted mean; the result carries the zero_mean gauge."""
    values = zero_mean_values(v.values, v.system)
    return PotentialField(values, v.system, gauge="zero_mean")


def zero_mean_values(values, system):
    values = np.asarray(values, dtype=float)
    if np.all(values == values[0]):
        # pure gauge
        return np.zeros_like(values)
    return values - weighted_mean(values, system)


def make_density(values, system):
    return DensityField(np.asarray(values, dtype=float), system)


def make_potential(values, system, gauge="raw"):
    return PotentialField(np.asarray(values, dtype=float), system, gauge=gauge)


def make_perturbation(values, system, kind="potential_direction"):
    return PerturbationField(np.asarray(values, dtype=float), system, kind=kind)


def density_direction(n1, n0):
    """Perturbation n1 - n0 between two densities of the same lattice.

    Both densities carry N particles only up to round-off, so the
    difference is projected onto the zero-integral subspace.
    """
    diff = np.asarray(n1.values) - np.asarray(n0.values)
    return PerturbationField(
        zero_mean_values(diff, n0.system), n0.system, kind="density_direction"
    )


def uniform_density(system):
    value = system.particle_count / (system.spacing * system.sites)
    return DensityField(np.full(system.sites, value), system)
