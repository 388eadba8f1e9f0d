"""Lieb functionals by concave dual search, energy pieces and derivative probes.

F_L[n] = sup_v g(v) with g(v) = E_0[v] - sum(spacing * v * n).  The
supergradient of g is ``spacing * (n[v] - n)`` with n[v] the equal-weights
ground density; at a degenerate v every ground ensemble density gives one.
T_L is the same search without the interaction.
"""

import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd
from scipy import optimize

from ..lbutils import (
    ConvergenceWarning,
    RepresentabilityWarning,
    ValidationError,
    error_wrapper,
)
from .ensembles import manifold_density, nearest_manifold_density
from .lattice_grid import (
    PotentialField,
    is_representable,
    norm_13,
    zero_mean_values,
)
from .operators import HamiltonianSpec, nearest_neighbor_interaction, solve

FUNCTIONALS = ("F_L", "T_L")


@dataclass(frozen=True)
class LiebConfig:
    max_iterations: int = 200
    step_a: float = 1.0
    step_b: float = 10.0
    polish: bool = True
    polish_iterations: int = 500
    gradient_tol: float = 1.0e-7
    hopping: float = 1.0
    degeneracy_rtol: float = 1.0e-9

    def __post_init__(self):
        problems = []
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 0:
            problems.append("max_iterations must be a non-negative integer")
        if not self.step_a > 0 or not self.step_b > 0:
            problems.append("step_a and step_b must be positive")
        if not self.gradient_tol > 0:
            problems.append("gradient_tol must be positive")
        if problems:
            raise ValidationError(
                error_wrapper(
                    """
Invalid Lieb search configuration: {0}.
""".format(
                        "; ".join(problems)
                    )
                )
            )

    def step(self, k):
        """Diminishing step a / (k + b)."""
        return self.step_a / (k + self.step_b)


@dataclass(frozen=True)
class LiebEvaluation:
    """Best dual value found and the potential attaining it.

    ``value`` never exceeds the functional; on densities that are not
    ground densities it is a lower bound with ``converged`` False.
    ``dual_gap`` is the primal-dual mismatch of the closest ground ensemble
    at the returned potential.
    """

    functional: str
    value: float
    potential: PotentialField
    gradient_norm: float
    dual_gap: float
    iterations: int
    converged: bool
    trace: tuple = field(default_factory=tuple)

    def to_dict(self):
        return {
            "functional": self.functional,
            "value": self.value,
            "potential": self.potential.values,
            "gradient_norm": self.gradient_norm,
            "dual_gap": self.dual_gap,
            "iterations": self.iterations,
            "converged": self.converged,
            "trace": list(self.trace),
        }


@dataclass(frozen=True)
class EnergyDecomposition:
    lieb: float
    kinetic: float
    hartree: float
    xc: float
    external: float
    converged: bool = True

    @property
    def total(self):
        return self.kinetic + self.hartree + self.xc + self.external

    def to_dict(self):
        return dict(asdict(self), total=self.total)


@dataclass(frozen=True)
class PotentialSplit:
    """v_s = v + v_H + v_XC, every piece in the zero_mean gauge."""

    kohn_sham: PotentialField
    external: PotentialField
    hartree: PotentialField
    xc: PotentialField
    converged: bool

    def frame(self):
        return pd.DataFrame(
            {
                "site": np.arange(self.kohn_sham.values.size),
                "v_s": self.kohn_sham.values,
                "v": self.external.values,
                "v_H": self.hartree.values,
                "v_XC": self.xc.values,
            }
        )


def _spec(values, system, interaction, hopping):
    return HamiltonianSpec(
        system,
        PotentialField(np.asarray(values), system),
        hopping=hopping,
        interaction=interaction,
    )


def _evaluate(values, n, interaction, cfg):
    system = n.system
    bundle = solve(
        _spec(values, system, interaction, cfg.hopping),
        degeneracy_rtol=cfg.degeneracy_rtol,
    )
    density = manifold_density(bundle).values
    target = np.asarray(n.values)
    value = bundle.ground_energy - system.spacing * float(np.dot(values, target))
    return value, density - target


def dual_value(v, n, interaction=None, hopping=1.0):
    """g(v) = E_0[v] - sum(spacing * v * n)."""
    values = np.asarray(getattr(v, "values", v), dtype=float)
    return _evaluate(values, n, interaction, LiebConfig(hopping=hopping))[0]


def energy_minimum(v, interaction=None, hopping=1.0):
    """Ground state energy, the minimum of E_v[n] over densities."""
    return solve(_spec(v.values, v.system, interaction, hopping)).ground_energy


def _check_density(n):
    report = is_representable(n)
    if not report.representable:
        raise ValidationError(
            error_wrapper(
                """
The density is not representable: negative sites {0}, weighted sum {1!r} for
N = {2}.
""".format(
                    list(report.negative_sites), report.weighted_sum, n.system.particle_count
                )
            )
        )
    zero_sites = np.flatnonzero(np.asarray(n.values) <= 1.0e-12)
    if zero_sites.size:
        warnings.warn(
            RepresentabilityWarning(
                error_wrapper(
                    """
The density vanishes on sites {0}.  The dual search can only return a lower
bound.
""".format(
                        zero_sites.tolist()
                    )
                )
            )
        )


def _optimality(values, n, interaction, cfg):
    """Supergradient norm and primal-dual mismatch at the potential ``values``.

    Ensembles range over density matrices on every state within
    max(degeneracy tolerance, gradient_tol) of the ground energy, so a
    density inside a degenerate ground class is stationary.  The gap is
    Tr(gamma H) - E_0 + |sum(h v (n_gamma - n))| for the closest ensemble.
    """
    system = n.system
    target = np.asarray(n.values)
    bundle = solve(
        _spec(values, system, interaction, cfg.hopping),
        degeneracy_rtol=cfg.degeneracy_rtol,
    )
    window = max(bundle.degeneracy_tol, cfg.gradient_tol)
    q = int(np.count_nonzero(bundle.energies - bundle.energies[0] <= window))

    canonical = manifold_density(bundle).values
    spread = bundle.energies[: bundle.ground_degeneracy] - bundle.energies[0]
    candidates = [(canonical, float(np.mean(spread)))]
    if q > 1:
        fit = nearest_manifold_density(bundle, n, q)
        candidates.append((fit.density.values, fit.excess_energy))

    best = None
    for density, excess in candidates:
        residual = density - target
        size = norm_13(residual, system)
        gap = excess + abs(system.spacing * float(np.dot(values, residual)))
        if best is None or size < best[0]:
            best = (size, gap)
    return best


def lieb_functional(n, interaction=None, cfg=None, initial_guess=None):
    """F_L[n] (or T_L[n] without interaction) by supergradient ascent and polish.

    The ascent uses the step a / (k + b) and keeps the best iterate; the
    BFGS polish starts from it.  The returned value is the largest dual
    value seen.
    """
    cfg = LiebConfig() if cfg is None else cfg
    _check_density(n)
    system = n.system
    h = system.spacing

    if initial_guess is None:
        v = np.zeros(system.sites)
    else:
        v = zero_mean_values(getattr(initial_guess, "values", initial_guess), system)

    trace = []
    best = {"value": -np.inf, "v": v, "residual": None}

    def record(values):
        value, residual = _evaluate(values, n, interaction, cfg)
        trace.append(value)
        if value > best["value"]:
            best.update(value=value, v=np.array(values), residual=residual)
        return value, residual

    for k in range(int(cfg.max_iterations)):
        _, residual = record(v)
        if norm_13(residual, system) < cfg.gradient_tol:
            break
        v = zero_mean_values(v + cfg.step(k) * h * residual, system)
    else:
        record(v)

    if cfg.polish and norm_13(best["residual"], system) >= cfg.gradient_tol:

        def negative(values):
            value, residual = record(values)
            return -value, -h * residual

        optimize.minimize(
            negative,
            best["v"],
            jac=True,
            method="BFGS",
            options={"gtol": 1.0e-12, "maxiter": int(cfg.polish_iterations)},
        )

    gradient_norm, gap = _optimality(best["v"], n, interaction, cfg)
    converged = gradient_norm < cfg.gradient_tol
    if not converged:
        warnings.warn(
            ConvergenceWarning(
                error_wrapper(
                    """
The dual search stopped with supergradient norm {0!r} above {1!r}; the value
is a lower bound.
""".format(
                        gradient_norm, cfg.gradient_tol
                    )
                )
            )
        )
    return LiebEvaluation(
        functional="T_L" if interaction is None else "F_L",
        value=float(best["value"]),
        potential=PotentialField(zero_mean_values(best["v"], system), system, gauge="zero_mean"),
        gradient_norm=float(gradient_norm),
        dual_gap=float(gap),
        iterations=len(trace),
        converged=bool(converged),
        trace=tuple(trace),
    )


def hartree_energy(n, interaction=None):
    """E_H = 1/2 sum_ij w_ij (h n_i)(h n_j)."""
    if interaction is None:
        return 0.0
    occ = n.system.spacing * np.asarray(n.values)
    return float(0.5 * occ @ interaction.strength @ occ)


def hartree_potential(n, interaction=None):
    """v_H(i) = sum_j w_ij h n_j, raw gauge."""
    if interaction is None:
        return PotentialField(np.zeros(n.system.sites), n.system)
    occ = n.system.spacing * np.asarray(n.values)
    return PotentialField(interaction.strength @ occ, n.system)


def xc_decomposition(n, interaction=None, cfg=None, v=None):
    """F_L = T_L + E_H + E_XC plus the external term sum(h v n).

    Without ``v`` the external potential is the F_L optimizer.
    """
    cfg = LiebConfig() if cfg is None else cfg
    lieb = lieb_functional(n, interaction, cfg)
    kinetic = lieb if interaction is None else lieb_functional(n, None, cfg)
    hartree = hartree_energy(n, interaction)
    potential = lieb.potential.values if v is None else np.asarray(v.values)
    external = n.system.spacing * float(np.dot(potential, n.values))
    return EnergyDecomposition(
        lieb=lieb.value,
        kinetic=kinetic.value,
        hartree=hartree,
        xc=lieb.value - kinetic.value - hartree,
        external=external,
        converged=lieb.converged and kinetic.converged,
    )


def potential_split(n, interaction=None, cfg=None, v=None):
    """Kohn-Sham potential of ``n`` split into external, Hartree and XC parts."""
    cfg = LiebConfig() if cfg is None else cfg
    system = n.system
    kohn_sham = lieb_functional(n, None, cfg)
    converged = kohn_sham.converged
    if v is None:
        lieb = lieb_functional(n, interaction, cfg) if interaction is not None else kohn_sham
        external = lieb.potential.values
        converged = converged and lieb.converged
    else:
        external = zero_mean_values(v.values, system)
    hartree = zero_mean_values(hartree_potential(n, interaction).values, system)
    xc = zero_mean_values(kohn_sham.potential.values - external - hartree, system)

    def gauge(values):
        return PotentialField(zero_mean_values(values, system), system, gauge="zero_mean")

    return PotentialSplit(
        kohn_sham=kohn_sham.potential,
        external=gauge(external),
        hartree=gauge(hartree),
        xc=gauge(xc),
        converged=bool(converged),
    )


@dataclass(frozen=True)
class DerivativeProbe:
    functional: str
    base_value: float
    predicted: float
    rows: tuple

    def frame(self):
        return pd.DataFrame(
            list(self.rows),
            columns=["epsilon", "value", "quotient", "difference", "converged"],
        )

    def to_dict(self):
        return {
            "functional": self.functional,
            "base_value": self.base_value,
            "predicted": self.predicted,
            "rows": self.frame().to_dict(orient="list"),
        }


def directional_derivative_probe(functional, n, n1, epsilons, interaction=None, cfg=None):
    """Difference quotients (G[n + eps (n1 - n)] - G[n]) / eps.

    ``predicted`` is -sum(h v_hat (n1 - n)) with v_hat the dual optimizer
    at n.  It is reported next to the quotients, never asserted.
    """
    if functional not in FUNCTIONALS:
        raise ValidationError(
            error_wrapper(
                """
The functional should be one of {0}.  You gave "{1}".
""".format(
                    FUNCTIONALS, functional
                )
            )
        )
    epsilons = [float(e) for e in epsilons]
    if any(not 0 < e <= 1 for e in epsilons):
        raise ValidationError(
            error_wrapper(
                """
The epsilons must lie in (0, 1] so that n + eps (n1 - n) stays a convex
combination.  You gave {0}.
""".format(
                    epsilons
                )
            )
        )
    cfg = LiebConfig() if cfg is None else cfg
    used = interaction if functional == "F_L" else None
    system = n.system
    direction = np.asarray(n1.values) - np.asarray(n.values)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        base = lieb_functional(n, used, cfg)
        predicted = -system.spacing * float(np.dot(base.potential.values, direction))
        rows = []
        for eps in epsilons:
            moved = type(n)(np.asarray(n.values) + eps * direction, system)
            value = lieb_functional(moved, used, cfg)
            quotient = (value.value - base.value) / eps
            rows.append(
                (eps, value.value, quotient, quotient - predicted, base.converged and value.converged)
            )
    return DerivativeProbe(
        functional=functional, base_value=base.value, predicted=predicted, rows=tuple(rows)
    )


def lieb_family(system, draws=50, pairs=200, strength=1.0, scale=0.5, seed=0, cfg=None):
    """Energy identity, zero-interaction agreement and midpoint convexity.

    Each energy draw takes a random potential of size ``scale`` and a random
    nearest neighbour strength in [0, 2 strength] and compares
    F_L[n] + sum(h v n) with E_0[v].  The first five draws also compare
    F_L at zero strength with T_L.  Convexity uses the ground densities of
    ``pairs + 1`` random potentials at ``strength``, consecutive ones paired.
    """
    cfg = LiebConfig() if cfg is None else cfg
    rng = np.random.default_rng(seed)
    h = system.spacing

    def ground(values, interaction):
        bundle = solve(
            _spec(values, system, interaction, cfg.hopping),
            degeneracy_rtol=cfg.degeneracy_rtol,
        )
        return bundle.ground_energy, manifold_density(bundle)

    energy_rows = []
    zero_equal = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        for draw in range(int(draws)):
            v_star = scale * rng.standard_normal(system.sites)
            u = float(rng.uniform(0.0, 2.0 * strength))
            interaction = nearest_neighbor_interaction(system, u)
            energy, n = ground(v_star, interaction)
            result = lieb_functional(n, interaction, cfg)
            error = abs(result.value + h * float(np.dot(v_star, n.values)) - energy)
            energy_rows.append((draw, u, result.value, energy, error, result.converged))
            if draw < 5:
                zero = nearest_neighbor_interaction(system, 0.0)
                zero_equal.append(
                    lieb_functional(n, zero, cfg).value == lieb_functional(n, None, cfg).value
                )

        interaction = nearest_neighbor_interaction(system, strength)
        densities = [
            ground(scale * rng.standard_normal(system.sites), interaction)[1]
            for _ in range(int(pairs) + 1)
        ]
        values = [lieb_functional(d, interaction, cfg).value for d in densities]
        convexity_rows = []
        for i in range(int(pairs)):
            mid = type(densities[i])(
                0.5 * (np.asarray(densities[i].values) + np.asarray(densities[i + 1].values)),
                system,
            )
            value = lieb_functional(mid, interaction, cfg).value
            bound = 0.5 * (values[i] + values[i + 1])
            convexity_rows.append((i, value, bound, value - bound))

    energies = pd.DataFrame(
        energy_rows,
        columns=["draw", "strength", "value", "ground_energy", "error", "converged"],
    )
    convexity = pd.DataFrame(
        convexity_rows, columns=["pair", "midpoint_value", "average", "violation"]
    )
    return {
        "draws": int(draws),
        "pairs": int(pairs),
        "max_energy_error": float(energies["error"].max()) if len(energies) else 0.0,
        "converged_fraction": float(energies["converged"].mean()) if len(energies) else 1.0,
        "zero_interaction_equal": bool(all(zero_equal)),
        "max_convexity_violation": (
            float(convexity["violation"].max()) if len(convexity) else 0.0
        ),
        "energies": energies,
        "convexity": convexity,
    }
