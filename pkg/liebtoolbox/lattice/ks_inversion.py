"""Density to potential inversion of the non-interacting lattice problem.

Newton iteration on the exact response kernel of the current iterate, with
a Tikhonov schedule mu_k = mu0 * ratio**k and a damping that is halved
whenever a step would raise the residual.
"""

import warnings
from dataclasses import asdict, dataclass, field, replace

import numpy as np
import pandas as pd

from ..lbutils import (
    ConvergenceWarning,
    NearSingularWarning,
    RepresentabilityWarning,
    ValidationError,
    error_wrapper,
)
from .ensembles import manifold_density
from .lattice_grid import (
    LatticeSystem,
    PotentialField,
    is_representable,
    norm_13,
    norm_2,
    norm_inf,
    zero_mean_values,
)
from .operators import HamiltonianSpec, solve
from .response import canonical_kernel
from .spectral_inverse import TikhonovPolicy, apply_inverse, decompose

VERDICTS = ("converged", "max_iterations", "non_invertible_candidate")
PROBE_SCHEDULE = (1.0e-2, 1.0e-4, 1.0e-6, 1.0e-8, 1.0e-10, 1.0e-12)
ZERO_SITE_TOL = 1.0e-12


@dataclass(frozen=True)
class InversionConfig:
    """Iteration controls.  The ensemble is always the equal-weights one."""

    max_iterations: int = 200
    step_damping: float = 1.0
    residual_tol: float = 1.0e-11
    mu0: float = 1.0e-3
    mu_ratio: float = 0.5
    mu_floor: float = 0.0
    min_damping: float = 1.0 / 1024.0
    hopping: float = 1.0
    degeneracy_rtol: float = 1.0e-9

    def __post_init__(self):
        problems = []
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            problems.append("max_iterations must be a positive integer")
        if not 0 < self.step_damping <= 1:
            problems.append("step_damping must lie in (0, 1]")
        if not 0 < self.min_damping <= self.step_damping:
            problems.append("min_damping must lie in (0, step_damping]")
        if not self.residual_tol > 0:
            problems.append("residual_tol must be positive")
        if self.mu0 < 0 or self.mu_floor < 0:
            problems.append("mu0 and mu_floor must be non-negative")
        if not 0 <= self.mu_ratio <= 1:
            problems.append("mu_ratio must lie in [0, 1]")
        if problems:
            raise ValidationError(
                error_wrapper(
                    """
Invalid inversion configuration: {0}.
""".format(
                        "; ".join(problems)
                    )
                )
            )

    def mu(self, iteration):
        return max(self.mu0 * self.mu_ratio ** iteration, self.mu_floor)


@dataclass(frozen=True)
class InversionReport:
    converged: bool
    iterations: int
    residual: float
    potential: PotentialField
    density: object
    initial_residual: float
    residual_trace: tuple
    step_inf_trace: tuple
    step_2_trace: tuple
    alpha_min_trace: tuple
    mu_trace: tuple
    damping_trace: tuple
    zero_sites: tuple
    events: tuple = field(default_factory=tuple)
    config: InversionConfig = field(default_factory=InversionConfig)

    @property
    def verdict(self):
        if self.converged:
            return "converged"
        if self.zero_sites:
            return "non_invertible_candidate"
        return "max_iterations"

    def trace_frame(self):
        return pd.DataFrame(
            {
                "iteration": np.arange(1, self.iterations + 1),
                "residual": self.residual_trace,
                "step_inf": self.step_inf_trace,
                "step_2": self.step_2_trace,
                "alpha_min": self.alpha_min_trace,
                "mu": self.mu_trace,
                "damping": self.damping_trace,
            }
        )

    def residual_monotone(self, after=5):
        trace = np.asarray(self.residual_trace[after:])
        return bool(np.all(np.diff(trace) <= 0))

    def to_dict(self):
        return {
            "config": asdict(self.config),
            "converged": self.converged,
            "verdict": self.verdict,
            "iterations": self.iterations,
            "residual": self.residual,
            "initial_residual": self.initial_residual,
            "potential": self.potential.values,
            "density": self.density.values,
            "zero_sites": list(self.zero_sites),
            "events": [dict(e) for e in self.events],
            "traces": {
                "residual": list(self.residual_trace),
                "step_inf": list(self.step_inf_trace),
                "step_2": list(self.step_2_trace),
                "alpha_min": list(self.alpha_min_trace),
                "mu": list(self.mu_trace),
                "damping": list(self.damping_trace),
            },
        }


def _spec(values, system, hopping):
    return HamiltonianSpec(system, PotentialField(np.asarray(values), system), hopping=hopping)


def forward_density(v, system=None, hopping=1.0, degeneracy_rtol=1.0e-9):
    """Equal-weights ground density of the non-interacting Hamiltonian with ``v``."""
    system = v.system if system is None else system
    bundle = solve(_spec(v.values, system, hopping), degeneracy_rtol=degeneracy_rtol)
    return manifold_density(bundle)


def _state(values, system, cfg):
    bundle = solve(_spec(values, system, cfg.hopping), degeneracy_rtol=cfg.degeneracy_rtol)
    return bundle, manifold_density(bundle)


def _check_target(n_target):
    report = is_representable(n_target)
    if not report.representable:
        raise ValidationError(
            error_wrapper(
                """
The target density is not representable: negative sites {0}, weighted sum
{1!r} for N = {2}.
""".format(
                    list(report.negative_sites),
                    report.weighted_sum,
                    n_target.system.particle_count,
                )
            )
        )
    zero_sites = tuple(
        int(i) for i in np.flatnonzero(np.asarray(n_target.values) <= ZERO_SITE_TOL)
    )
    if zero_sites:
        warnings.warn(
            RepresentabilityWarning(
                error_wrapper(
                    """
The target density vanishes on sites {0}.  The potential that reproduces it
would diverge there; the inversion is attempted anyway.
""".format(
                        list(zero_sites)
                    )
                )
            )
        )
    return zero_sites


def invert(n_target, cfg=None, initial_guess=None):
    """Newton inversion of ``n_target``; a report is always returned."""
    cfg = InversionConfig() if cfg is None else cfg
    system = n_target.system
    zero_sites = _check_target(n_target)
    target = np.asarray(n_target.values)

    if initial_guess is None:
        v = np.zeros(system.sites)
    else:
        v = zero_mean_values(initial_guess.values, system)
    bundle, density = _state(v, system, cfg)
    residual = norm_13(density.values - target, system)
    initial_residual = residual

    traces = {k: [] for k in ("residual", "step_inf", "step_2", "alpha_min", "mu", "damping")}
    events = []
    near_singular = 0
    iterations = 0
    start_damping = cfg.step_damping
    while residual > cfg.residual_tol and iterations < cfg.max_iterations:
        mu = cfg.mu(iterations)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", NearSingularWarning)
            dec = decompose(canonical_kernel(bundle))
        near_singular += len(caught)
        dm = zero_mean_values(density.values - target, system)
        step = apply_inverse(dec, dm, TikhonovPolicy(mu)).values

        damping = start_damping
        while True:
            trial = zero_mean_values(v - damping * step, system)
            trial_bundle, trial_density = _state(trial, system, cfg)
            trial_residual = norm_13(trial_density.values - target, system)
            crossed = trial_bundle.ground_degeneracy != bundle.ground_degeneracy
            if crossed:
                events.append(
                    {
                        "iteration": iterations + 1,
                        "event": "level_crossing",
                        "damping": damping,
                        "ground_degeneracy": [
                            bundle.ground_degeneracy,
                            trial_bundle.ground_degeneracy,
                        ],
                    }
                )
            if trial_residual <= residual:
                break
            if damping / 2.0 < cfg.min_damping:
                events.append(
                    {"iteration": iterations + 1, "event": "damping_floor", "damping": damping}
                )
                break
            if not crossed:
                events.append(
                    {"iteration": iterations + 1, "event": "residual_increase", "damping": damping}
                )
            damping /= 2.0
        # an accepted crossing halves the damping of the next iteration
        if crossed:
            start_damping = max(damping / 2.0, cfg.min_damping)
        else:
            start_damping = cfg.step_damping

        iterations += 1
        traces["step_inf"].append(norm_inf(trial - v, system))
        traces["step_2"].append(norm_2(trial - v, system))
        traces["alpha_min"].append(dec.alpha_min if dec.alphas.size else np.nan)
        traces["mu"].append(mu)
        traces["damping"].append(damping)
        traces["residual"].append(trial_residual)
        v, bundle, density, residual = trial, trial_bundle, trial_density, trial_residual

    converged = residual <= cfg.residual_tol
    if near_singular:
        events.append({"iteration": iterations, "event": "near_singular", "count": near_singular})
    if not converged:
        warnings.warn(
            ConvergenceWarning(
                error_wrapper(
                    """
The inversion stopped after {0} iterations with residual {1!r}, above the
tolerance {2!r}.
""".format(
                        iterations, residual, cfg.residual_tol
                    )
                )
            )
        )
    return InversionReport(
        converged=bool(converged),
        iterations=iterations,
        residual=float(residual),
        potential=PotentialField(v, system, gauge="zero_mean"),
        density=density,
        initial_residual=float(initial_residual),
        residual_trace=tuple(traces["residual"]),
        step_inf_trace=tuple(traces["step_inf"]),
        step_2_trace=tuple(traces["step_2"]),
        alpha_min_trace=tuple(traces["alpha_min"]),
        mu_trace=tuple(traces["mu"]),
        damping_trace=tuple(traces["damping"]),
        zero_sites=zero_sites,
        events=tuple(events),
        config=cfg,
    )


@dataclass(frozen=True)
class ProbeStage:
    residual_tol: float
    residual: float
    drift: float
    converged: bool
    iterations: int


@dataclass(frozen=True)
class ProbeReport:
    """Warm-started inversions under a tightening residual schedule.

    ``drift`` of a stage is the sup-norm change of the potential from the
    previous stage (from the initial guess for the first one).
    """

    stages: tuple
    potential: PotentialField
    drift_tol: float

    @property
    def verdict(self):
        if all(s.converged for s in self.stages) and self.stages[-1].drift < self.drift_tol:
            return "smooth"
        return "non_smooth"

    def frame(self):
        return pd.DataFrame([asdict(s) for s in self.stages])

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "drift_tol": self.drift_tol,
            "stages": self.frame().to_dict(orient="list"),
            "potential": self.potential.values,
        }


def representability_probe(
    n_target, cfg=None, schedule=PROBE_SCHEDULE, initial_guess=None, drift_tol=1.0e-8
):
    """Residual and potential drift per stage of a tightening schedule.

    A decaying drift is evidence of smooth convergence of the potentials, a
    growing or stalled one of the oscillating or diverging scenario.  No
    membership claim is made either way.
    """
    cfg = InversionConfig() if cfg is None else cfg
    system = n_target.system
    if initial_guess is None:
        guess = PotentialField(np.zeros(system.sites), system, gauge="zero_mean")
    else:
        guess = PotentialField(
            zero_mean_values(initial_guess.values, system), system, gauge="zero_mean"
        )
    stages = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        for tol in schedule:
            report = invert(n_target, replace(cfg, residual_tol=float(tol)), guess)
            drift = norm_inf(report.potential.values - guess.values, system)
            stages.append(
                ProbeStage(
                    residual_tol=float(tol),
                    residual=report.residual,
                    drift=drift,
                    converged=report.converged,
                    iterations=report.iterations,
                )
            )
            guess = report.potential
    return ProbeReport(stages=tuple(stages), potential=guess, drift_tol=drift_tol)


def roundtrip_family(
    sizes=(2, 4, 6, 8),
    particles=(1, 2),
    draws=100,
    seed=0,
    cfg=None,
    topology="ring",
):
    """Forward-then-invert study over random zero-mean potentials.

    Filled lattices (N = L) have a frozen density and are skipped.
    """
    cfg = InversionConfig() if cfg is None else cfg
    rng = np.random.default_rng(seed)
    pairs = [(int(s), int(p)) for s in sizes for p in particles if p < s]
    if not pairs:
        raise ValidationError(
            error_wrapper(
                """
No (sites, particles) pair of the family has N < L.
"""
            )
        )
    records = []
    for draw in range(int(draws)):
        sites, count = pairs[draw % len(pairs)]
        system = LatticeSystem(sites, topology=topology, particle_count=count)
        v_star = zero_mean_values(rng.uniform(-1.0, 1.0, sites), system)
        target = forward_density(
            PotentialField(v_star, system), hopping=cfg.hopping, degeneracy_rtol=cfg.degeneracy_rtol
        )
        report = invert(target, cfg)
        records.append(
            {
                "draw": draw,
                "sites": sites,
                "particles": count,
                "error_inf": norm_inf(report.potential.values - v_star, system),
                "residual": report.residual,
                "iterations": report.iterations,
                "converged": report.converged,
                "monotone_after_5": report.residual_monotone(5),
            }
        )
    frame = pd.DataFrame.from_records(records)
    return {
        "table": frame,
        "max_error_inf": float(frame["error_inf"].max()),
        "max_residual": float(frame["residual"].max()),
        "max_iterations": int(frame["iterations"].max()),
        "converged_fraction": float(frame["converged"].mean()),
        "monotone_fraction": float(frame["monotone_after_5"].mean()),
    }
