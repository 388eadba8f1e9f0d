"""Experiment configuration files.

One INI file per experiment, read with configparser.  Every value is
validated with ``lbutils.check`` so that a malformed file raises
ValidationError.
"""

import configparser
import os
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from . import lbutils
from .lattice.ensembles import EnsembleWeights, canonical_weights
from .lattice.ks_inversion import PROBE_SCHEDULE, InversionConfig
from .lattice.lattice_grid import (
    TOPOLOGIES,
    LatticeSystem,
    PotentialField,
    make_density,
    uniform_density,
)
from .lattice.lieb_search import FUNCTIONALS, LiebConfig
from .lattice.operators import HamiltonianSpec, InteractionSpec, nearest_neighbor_interaction

OPERATIONS = (
    "spectrum",
    "kernel",
    "cancellation",
    "remainder",
    "conditioning",
    "inversion",
    "roundtrip",
    "probe",
    "lieb",
    "lieb_family",
    "derivative",
)
POTENTIAL_PRESETS = ("uniform", "linear_bias", "random", "alternating")
INTERACTION_CHOICES = ("none", "nearest_neighbor", "dense_pairwise")
PERTURBATION_CHOICES = ("bump", "random", "constant")
SECTIONS = (
    "scenario",
    "system",
    "potential",
    "interaction",
    "perturbation",
    "weights",
    "tolerances",
    "inversion",
    "lieb",
    "study",
    "output",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated content of one experiment file."""

    name: str
    operation: str
    seed: int = 0
    tags: tuple = ()
    description: str = ""
    sites: int = 4
    topology: str = "ring"
    spacing: float = 1.0
    particles: int = 1
    hopping: float = 1.0
    potential_values: Optional[tuple] = None
    potential_preset: str = "uniform"
    potential_scale: float = 0.0
    interaction_kind: str = "none"
    interaction_strength: float = 0.0
    interaction_matrix: Optional[tuple] = None
    perturbation_values: Optional[tuple] = None
    perturbation_kind: str = "bump"
    perturbation_site: int = 0
    perturbation_scale: float = 1.0
    lambdas: Optional[tuple] = None
    degeneracy_rtol: float = 1.0e-9
    inversion: InversionConfig = field(default_factory=InversionConfig)
    schedule: tuple = PROBE_SCHEDULE
    lieb: LiebConfig = field(default_factory=LiebConfig)
    epsilons: tuple = (1.0e-2, 1.0e-3, 1.0e-4)
    draws: int = 50
    pairs: int = 200
    sizes: tuple = (4, 8, 16, 32)
    particle_counts: tuple = (1, 2)
    unequal: tuple = (0.7, 0.3)
    target: str = "forward"
    second_target: str = "uniform"
    functional: str = "T_L"
    output_dir: str = "results"
    source: str = ""

    def with_overrides(self, seed=None, out=None):
        """Command line --seed and --out win over the file."""
        changes = {}
        if seed is not None:
            changes["seed"] = int(seed)
        if out is not None:
            changes["output_dir"] = out
        return replace(self, **changes)

    def system(self):
        return LatticeSystem(
            self.sites,
            topology=self.topology,
            spacing=self.spacing,
            particle_count=self.particles,
        )

    def rng(self):
        return np.random.default_rng(self.seed)

    def potential(self, rng=None):
        system = self.system()
        if self.potential_values is not None:
            return PotentialField(np.array(self.potential_values), system)
        rng = self.rng() if rng is None else rng
        index = np.arange(system.sites, dtype=float)
        scale = self.potential_scale
        if self.potential_preset == "uniform":
            values = np.full(system.sites, scale)
        elif self.potential_preset == "linear_bias":
            values = scale * (index - index.mean()) / max(index[-1], 1.0)
        elif self.potential_preset == "alternating":
            values = scale * (-1.0) ** index
        else:
            values = rng.uniform(-scale, scale, system.sites)
        return PotentialField(values, system)

    def interaction(self):
        system = self.system()
        if self.interaction_kind == "none":
            return None
        if self.interaction_kind == "nearest_neighbor":
            return nearest_neighbor_interaction(system, self.interaction_strength)
        matrix = np.array(self.interaction_matrix, dtype=float).reshape(
            system.sites, system.sites
        )
        return InteractionSpec("dense_pairwise", matrix)

    def hamiltonian(self, rng=None):
        return HamiltonianSpec(
            self.system(),
            self.potential(rng),
            hopping=self.hopping,
            interaction=self.interaction(),
        )

    def perturbation(self, rng=None):
        system = self.system()
        if self.perturbation_values is not None:
            return np.array(self.perturbation_values)
        if self.perturbation_kind == "constant":
            return np.full(system.sites, self.perturbation_scale)
        if self.perturbation_kind == "bump":
            values = np.zeros(system.sites)
            values[self.perturbation_site] = self.perturbation_scale
            return values
        rng = self.rng() if rng is None else rng
        return self.perturbation_scale * rng.standard_normal(system.sites)

    def weights(self, q):
        if self.lambdas is None:
            return canonical_weights(q)
        return EnsembleWeights(np.array(self.lambdas))

    def density(self, which, forward):
        """'forward', 'uniform' or an explicit comma list of site densities."""
        if which == "forward":
            return forward()
        if which == "uniform":
            return uniform_density(self.system())
        values = lbutils.make_float_array(which, kwdname="target", n=self.sites)
        return make_density(values, self.system())

    def to_dict(self):
        echo = asdict(self)
        echo.pop("source")
        echo.pop("output_dir")
        return echo


def _get(parser, section, key, ctype, valid="pass", nargs=None, default=None, vlen=1):
    if not parser.has_option(section, key):
        return default
    raw = parser.get(section, key).strip()
    if raw == "":
        return default
    return lbutils.check(
        "{0}.{1}".format(section, key), key, raw, ctype, valid, nargs, vlen=vlen
    )


def _get_bool(parser, section, key, default):
    if not parser.has_option(section, key):
        return default
    try:
        return parser.getboolean(section, key)
    except ValueError as e:
        raise lbutils.ValidationError(lbutils.error_wrapper(str(e)))


def _get_list(parser, section, key, ctype=float, default=None, n=None):
    if not parser.has_option(section, key):
        return default
    raw = parser.get(section, key).strip()
    if raw == "":
        return default
    try:
        items = lbutils.make_list(raw, n=n, kwdname="{0}.{1}".format(section, key))
        return tuple(ctype(i) for i in items)
    except (TypeError, ValueError) as e:
        raise lbutils.ValidationError(
            lbutils.error_wrapper(
                """
The entry "{0}" of section [{1}] must be a comma separated list of numbers.

{2}
""".format(
                    key, section, e
                )
            )
        )


def parse_config(text, source="<string>"):
    """ExperimentConfig from the text of an INI file."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as e:
        raise lbutils.ValidationError(
            lbutils.error_wrapper(
                """
Cannot parse the configuration "{0}":

{1}
""".format(
                    source, e
                )
            )
        )

    unknown = [s for s in parser.sections() if s not in SECTIONS]
    if unknown or not parser.has_section("scenario"):
        raise lbutils.ValidationError(
            lbutils.error_wrapper(
                """
The configuration "{0}" needs a [scenario] section and may only contain the
sections {1}.  Unknown sections: {2}.
""".format(
                    source, SECTIONS, unknown
                )
            )
        )

    name = _get(parser, "scenario", "name", str)
    if name is None:
        name = os.path.splitext(os.path.basename(source))[0]
    kwds = {
        "name": name,
        "operation": _get(parser, "scenario", "operation", str, "domain", OPERATIONS),
        "seed": _get(parser, "scenario", "seed", int, "range", [0, None], 0),
        "tags": tuple(
            t.strip() for t in parser.get("scenario", "tags", fallback="").split(",") if t.strip()
        ),
        "description": parser.get("scenario", "description", fallback="").strip(),
        "source": source,
    }
    if kwds["operation"] is None:
        raise lbutils.ValidationError(
            lbutils.error_wrapper(
                """
The [scenario] section of "{0}" must name an operation, one of {1}.
""".format(
                    source, OPERATIONS
                )
            )
        )

    sites = _get(parser, "system", "sites", int, "range", [2, None], 4)
    kwds.update(
        sites=sites,
        topology=_get(parser, "system", "topology", str, "domain", TOPOLOGIES, "ring"),
        spacing=_get(parser, "system", "spacing", float, "range", [0, None], 1.0),
        particles=_get(parser, "system", "particles", int, "range", [1, sites], 1),
        hopping=_get(parser, "system", "hopping", float, default=1.0),
    )

    kwds.update(
        potential_values=_get_list(parser, "potential", "values", n=sites),
        potential_preset=_get(
            parser, "potential", "preset", str, "domain", POTENTIAL_PRESETS, "uniform"
        ),
        potential_scale=_get(parser, "potential", "scale", float, default=0.0),
    )

    kind = _get(parser, "interaction", "kind", str, "domain", INTERACTION_CHOICES, "none")
    matrix = _get_list(parser, "interaction", "matrix", n=sites * sites)
    if kind == "dense_pairwise" and matrix is None:
        raise lbutils.ValidationError(
            lbutils.error_wrapper(
                """
A dense_pairwise interaction needs "matrix", {0} numbers in row-major order.
""".format(
                    sites * sites
                )
            )
        )
    kwds.update(
        interaction_kind=kind,
        interaction_strength=_get(parser, "interaction", "strength", float, default=0.0),
        interaction_matrix=matrix,
    )

    kwds.update(
        perturbation_values=_get_list(parser, "perturbation", "values", n=sites),
        perturbation_kind=_get(
            parser, "perturbation", "kind", str, "domain", PERTURBATION_CHOICES, "bump"
        ),
        perturbation_site=_get(
            parser, "perturbation", "site", int, "range", [0, sites - 1], 0
        ),
        perturbation_scale=_get(parser, "perturbation", "scale", float, default=1.0),
        lambdas=_get_list(parser, "weights", "lambdas"),
    )

    degeneracy_rtol = _get(
        parser, "tolerances", "degeneracy_rtol", float, "range", [0, None], 1.0e-9
    )
    kwds["degeneracy_rtol"] = degeneracy_rtol

    defaults = InversionConfig()
    inversion = {
        "max_iterations": _get(
            parser, "inversion", "max_iterations", int, "range", [1, None], defaults.max_iterations
        ),
        "step_damping": _get(
            parser, "inversion", "step_damping", float, "range", [0, 1], defaults.step_damping
        ),
        "residual_tol": _get(
            parser, "tolerances", "residual_tol", float, "range", [0, None], defaults.residual_tol
        ),
        "mu0": _get(parser, "inversion", "mu0", float, "range", [0, None], defaults.mu0),
        "mu_ratio": _get(
            parser, "inversion", "mu_ratio", float, "range", [0, 1], defaults.mu_ratio
        ),
        "mu_floor": _get(
            parser, "inversion", "mu_floor", float, "range", [0, None], defaults.mu_floor
        ),
        "hopping": kwds["hopping"],
        "degeneracy_rtol": degeneracy_rtol,
    }
    kwds["schedule"] = _get_list(parser, "inversion", "schedule", default=PROBE_SCHEDULE)

    ldefaults = LiebConfig()
    lieb = {
        "max_iterations": _get(
            parser, "lieb", "max_iterations", int, "range", [0, None], ldefaults.max_iterations
        ),
        "step_a": _get(parser, "lieb", "step_a", float, "range", [0, None], ldefaults.step_a),
        "step_b": _get(parser, "lieb", "step_b", float, "range", [0, None], ldefaults.step_b),
        "polish": _get_bool(parser, "lieb", "polish", ldefaults.polish),
        "gradient_tol": _get(
            parser, "tolerances", "gradient_tol", float, "range", [0, None], ldefaults.gradient_tol
        ),
        "hopping": kwds["hopping"],
        "degeneracy_rtol": degeneracy_rtol,
    }

    kwds.update(
        epsilons=_get_list(parser, "study", "epsilons", default=(1.0e-2, 1.0e-3, 1.0e-4)),
        draws=_get(parser, "study", "draws", int, "range", [1, None], 50),
        pairs=_get(parser, "study", "pairs", int, "range", [0, None], 200),
        sizes=_get_list(parser, "study", "sizes", ctype=int, default=(4, 8, 16, 32)),
        particle_counts=_get_list(parser, "study", "particle_counts", ctype=int, default=(1, 2)),
        unequal=_get_list(parser, "study", "unequal", default=(0.7, 0.3)),
        target=parser.get("study", "target", fallback="forward").strip(),
        second_target=parser.get("study", "second_target", fallback="uniform").strip(),
        functional=_get(parser, "study", "functional", str, "domain", FUNCTIONALS, "T_L"),
        output_dir=parser.get("output", "dir", fallback="results").strip(),
    )

    try:
        kwds["inversion"] = InversionConfig(**inversion)
        kwds["lieb"] = LiebConfig(**lieb)
        config = ExperimentConfig(**kwds)
        # Build once so that lattice and field invariants fail at parse time.
        config.hamiltonian()
    except lbutils.ValidationError:
        raise
    except ValueError as e:
        raise lbutils.ValidationError(str(e))
    return config


def read_config(path):
    """ExperimentConfig of the file at ``path``."""
    try:
        with open(path) as fp:
            text = fp.read()
    except OSError as e:
        raise lbutils.ValidationError(
            lbutils.error_wrapper(
                """
Cannot read the configuration file "{0}": {1}
""".format(
                    path, e
                )
            )
        )
    return parse_config(text, source=path)
