"""Beam geometry and run configuration.

The configuration file format is flat ``key = value`` text. Lines starting
with ``#`` are comments (units are documented there), blank lines are
ignored. Every key in :data:`CONFIG_SCHEMA` is required; the canonical
default document is :data:`DEFAULT_CONFIG_TEXT`.
"""

from __future__ import annotations

from dataclasses import dataclass, fields


class ConfigError(ValueError):
    """Malformed configuration document or invariant violation."""


@dataclass(frozen=True)
class BeamGeometry:
    """Interface position ``ell0`` and total beam length ``ell`` (length units).

    The damping is active on ``(ell0, ell)`` and absent on ``(0, ell0)``.
    """

    ell0: float
    ell: float

    def __post_init__(self):
        if not (0.0 < self.ell0 < self.ell):
            raise ConfigError(
                f"interface outside beam: need 0 < ell0 < ell, "
                f"got ell0={self.ell0}, ell={self.ell}"
            )

    @property
    def left_length(self) -> float:
        return self.ell0

    @property
    def right_length(self) -> float:
        return self.ell - self.ell0


# key -> (type, description).  Order fixes the serialization layout.
CONFIG_SCHEMA = {
    "ell0": (float, "interface position (length units)"),
    "ell": (float, "beam length (length units)"),
    "n_left": (int, "collocation points on (0, ell0), >= 8"),
    "n_right": (int, "collocation points on (ell0, ell), >= 8"),
    "lambda_min": (float, "scan range start (frequency units), > 0"),
    "lambda_max": (float, "scan range end (frequency units), > lambda_min"),
    "n_lambda": (int, "number of log-spaced scan points, >= 8"),
    "eig_residual_tol": (float, "eigenpair residual gate (dimensionless)"),
    "solve_residual_tol": (float, "linear solve residual gate (dimensionless)"),
    "oracle_tol": (float, "discrete-vs-exact inverse gate (dimensionless)"),
    "seed": (int, "RNG seed (unsigned integer)"),
    "t_final": (float, "time-evolution horizon (time units), > 0"),
    "dt": (float, "time step (time units), 0 < dt < t_final"),
}

DEFAULT_CONFIG_TEXT = """\
# beam geometry (length units)
ell0 = 0.5
ell = 1.0
# collocation points per subdomain (dimensionless counts)
n_left = 48
n_right = 48
# resolvent scan range (frequency units) and point count, log spaced
lambda_min = 10.0
lambda_max = 10000.0
n_lambda = 40
# tolerances (dimensionless)
eig_residual_tol = 1e-08
solve_residual_tol = 1e-09
oracle_tol = 1e-06
# random number generator seed
seed = 20240901
# time evolution horizon and step (time units)
t_final = 20.0
dt = 0.001
"""


@dataclass(frozen=True)
class RunConfig:
    """Validated parameters driving every subcommand of one run."""

    geometry: BeamGeometry
    n_left: int
    n_right: int
    lambda_min: float
    lambda_max: float
    n_lambda: int
    eig_residual_tol: float
    solve_residual_tol: float
    oracle_tol: float
    seed: int
    t_final: float
    dt: float

    def __post_init__(self):
        if self.n_left < 8 or self.n_right < 8:
            raise ConfigError(
                f"n_left and n_right must be >= 8, got {self.n_left}, {self.n_right}"
            )
        if not (0.0 < self.lambda_min < self.lambda_max):
            raise ConfigError(
                f"need 0 < lambda_min < lambda_max, got "
                f"{self.lambda_min}, {self.lambda_max}"
            )
        if self.n_lambda < 8:
            raise ConfigError(f"n_lambda must be >= 8, got {self.n_lambda}")
        for key in ("eig_residual_tol", "solve_residual_tol", "oracle_tol"):
            if getattr(self, key) < 0.0:
                raise ConfigError(f"{key} must be nonnegative")
        if self.seed < 0:
            raise ConfigError(f"seed must be an unsigned integer, got {self.seed}")
        if not (0.0 < self.dt < self.t_final):
            raise ConfigError(
                f"need 0 < dt < t_final, got dt={self.dt}, t_final={self.t_final}"
            )

    def replace(self, **updates) -> "RunConfig":
        """Return a copy with the given flat keys replaced."""
        flat = self.to_dict()
        flat.update(updates)
        return config_from_dict(flat)

    def to_dict(self) -> dict:
        """Flat key/value view matching the configuration file keys."""
        out = {"ell0": self.geometry.ell0, "ell": self.geometry.ell}
        for f in fields(self):
            if f.name != "geometry":
                out[f.name] = getattr(self, f.name)
        return out


def config_from_dict(values: dict) -> RunConfig:
    geometry = BeamGeometry(ell0=values["ell0"], ell=values["ell"])
    rest = {k: values[k] for k in CONFIG_SCHEMA if k not in ("ell0", "ell")}
    return RunConfig(geometry=geometry, **rest)


def parse_config(text: str) -> RunConfig:
    """Parse a flat key/value configuration document into a RunConfig.

    Raises ConfigError naming the offending line, key, or invariant.
    """
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in CONFIG_SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        kind = CONFIG_SCHEMA[key][0]
        try:
            raw[key] = kind(value) if kind is not int else int(value, 0)
        except ValueError as exc:
            raise ConfigError(
                f"line {lineno}: cannot parse {key!r} as {kind.__name__}: {value!r}"
            ) from exc
    missing = [k for k in CONFIG_SCHEMA if k not in raw]
    if missing:
        raise ConfigError(f"missing key(s): {', '.join(missing)}")
    return config_from_dict(raw)


def serialize_config(cfg: RunConfig) -> str:
    """Render a RunConfig as a canonical configuration document.

    ``parse_config(serialize_config(cfg))`` reproduces ``cfg`` exactly.
    """
    values = cfg.to_dict()
    lines = []
    for key, (kind, desc) in CONFIG_SCHEMA.items():
        value = values[key]
        text = repr(float(value)) if kind is float else str(int(value))
        lines.append(f"{key} = {text}  # {desc}")
    return "\n".join(lines) + "\n"


def default_config() -> RunConfig:
    return parse_config(DEFAULT_CONFIG_TEXT)
