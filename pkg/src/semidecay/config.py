"""Tolerance defaults and strict configuration parsing.

Every numerical slack used anywhere in the package lives in one
:class:`Tolerances` object so a single JSON blob controls a whole run.
Configuration mappings are parsed strictly: unknown keys are rejected with
a pointer to the offending entry.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .errors import ConfigError

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Tolerances:
    """Floating-point slack for exact-mathematics contracts.

    Attributes
    ----------
    tol_solve : residual factor for linear solves, scaled by the condition number
    tol_eig : eigenpair residual factor, scaled by the operator norm
    tol_proj : allowed disagreement between the two projector constructions
    tol_exp : relative slack on semigroup evaluation cross-checks
    boundary_margin : half-width of the indeterminate band around decision lines
    h4_ceiling : largest admissible operator norm in the decomposition checks
    injectivity_floor : smallest admissible weighted singular value
    mass_tol : relative mass drift allowed per trajectory
    sym_tol : relative symmetry defect allowed in assembled forms
    floor_factor : signal floor is floor_factor * machine epsilon * initial norm
    laplace_slack : multiplicative slack on the resolvent bound in converse checks
    """

    tol_solve: float = 1e-10
    tol_eig: float = 1e-9
    tol_proj: float = 1e-8
    tol_exp: float = 1e-10
    boundary_margin: float = 1e-9
    h4_ceiling: float = 1e8
    injectivity_floor: float = 1e-8
    mass_tol: float = 1e-12
    sym_tol: float = 1e-12
    floor_factor: float = 1e3
    laplace_slack: float = 1e-6

    def replace(self, **kwargs) -> "Tolerances":
        return dataclasses.replace(self, **kwargs)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_mapping(cls, mapping: dict, where: str = "tolerances") -> "Tolerances":
        known = {f.name for f in dataclasses.fields(cls)}
        for key in mapping:
            if key not in known:
                raise ConfigError(f"unknown key '{key}' at {where}")
        vals = {}
        for key, val in mapping.items():
            try:
                vals[key] = float(val)
            except (TypeError, ValueError):
                raise ConfigError(f"value for {where}.{key} is not a number: {val!r}")
        return cls(**vals)


DEFAULT_TOLERANCES = Tolerances()


def _require_keys(mapping, allowed, required, where):
    if not isinstance(mapping, dict):
        raise ConfigError(f"expected an object at {where}")
    for key in mapping:
        if key not in allowed:
            raise ConfigError(f"unknown key '{key}' at {where}")
    for key in required:
        if key not in mapping:
            raise ConfigError(f"missing key '{key}' at {where}")


@dataclass(frozen=True)
class WeightSpec:
    """Enlarged-space weight choice: m^{-1}(x) = theta(U(x))."""

    kind: str = "polynomial"        # polynomial | stretched-exponential
    k: float = 3.0

    @classmethod
    def from_mapping(cls, mapping, where="problem.weight"):
        _require_keys(mapping, {"kind", "k"}, {"kind", "k"}, where)
        kind = str(mapping["kind"])
        if kind not in ("polynomial", "stretched-exponential"):
            raise ConfigError(f"unknown weight kind '{kind}' at {where}.kind")
        return cls(kind=kind, k=float(mapping["k"]))

    def validate_for_dimension(self, d: int):
        if self.kind == "polynomial" and not self.k > d:
            raise ConfigError(
                f"polynomial weight requires k > d, got k={self.k}, d={d}")
        if self.kind == "stretched-exponential" and not 0.0 < self.k < 1.0:
            raise ConfigError(
                f"stretched-exponential weight requires k in (0,1), got k={self.k}")


@dataclass(frozen=True)
class SwirlSpec:
    """Rotational force field amplitude profile (dimension 2 only)."""

    phi: str = "inverse_linear"     # inverse_linear | constant
    amplitude: float = 1.0

    @classmethod
    def from_mapping(cls, mapping, where="problem.swirl"):
        _require_keys(mapping, {"phi", "amplitude"}, set(), where)
        phi = str(mapping.get("phi", "inverse_linear"))
        if phi not in ("inverse_linear", "constant"):
            raise ConfigError(f"unknown swirl profile '{phi}' at {where}.phi")
        return cls(phi=phi, amplitude=float(mapping.get("amplitude", 1.0)))


@dataclass(frozen=True)
class FPProblem:
    """Drift-diffusion problem definition on a truncated grid."""

    d: int = 1
    s: float = 2.0
    L: float = 8.0
    N: int = 400
    weight: WeightSpec = field(default_factory=WeightSpec)
    swirl: SwirlSpec | None = None
    scheme: str = "implicit-euler"
    t_max: float = 4.0
    dt: float = 0.01
    initial_data: str = "heavy-tail"    # heavy-tail | offset-heavy-tail | equilibrium | gap-mode
    target_a: float | None = None       # decomposition target; default half the gap

    _ALLOWED = {"d", "s", "L", "N", "weight", "swirl", "scheme", "t_max",
                "dt", "initial_data", "target_a"}
    _SCHEMES = ("implicit-euler", "crank-nicolson", "reference-exponential")
    _INITIAL = ("heavy-tail", "offset-heavy-tail", "equilibrium", "gap-mode")

    @classmethod
    def from_mapping(cls, mapping, where="problem"):
        _require_keys(mapping, cls._ALLOWED, {"d", "s", "L", "N"}, where)
        d = int(mapping["d"])
        if d not in (1, 2):
            raise ConfigError(f"dimension must be 1 or 2 at {where}.d")
        s = float(mapping["s"])
        if s < 1.0:
            raise ConfigError(f"potential exponent must satisfy s >= 1 at {where}.s")
        weight = WeightSpec.from_mapping(mapping.get("weight", {"kind": "polynomial", "k": 3.0}),
                                         where=f"{where}.weight")
        weight.validate_for_dimension(d)
        swirl = None
        if mapping.get("swirl") is not None:
            if d != 2:
                raise ConfigError(f"swirl field requires d=2 at {where}.swirl")
            swirl = SwirlSpec.from_mapping(mapping["swirl"], where=f"{where}.swirl")
        scheme = str(mapping.get("scheme", "implicit-euler"))
        if scheme not in cls._SCHEMES:
            raise ConfigError(f"unknown scheme '{scheme}' at {where}.scheme")
        initial = str(mapping.get("initial_data", "heavy-tail"))
        if initial not in cls._INITIAL:
            raise ConfigError(f"unknown initial data '{initial}' at {where}.initial_data")
        target_a = mapping.get("target_a")
        return cls(d=d, s=s, L=float(mapping["L"]), N=int(mapping["N"]),
                   weight=weight, swirl=swirl, scheme=scheme,
                   t_max=float(mapping.get("t_max", 4.0)),
                   dt=float(mapping.get("dt", 0.01)),
                   initial_data=initial,
                   target_a=None if target_a is None else float(target_a))

    def to_dict(self):
        out = {"d": self.d, "s": self.s, "L": self.L, "N": self.N,
               "weight": {"kind": self.weight.kind, "k": self.weight.k},
               "scheme": self.scheme, "t_max": self.t_max, "dt": self.dt,
               "initial_data": self.initial_data, "target_a": self.target_a}
        if self.swirl is not None:
            out["swirl"] = {"phi": self.swirl.phi, "amplitude": self.swirl.amplitude}
        return out


@dataclass(frozen=True)
class InstanceSpec:
    """Parameters of the seeded splitting generator."""

    n: int = 8
    a: float = -0.75
    gap: float = -1.0
    strength: float = 0.5
    k: int = 1

    @classmethod
    def from_mapping(cls, mapping, where="instance"):
        _require_keys(mapping, {"n", "a", "gap", "strength", "k"}, set(), where)
        return cls(n=int(mapping.get("n", 8)), a=float(mapping.get("a", -0.75)),
                   gap=float(mapping.get("gap", -1.0)),
                   strength=float(mapping.get("strength", 0.5)),
                   k=int(mapping.get("k", 1)))

    def to_dict(self):
        return {"n": self.n, "a": self.a, "gap": self.gap,
                "strength": self.strength, "k": self.k}


COMMANDS = ("testbed", "fp-spectrum", "fp-decay", "fp-resolvent-scan", "enlarge-check")


@dataclass(frozen=True)
class RunConfig:
    """Validated top-level run configuration."""

    command: str
    seed: int = 1
    n_seeds: int = 1
    instance: InstanceSpec = field(default_factory=InstanceSpec)
    instance_path: str | None = None
    problem: FPProblem | None = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    out_dir: str = "out"
    jobs: int = 1
    write_operators: bool = False

    _ALLOWED = {"schema_version", "command", "seed", "n_seeds", "instance",
                "instance_path", "problem", "tolerances", "out_dir", "jobs",
                "write_operators"}

    @classmethod
    def from_mapping(cls, mapping, command=None) -> "RunConfig":
        _require_keys(mapping, cls._ALLOWED, {"schema_version"}, "config")
        version = mapping["schema_version"]
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {version!r} at config.schema_version")
        cfg_command = mapping.get("command", command)
        if cfg_command is None:
            raise ConfigError("missing key 'command' at config")
        if cfg_command not in COMMANDS:
            raise ConfigError(f"unknown command '{cfg_command}' at config.command")
        if command is not None and cfg_command != command:
            raise ConfigError(
                f"config.command '{cfg_command}' does not match CLI command '{command}'")
        problem = None
        if mapping.get("problem") is not None:
            problem = FPProblem.from_mapping(mapping["problem"])
        elif cfg_command.startswith("fp-"):
            raise ConfigError(f"missing key 'problem' at config (required by {cfg_command})")
        if cfg_command == "enlarge-check" and not mapping.get("instance_path"):
            raise ConfigError("missing key 'instance_path' at config (required by enlarge-check)")
        instance = InstanceSpec.from_mapping(mapping.get("instance", {}))
        tolerances = Tolerances.from_mapping(mapping.get("tolerances", {}))
        return cls(command=cfg_command,
                   seed=int(mapping.get("seed", 1)),
                   n_seeds=int(mapping.get("n_seeds", 1)),
                   instance=instance,
                   instance_path=mapping.get("instance_path"),
                   problem=problem,
                   tolerances=tolerances,
                   out_dir=str(mapping.get("out_dir", "out")),
                   jobs=int(mapping.get("jobs", 1)),
                   write_operators=bool(mapping.get("write_operators", False)))

    @classmethod
    def from_json_file(cls, path, command=None) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                mapping = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file {path} is not valid JSON: {exc}")
        return cls.from_mapping(mapping, command=command)

    def override(self, **kwargs) -> "RunConfig":
        return dataclasses.replace(self, **kwargs)

    def to_dict(self):
        """Full echo of the effective configuration, defaults included."""
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "seed": self.seed,
            "n_seeds": self.n_seeds,
            "instance": self.instance.to_dict(),
            "instance_path": self.instance_path,
            "problem": None if self.problem is None else self.problem.to_dict(),
            "tolerances": self.tolerances.to_dict(),
            "out_dir": self.out_dir,
            "jobs": self.jobs,
            "write_operators": self.write_operators,
        }


def parse_tolerance_overrides(pairs) -> dict:
    """Parse repeatable ``KEY=VAL`` command-line tolerance overrides."""
    out = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ConfigError(f"tolerance override '{pair}' is not KEY=VAL")
        key, _, val = pair.partition("=")
        try:
            out[key.strip()] = float(val)
        except ValueError:
            raise ConfigError(f"tolerance override '{pair}' has a non-numeric value")
    return out
