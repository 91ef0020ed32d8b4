"""Experiment configuration: flat ``key = value`` files overridden by CLI flags."""

from dataclasses import dataclass, fields, replace
import math

from ..basis import get_basis
from ..errors import ConfigError

GENERATORS = ("uniform", "jittered", "random", "file")
FUNCTIONS = ("sobolev", "analytic", "hat")


@dataclass(frozen=True)
class ExperimentConfig:
    basis: str = "fourier"
    generator: str = "uniform"
    node_file: str = None
    oversampling: float = 1.0
    jitter: float = 0.25
    seed: int = 0
    degrees: tuple = (8, 16, 32, 64, 128, 256)
    function: str = "analytic"
    a: float = 1.25
    fsigma: float = 1.2
    eps: float = 0.05
    k_max: int = None
    sigma: float = 1.2
    rate: str = "auto"
    floor: float = 1e-8
    noise_floor: float = 1e-13
    tol: float = 1e-10
    grid_size: int = 512
    sup_grid: int = 4096
    strict: bool = False
    output: str = None

    def validate(self):
        try:
            get_basis(self.basis)
        except ValueError as err:
            raise ConfigError(str(err)) from None
        if self.generator not in GENERATORS:
            raise ConfigError(f"generator must be one of {GENERATORS} or a node file path")
        if self.generator == "file" and not self.node_file:
            raise ConfigError("generator=file needs node_file")
        if self.oversampling < 1:
            raise ConfigError("oversampling must be >= 1")
        if not 0 <= self.jitter < 0.5:
            raise ConfigError("jitter must lie in [0, 1/2)")
        if not self.degrees:
            raise ConfigError("degree schedule is empty")
        if any(n < 0 for n in self.degrees) or any(b <= a for a, b in zip(self.degrees, self.degrees[1:])):
            raise ConfigError("degree schedule must be non-negative and strictly increasing")
        if self.function not in FUNCTIONS:
            raise ConfigError(f"function must be one of {FUNCTIONS}")
        if self.rate not in ("auto", "algebraic", "geometric"):
            raise ConfigError("rate must be auto, algebraic or geometric")
        if self.a <= 1:
            raise ConfigError("analytic parameter a must exceed 1")
        if self.sigma <= 0 or self.grid_size < 2 or self.sup_grid < 2:
            raise ConfigError("sigma and grid sizes must be positive")
        crit = get_basis(self.basis).sigma_crit
        if self.sigma <= crit:
            raise ConfigError(f"sigma={self.sigma} must exceed sigma_crit={crit} of {self.basis}")
        limit = {"sobolev": self.fsigma + self.eps, "hat": 1.5}.get(self.function, math.inf)
        if self.sigma >= limit:
            raise ConfigError(f"{self.function} test function is not in H^{self.sigma} (needs sigma < {limit})")
        if not (self.floor > 0 and self.noise_floor > 0 and self.tol >= 0):
            raise ConfigError("floors must be positive")
        return self

    @property
    def rate_kind(self):
        if self.rate != "auto":
            return self.rate
        return "geometric" if self.function == "analytic" else "algebraic"


def parse_degrees(text):
    """``8,16,32`` | ``dyadic:8:256`` | ``range:4:48:4``."""
    if isinstance(text, (tuple, list)):
        return tuple(int(n) for n in text)
    text = str(text).strip()
    try:
        if text.startswith("dyadic:"):
            lo, hi = (int(v) for v in text.split(":")[1:])
            if lo < 1:
                raise ConfigError("dyadic schedule starts at >= 1")
            out, n = [], lo
            while n <= hi:
                out.append(n)
                n *= 2
            return tuple(out)
        if text.startswith("range:"):
            parts = [int(v) for v in text.split(":")[1:]]
            lo, hi = parts[0], parts[1]
            step = parts[2] if len(parts) > 2 else 1
            return tuple(range(lo, hi + 1, step))
        return tuple(int(v) for v in text.replace(" ", "").split(",") if v)
    except ValueError:
        raise ConfigError(f"cannot parse degree schedule {text!r}") from None


def _coerce(name, value):
    kinds = {f.name: f.type for f in fields(ExperimentConfig)}
    if name not in kinds:
        raise ConfigError(f"unknown config key {name!r}")
    if value is None:
        return None
    if name == "degrees":
        return parse_degrees(value)
    kind = kinds[name]
    try:
        if kind is bool:
            if isinstance(value, bool):
                return value
            return str(value).strip().lower() in ("1", "true", "yes", "on")
        if kind is int:
            return int(value)
        if kind is float:
            v = float(value)
            if math.isnan(v):
                raise ValueError
            return v
    except ValueError:
        raise ConfigError(f"bad value for {name}: {value!r}") from None
    return str(value).strip()


def read_config_file(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def build_config(file_values=None, overrides=None):
    """Defaults, then config-file values, then explicit overrides."""
    cfg = ExperimentConfig()
    merged = dict(file_values or {})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    gen = merged.get("generator")
    if gen is not None and gen not in GENERATORS:
        # a bare path selects the file generator
        merged["node_file"] = gen
        merged["generator"] = "file"
    cfg = replace(cfg, **{k: _coerce(k, v) for k, v in merged.items()})
    return cfg.validate()
