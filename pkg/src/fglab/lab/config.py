"""Experiment configuration and its validation."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

from ..gf import is_prime

EXPERIMENTS = ("construct", "verify-law", "trichotomy", "height", "centralizer",
               "normalizer", "ramification", "bench")


class ConfigError(ValueError):
    """Bad usage or inconsistent parameters (exit code 2)."""


class PrecisionError(ValueError):
    """The requested precision cannot decide the experiment (exit code 3)."""


def default_precision(experiment: str, p: int, h: int) -> int:
    """Smallest window the experiment needs, plus slack."""
    if experiment == "construct":
        return min(p ** (2 * h), 256)
    if experiment == "trichotomy":
        return p ** (3 * h) + 16
    if experiment == "height":
        return p ** (4 * h) + 16
    if experiment == "centralizer":
        return 4 * p ** (2 * h)
    if experiment == "normalizer":
        return 2 * p ** (2 * h)
    if experiment == "ramification":
        return (2**5 if p == 2 else p**4) + 16
    return 64


def required_precision(experiment: str, p: int, h: int) -> int | None:
    if experiment == "trichotomy":
        return p ** (2 * h)
    if experiment == "ramification":
        return p ** (h + 1)
    return None


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    p: int = 2
    h: int = 2
    field_deg: int | None = None
    N: int | None = None
    seed: int = 0
    fmt: str = "json"
    out: str | None = None
    policy: dict = field(default_factory=dict)
    law_file: str | None = None

    @property
    def n(self) -> int:
        return self.field_deg if self.field_deg is not None else self.h

    @property
    def precision(self) -> int:
        return self.N if self.N is not None else default_precision(self.experiment, self.p, self.h)

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if not is_prime(self.p):
            raise ConfigError(f"p={self.p} is not prime")
        if self.h < 1:
            raise ConfigError("h must be at least 1")
        if self.n < self.h:
            raise ConfigError(f"working field degree {self.n} must be at least h={self.h}")
        if self.fmt not in ("json", "csv"):
            raise ConfigError("format must be json or csv")
        if self.precision < 1:
            raise ConfigError("precision must be at least 1")
        if self.experiment == "ramification" and self.h != 1:
            raise ConfigError("ramification runs on height-1 laws")
        if self.experiment == "verify-law" and not self.law_file:
            raise ConfigError("verify-law needs a law file")
        need = required_precision(self.experiment, self.p, self.h)
        if need is not None and self.precision < need:
            raise PrecisionError(
                f"{self.experiment} needs N >= {need} for p={self.p}, h={self.h}: "
                f"the first iterate of [1+p^2] already has w = p^(2h)")
        return self

    def echo(self) -> dict:
        d = asdict(self)
        d["N"] = self.precision
        d["field_deg"] = self.n
        return d


def parse_policy(text: str | None) -> dict:
    """``key=value,key=value`` with integer values where they parse."""
    out: dict = {}
    if not text:
        return out
    for part in text.split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise ConfigError(f"policy entry {part!r} is not key=value")
        k, v = part.split("=", 1)
        k, v = k.strip(), v.strip()
        try:
            out[k] = int(v)
        except ValueError:
            out[k] = v
    return out
