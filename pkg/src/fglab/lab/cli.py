"""``fglab`` command line.

Exit codes: 0 all checks passed, 1 a check failed, 2 usage or configuration
error, 3 the precision cannot decide the experiment.
"""
from __future__ import annotations

import argparse
import sys

from ..lift import IntegralityError
from . import experiments as X
from .config import ConfigError, ExperimentConfig, PrecisionError, parse_policy

VERBS = {
    "trichotomy": X.cmd_trichotomy,
    "height": X.cmd_height,
    "centralizer": X.cmd_centralizer,
    "normalizer": X.cmd_normalizer,
    "ramification": X.cmd_ramification,
    "bench": X.cmd_bench,
    "verify-law": X.cmd_verify_law,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="fglab", description="formal group law experiments")
    ap.add_argument("verb", choices=["construct", *VERBS])
    ap.add_argument("law_file", nargs="?", help="law file (verify-law only)")
    ap.add_argument("--p", type=int, default=2)
    ap.add_argument("--h", type=int, default=2)
    ap.add_argument("--field-deg", type=int, default=None)
    ap.add_argument("--prec", type=int, default=None, help="series precision N")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--format", choices=["json", "csv"], default="json")
    ap.add_argument("--out", default=None, help="output path (default stdout)")
    ap.add_argument("--policy", default=None, help="overrides as key=value,key=value")
    return ap


def config_from_args(argv=None) -> ExperimentConfig:
    a = build_parser().parse_args(argv)
    if a.law_file and a.verb != "verify-law":
        raise ConfigError(f"{a.verb} takes no positional argument")
    return ExperimentConfig(
        experiment=a.verb, p=a.p, h=a.h, field_deg=a.field_deg, N=a.prec, seed=a.seed,
        fmt=a.format, out=a.out, policy=parse_policy(a.policy), law_file=a.law_file,
    ).validate()


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(cfg: ExperimentConfig) -> int:
    if cfg.experiment == "construct":
        law_text, rep = X.cmd_construct(cfg)
        _emit(law_text, cfg.out)
        sys.stderr.write(rep.render(cfg.fmt))  # stdout carries the law file
        return rep.exit_code()
    rep = VERBS[cfg.experiment](cfg)
    _emit(rep.render(cfg.fmt), cfg.out)
    return rep.exit_code()


def main(argv=None) -> int:
    try:
        cfg = config_from_args(argv)
    except ConfigError as exc:
        print(f"fglab: {exc}", file=sys.stderr)
        return 2
    except PrecisionError as exc:
        print(f"fglab: {exc}", file=sys.stderr)
        return 3
    try:
        return run(cfg)
    except (OSError, ValueError) as exc:
        if isinstance(exc, IntegralityError):
            print(f"fglab: integrality failure: {exc}", file=sys.stderr)
            return 1
        print(f"fglab: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
