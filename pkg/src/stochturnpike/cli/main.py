"""Command-line entry point: ``stochturnpike <command> [options]``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..pce import GermMismatchError
from ..stoch_ocp import SolverError
from .commands import COMMANDS
from .config import PRESETS, ConfigError, load_config, load_preset
from .figures import FIGURES, cmd_reproduce

log = logging.getLogger("stochturnpike")

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 1, 2

_FORMATS = {"csv": ("csv",), "svg": ("csv", "svg"), "both": ("csv", "svg")}


def _common(p: argparse.ArgumentParser, config_required: bool) -> None:
    src = p.add_mutually_exclusive_group(required=config_required)
    src.add_argument("--config", type=Path, help="YAML experiment configuration")
    src.add_argument("--preset", choices=PRESETS, help="built-in experiment configuration")
    p.add_argument("--seed", type=int, default=None, help="RNG seed (default: analysis.seed)")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--samples", type=int, default=None, help="number of Monte-Carlo samples")
    p.add_argument("--format", choices=sorted(_FORMATS), default="csv",
                   help="csv only, or csv plus an SVG rendering")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stochturnpike",
        description="Stochastic optimal control via polynomial chaos, with turnpike diagnostics.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "solve": "solve the OCP on the configured horizon",
        "sweep": "solve over a list of horizons and compute turnpike metrics",
        "steady": "solve the stochastic steady-state problem",
        "fixed-noise": "closed-loop realizations under one fixed disturbance sequence",
    }
    for name, text in helps.items():
        _common(sub.add_parser(name, help=text), config_required=True)
    rp = sub.add_parser("reproduce", help="regenerate the data behind one figure")
    rp.add_argument("figure", choices=list(FIGURES))
    _common(rp, config_required=False)
    return parser


def _load(args):
    if args.config is not None:
        return load_config(args.config)
    if args.preset is not None:
        return load_preset(args.preset)
    return None


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    formats = _FORMATS[args.format]
    try:
        cfg = _load(args)
        if args.samples is not None and args.samples < 1:
            raise ConfigError("--samples: must be a positive integer")
        if args.command == "reproduce":
            seed = args.seed if args.seed is not None else (cfg.analysis.seed if cfg else 0)
            code = cmd_reproduce(args.figure, cfg, args.out, seed, args.samples, formats)
        else:
            seed = args.seed if args.seed is not None else cfg.analysis.seed
            samples = args.samples if args.samples is not None else cfg.analysis.samples
            code = COMMANDS[args.command](cfg, args.out, seed, samples, formats)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, GermMismatchError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    if code:
        print("one or more solves failed; see metrics.csv", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
