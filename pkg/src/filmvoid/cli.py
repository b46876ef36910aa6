"""Command-line front end: parse a config, dispatch a subcommand, report."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, parse_config
from .runner import SUBCOMMANDS, run


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="filmvoid",
        description="Energies and phase-field minimization for strained films and voids",
    )
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", required=True, help="bracketed-section key=value file")
    ap.add_argument("--out", default="out", help="output directory")
    ap.add_argument("--seed", type=int, default=None, help="override the config seed")
    ap.add_argument("--quiet", action="store_true")
    return ap


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        text = Path(ns.config).read_text()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    report = run(cfg, ns.subcommand, ns.out, seed=ns.seed)
    if not ns.quiet:
        print(report.to_text(), end="")
    elif report.status != 0:
        for c in report.checks:
            if c.startswith("FAIL"):
                print(c, file=sys.stderr)
    return report.status


if __name__ == "__main__":
    sys.exit(main())
