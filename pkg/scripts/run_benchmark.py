#!/usr/bin/env python3
"""Run the asymmetric benchmark sweep and drop the CSV under results/.

Thin wrapper over the CLI so the exact benchmark invocation is recorded in
one place; pass extra arguments through, e.g. --parallel 4 or --trace.
"""
import pathlib
import sys

from sagin_sim.cli import main

ROOT = pathlib.Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    argv = [
        "run",
        "--config", str(ROOT / "configs" / "benchmark.json"),
        "--out", str(ROOT / "results" / "benchmark.csv"),
    ] + sys.argv[1:]
    sys.exit(main(argv))
