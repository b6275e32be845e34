"""Evaluate every acceptance criterion and print one line each.

    python scripts/run_acceptance.py [--skip AC11]
"""

import argparse
import sys

from qdsim.harness.acceptance import run_all
from qdsim.harness.config import load_config


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config")
    ap.add_argument("--skip", nargs="*", default=[])
    args = ap.parse_args()
    results = run_all(load_config(args.config), log=print, skip=set(args.skip))
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
