#!/usr/bin/env python3
"""Reproduce the genus 1..26 zero scan and the genus-35 spot check."""
import argparse
import sys

from trrkit.cli import main as cli_main
from trrkit.numerics import rational_str
from trrkit.trr import d_value


def run():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--g-max", type=int, default=26)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--out", default="scan.json")
    args = parser.parse_args()

    code = cli_main(
        [
            "scan",
            "--g-min", "1",
            "--g-max", str(args.g_max),
            "--jobs", str(args.jobs),
            "--out", args.out,
            "--pretty",
        ]
    )
    if code != 0:
        return code
    print(f"# wrote {args.out}")
    print(f"# spot check: D(35, 22, (11,1,1)) = {rational_str(d_value(35, 22, (11, 1, 1)))}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
