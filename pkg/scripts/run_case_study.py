"""Run the full suite on one case-study scale and write the report.

    python3 scripts/run_case_study.py --scale small --out results/small
"""
import argparse
import sys

from seqopt.cli import main as cli_main

SCALES = {"very_small": "very-small", "small": "small", "medium": "medium", "large": "large"}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scale", choices=sorted(SCALES), default="very_small")
    ap.add_argument("--out", default=None)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--jobs", type=int, default=None)
    args = ap.parse_args(argv)
    cmd = ["suite", "--config", f"case-study-{SCALES[args.scale]}.json"]
    for flag, value in (("--out", args.out), ("--seed", args.seed), ("--jobs", args.jobs)):
        if value is not None:
            cmd += [flag, str(value)]
    return cli_main(cmd)


if __name__ == "__main__":
    sys.exit(main())
