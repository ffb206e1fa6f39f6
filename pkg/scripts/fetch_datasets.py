#!/usr/bin/env python3
"""Download the desk-scale benchmark datasets into the data/ directory.

The acceptance suite's accuracy and convergence criteria run on the UCI
Optdigits and Pendigits train/test splits.  This script fetches them from
the UCI archive (network required); afterwards `pytest tests/test_acceptance.py`
runs every criterion.  Use --dest or AOSO_DATA_DIR to place the files
somewhere else.
"""

import argparse
import os
import sys
import urllib.request
from pathlib import Path

UCI = "https://archive.ics.uci.edu/ml/machine-learning-databases"

FILES = {
    "optdigits.tra": ("%s/optdigits/optdigits.tra" % UCI, 3823),
    "optdigits.tes": ("%s/optdigits/optdigits.tes" % UCI, 1797),
    "pendigits.tra": ("%s/pendigits/pendigits.tra" % UCI, 7494),
    "pendigits.tes": ("%s/pendigits/pendigits.tes" % UCI, 3498),
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    default_dest = os.environ.get(
        "AOSO_DATA_DIR", str(Path(__file__).resolve().parent.parent / "data")
    )
    parser.add_argument("--dest", default=default_dest)
    args = parser.parse_args()
    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)
    failures = 0
    for name, (url, expected_lines) in FILES.items():
        target = dest / name
        if target.exists():
            print("%-15s already present" % name)
            continue
        try:
            print("%-15s <- %s" % (name, url))
            with urllib.request.urlopen(url, timeout=60) as resp:
                payload = resp.read()
        except Exception as exc:
            print("  FAILED: %s" % exc, file=sys.stderr)
            failures += 1
            continue
        lines = payload.decode("utf-8").strip().splitlines()
        if len(lines) != expected_lines:
            print(
                "  FAILED: got %d lines, expected %d" % (len(lines), expected_lines),
                file=sys.stderr,
            )
            failures += 1
            continue
        target.write_bytes(payload)
        print("  ok (%d lines)" % len(lines))
    if failures:
        print(
            "\n%d file(s) could not be fetched; the desk-scale acceptance "
            "criteria will be skipped until they exist under %s" % (failures, dest),
            file=sys.stderr,
        )
        return 1
    print("\nall datasets ready under %s" % dest)
    return 0


if __name__ == "__main__":
    sys.exit(main())
