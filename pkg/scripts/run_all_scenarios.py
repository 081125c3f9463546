"""Run every bundled scenario and print a one-line status per scenario.

Usage: python3 scripts/run_all_scenarios.py [--out results] [--threads 4] [--skip fig4d ...]
"""

import argparse
import contextlib
import io
import json
import time
from pathlib import Path

from hotnet import cli


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="results")
    p.add_argument("--threads", type=int, default=4)
    p.add_argument("--skip", nargs="*", default=[])
    args = p.parse_args()
    worst = 0
    for name in cli.CATALOG:
        if name in args.skip:
            continue
        out = Path(args.out) / name
        start = time.perf_counter()
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            code = cli.main(["run", name, "--out", str(out), "--threads", str(args.threads)])
        failed = []
        if (out / "summary.json").exists():
            failed = [c["name"] for c in json.loads((out / "summary.json").read_text())["checks"] if not c["passed"]]
        print(f"{name:8s} exit {code}  {time.perf_counter() - start:7.1f} s  " + (f"failed: {failed}" if failed else "ok"))
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    raise SystemExit(main())
