"""Command line entry point: ``hotnet run|list|validate``.

Exit codes: 0 success, 2 invalid scenario, 3 numerical failure, 4 a
built-in check failed (or, with --strict, a warning was raised).
"""

from __future__ import annotations

import argparse
import json
import shutil
import sys
import tempfile
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

import jsonschema

from . import __version__
from . import io as hio
from .scenarios import RUNNERS, Context

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK, EXIT_SCHEMA, EXIT_NUMERIC, EXIT_CHECK = 0, 2, 3, 4

CATALOG = {
    "fig1b": "hot phase gate: fidelity and concurrence at kBT = 0, 1, 2 omega1 with oracle cross-check",
    "fig1c": "QAOA Max-Cut on the 6-vertex 4-regular graph, ideal and noisy energies versus depth",
    "fig2a": "hot phase gate fidelity, entropy and purity versus time for 0 <= kBT <= 2 omega1",
    "fig2b": "mode-resolved photon occupation during the gate at kBT = omega1",
    "fig2c": "real-space photon occupation along the line at kBT = omega1",
    "fig2d": "timing error around stroboscopic times and its quadratic coefficient",
    "fig3a": "compilation of 1/|i-j| interactions with periodic boundaries (N = 25)",
    "fig3b": "compilation of 5x5 nearest-neighbour interactions",
    "fig4b": "optimized QAOA angles and optimizer history for N = 6, M = 5",
    "fig4c": "dephasing error scaling of noisy QAOA against the predicted abscissa",
    "fig4d": "rethermalization error scaling of noisy QAOA against the predicted abscissa",
    "figS1": "photon number, cutoff dependence and nonlinear-dispersion gate errors",
    "figS2": "spin-glass compilation and convergence of the truncated schedules",
    "figS4bc": "mode structure of the inductively terminated line and its asymptotes",
    "budget": "cooperativity optimum and worked error-budget numbers",
}


class ScenarioError(ValueError):
    pass


def schema() -> dict:
    return json.loads(resources.files("hotnet").joinpath("data/scenario.schema.json").read_text(encoding="utf-8"))


def bundled_path(name: str):
    return resources.files("hotnet").joinpath(f"data/scenarios/{name}.toml")


def resolve(scenario: str) -> tuple[str, str, Path]:
    """(name, toml text, base directory) for a path or a bundled scenario name."""
    p = Path(scenario)
    if p.suffix == ".toml" or p.exists():
        if not p.exists():
            raise ScenarioError(f"scenario file {p} not found")
        return p.stem, p.read_text(encoding="utf-8"), p.resolve().parent
    if scenario in CATALOG:
        return scenario, bundled_path(scenario).read_text(encoding="utf-8"), Path.cwd()
    raise ScenarioError(f"unknown scenario {scenario!r}; see 'hotnet list'")


def load(text: str) -> dict:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ScenarioError(f"TOML parse error: {e}") from e
    errors = sorted(jsonschema.Draft202012Validator(schema()).iter_errors(data), key=lambda e: list(e.path))
    if errors:
        msgs = [f"{'/'.join(map(str, e.path)) or '<root>'}: {e.message}" for e in errors]
        raise ScenarioError("schema violation:\n  " + "\n  ".join(msgs))
    return data


def execute(data: dict, name: str, out_dir: Path, seed=None, threads=1, strict=False, base_dir=".") -> int:
    """Run a validated scenario and publish its outputs to ``out_dir``."""
    seed = data.get("seed", 0) if seed is None else seed
    kind = data["kind"]
    start = time.perf_counter()
    staging = Path(tempfile.mkdtemp(prefix=f".{name}-", dir=out_dir.parent if out_dir.parent.exists() else None))
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            pool = ThreadPoolExecutor(threads) if threads > 1 else None
            try:
                outcome = RUNNERS[kind](data[kind], Context(seed, pool, str(base_dir)))
            finally:
                if pool is not None:
                    pool.shutdown()
        artifacts = []
        for t in outcome.tables:
            hio.write_csv(staging / f"{t.name}.csv", t.header, t.rows)
            artifacts.append(f"{t.name}.csv")
        for fname, content in outcome.extra_files.items():
            if isinstance(content, str):
                (staging / fname).write_text(content, encoding="utf-8")
            else:
                hio.write_json(content, staging / fname)
            artifacts.append(fname)
        warn_msgs = sorted({f"{w.category.__name__}: {w.message}" for w in caught})
        failed = [c.name for c in outcome.checks if not c.passed]
        summary = {
            "schema": hio.SUMMARY_SCHEMA,
            "version": __version__,
            "scenario": name,
            "kind": kind,
            "seed": seed,
            "inputs": data,
            "derived": outcome.derived,
            "checks": [c.__dict__ for c in outcome.checks],
            "all_checks_passed": not failed,
            "warnings": warn_msgs,
            "artifacts": sorted(artifacts),
            "elapsed_seconds": round(time.perf_counter() - start, 3),
        }
        hio.write_json(summary, staging / "summary.json")
        out_dir.mkdir(parents=True, exist_ok=True)
        for f in staging.iterdir():
            shutil.move(str(f), out_dir / f.name)
    except Exception:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    shutil.rmtree(staging, ignore_errors=True)
    for c in outcome.checks:
        print(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.value:.6g} ({c.threshold})")
    for w in warn_msgs:
        print(f"[WARN] {w}")
    if failed or (strict and warn_msgs):
        return EXIT_CHECK
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        name, text, base = resolve(args.scenario)
        data = load(text)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    out = Path(args.out) if args.out else Path("results") / name
    try:
        return execute(data, name, out, args.seed, args.threads, args.strict, base)
    except (ArithmeticError, RuntimeError, ValueError, FloatingPointError) as e:
        print(f"numerical failure: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC


def cmd_list(args) -> int:
    for name, desc in CATALOG.items():
        print(f"{name:8s}  {desc}")
    return EXIT_OK


def cmd_validate(args) -> int:
    status = EXIT_OK
    for sc in args.scenarios or list(CATALOG):
        try:
            _, text, _ = resolve(sc)
            load(text)
            print(f"{sc}: ok")
        except ScenarioError as e:
            print(f"{sc}: {e}", file=sys.stderr)
            status = EXIT_SCHEMA
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hotnet", description="Hot quantum network scenarios")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario file or bundled scenario name")
    r.add_argument("scenario")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--threads", type=int, default=1)
    r.add_argument("--out", default=None, help="output directory (default results/<name>)")
    r.add_argument("--strict", action="store_true", help="treat warnings as check failures")
    r.set_defaults(func=cmd_run)
    ls = sub.add_parser("list", help="list bundled scenarios")
    ls.set_defaults(func=cmd_list)
    v = sub.add_parser("validate", help="validate scenario files (all bundled ones by default)")
    v.add_argument("scenarios", nargs="*")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
