"""File formats: dense target CSV, edge lists, schedule JSON and data CSVs.

Floats are written with ``repr`` so identical inputs give byte-identical
files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .compiler import Cycle, CycleSchedule, TargetModel, graph_target

SCHEDULE_SCHEMA = "hotnet.schedule/1"
SUMMARY_SCHEMA = "hotnet.summary/1"


class FormatError(ValueError):
    pass


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return repr(v) if math.isfinite(v) else ("nan" if math.isnan(v) else ("inf" if v > 0 else "-inf"))
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.write_text(csv_text(header, rows), encoding="utf-8")
    return path


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, [row for row in r]


def write_target_csv(target: TargetModel, path) -> Path:
    """Header row ``N,<n>`` followed by the dense matrix."""
    rows = [list(row) for row in target.w]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", target.n])
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")
    return Path(path)


def read_target_csv(path) -> TargetModel:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or len(rows[0]) != 2 or rows[0][0] != "N":
        raise FormatError("target CSV must start with a header row 'N,<size>'")
    n = int(rows[0][1])
    body = [r for r in rows[1:] if r]
    if len(body) != n or any(len(r) != n for r in body):
        raise FormatError(f"target CSV body is not {n}x{n}")
    return TargetModel(np.array(body, dtype=float), provenance=f"csv:{Path(path).name}")


def read_edge_list(path_or_text, n=None, d=None) -> TargetModel:
    """Lines 'u v [weight]'; blank lines and '#' comments are ignored."""
    if isinstance(path_or_text, Path):
        text = path_or_text.read_text(encoding="utf-8")
    elif "\n" not in path_or_text and Path(path_or_text).exists():
        text = Path(path_or_text).read_text(encoding="utf-8")
    else:
        text = path_or_text
    edges = []
    for k, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) not in (2, 3):
            raise FormatError(f"line {k}: expected 'u v [weight]'")
        u, v = int(parts[0]), int(parts[1])
        edges.append((u, v, float(parts[2])) if len(parts) == 3 else (u, v))
    if n is None:
        n = 1 + max((max(e[0], e[1]) for e in edges), default=-1)
    return graph_target(n, edges, d)


def write_edge_list(target: TargetModel, path) -> Path:
    A = target.off_diagonal()
    lines = [f"{i} {j} {_fmt(A[i, j])}" for i in range(target.n) for j in range(i + 1, target.n) if A[i, j] != 0]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return Path(path)


def schedule_to_dict(s: CycleSchedule) -> dict:
    return {
        "schema": SCHEDULE_SCHEMA,
        "omega1": s.omega1,
        "shift": s.shift,
        "n_qubits": s.n_qubits,
        "cycles": [
            {"amplitudes": [float(a) for a in c.amplitudes], "sign": int(c.sign), "p": int(c.p),
             "t_p": float(c.duration), "w_q": float(c.weight)}
            for c in s.cycles
        ],
    }


def schedule_from_dict(d: dict) -> CycleSchedule:
    if d.get("schema") != SCHEDULE_SCHEMA:
        raise FormatError(f"unsupported schedule schema {d.get('schema')!r}")
    cycles = tuple(
        Cycle(np.array(c["amplitudes"], dtype=float), int(c["sign"]), float(c["t_p"]), int(c["p"]),
              float(c.get("w_q", math.nan)))
        for c in d["cycles"]
    )
    return CycleSchedule(cycles, float(d["omega1"]), float(d.get("shift", 0.0)), int(d["n_qubits"]))


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def write_json(obj, path) -> Path:
    Path(path).write_text(json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return Path(path)
