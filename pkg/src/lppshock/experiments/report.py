"""Canonical report serialization.

``report.json`` must be byte-identical across reruns of the same config and
seed, so floats are rendered with 17 significant digits through a custom
writer (python's json module would be deterministic too, but the explicit
format pins the contract) and keys are emitted sorted.  Wall-clock numbers
are deterministic in no world, so timings go to a sidecar ``timings.json``
that is excluded from the reproducibility contract.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, Sequence


def format_number(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int,)):
        return str(x)
    v = float(x)
    if math.isnan(v):
        return '"nan"'
    if math.isinf(v):
        return '"inf"' if v > 0 else '"-inf"'
    return format(v, ".17g")


def canonical_json(obj, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = []
        for k in sorted(obj):
            parts.append(f'{inner}"{k}": {canonical_json(obj[k], indent + 1)}')
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if len(obj) == 0:
            return "[]"
        parts = [f"{inner}{canonical_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(parts) + "\n" + pad + "]"
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    return format_number(obj)


def write_report(data: dict, out_dir: str | Path, timings: dict | None = None) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "report.json"
    path.write_text(canonical_json(data) + "\n", encoding="utf-8")
    if timings is not None:
        (out / "timings.json").write_text(canonical_json(timings) + "\n", encoding="utf-8")
    return path


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_number(v) if not isinstance(v, str) else v for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
