"""CSV report writing with a manifest of every emitted file."""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from . import __version__


@dataclass
class Table:
    header: Sequence[str]
    rows: list[Sequence] = field(default_factory=list)


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, bytes):
        return value.hex()
    return str(value)


def write_csv(path: Path, table: Table) -> int:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.header)
        for row in table.rows:
            w.writerow([fmt(v) for v in row])
    return len(table.rows)


def config_digest(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def count_lines(path: Path) -> int:
    with open(path, "rb") as fh:
        return sum(1 for _ in fh)


def emit_report(
    tables: dict[str, Table],
    out_dir,
    config: Optional[dict] = None,
    extra_files: Iterable[str] = (),
) -> list[Path]:
    """Write each table as ``<name>.csv`` under ``out_dir`` plus ``config.json``
    and ``manifest.json``.

    ``extra_files`` are files the caller already wrote into ``out_dir``; they
    are listed in the manifest with their record count (binary files get none).
    Output is byte-identical for identical inputs.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    config = dict(config or {})
    entries = []
    written = []
    for name in sorted(tables):
        path = out / f"{name}.csv"
        n = write_csv(path, tables[name])
        entries.append({"file": path.name, "rows": n})
        written.append(path)
    for name in sorted(extra_files):
        path = out / name
        if path.suffix == ".csv":
            rows = count_lines(path) - 1  # header excluded, as for tables
        elif path.suffix == ".jsonl":
            rows = count_lines(path)
        else:
            rows = None
        entries.append({"file": name, "rows": rows})
        written.append(path)
    cfg_path = out / "config.json"
    cfg_path.write_text(json.dumps(config, sort_keys=True, indent=2, default=str) + "\n", encoding="utf-8")
    entries.append({"file": cfg_path.name, "rows": None})
    manifest = {
        "tool": "tgscope",
        "version": __version__,
        "config_digest": config_digest(config),
        "files": sorted(entries, key=lambda e: e["file"]),
    }
    man_path = out / "manifest.json"
    man_path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return written + [cfg_path, man_path]
