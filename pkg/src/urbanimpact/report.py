"""Report writers: delimited tables, JSON mirrors, and the run manifest.

Floats are rounded to 12 significant digits in every report, comfortably
above test tolerances while keeping reruns byte-identical.  The manifest
records the configuration, seed, and a SHA-256 hash of every file written.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path


def fmt(value) -> str:
    """Render one cell: floats at 12 significant digits, None as empty."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if value != value:                       # NaN
            return "nan"
        return f"{value:.12g}"
    return str(value)


def round12(value):
    """Round floats (recursively through dicts/lists) to 12 significant digits."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        return value if value != value else float(f"{value:.12g}")
    if isinstance(value, dict):
        return {k: round12(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round12(v) for v in value]
    return value


def write_table(path, header: list[str], rows, fmt_json: bool = False) -> Path:
    """Write rows as CSV, or as a JSON array of row objects with the same
    field names when ``fmt_json`` is set."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt_json:
        payload = [
            {k: round12(v) for k, v in zip(header, row)}
            for row in rows
        ]
        path.write_text(json.dumps(payload, indent=2, sort_keys=False,
                                   allow_nan=True) + "\n")
        return path
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def table_path(out_dir, stem: str, fmt_json: bool) -> Path:
    return Path(out_dir) / f"{stem}.{'json' if fmt_json else 'csv'}"


def write_json(path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(round12(payload), indent=2, sort_keys=True) + "\n")
    return path


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(out_dir, config: dict, files: list[Path]) -> Path:
    """Record config and content hashes for reproducibility audits."""
    out_dir = Path(out_dir)
    manifest = {
        "config": round12(config),
        "files": {
            p.name: sha256_file(p) for p in sorted(files, key=lambda p: p.name)
        },
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
