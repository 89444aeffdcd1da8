"""Deterministic table writers and run manifests."""
from __future__ import annotations

import datetime as _dt
import hashlib
import json
import math
import os
from pathlib import Path

FLOAT_FORMAT = ".15g"


def _cell(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, FLOAT_FORMAT)
    try:
        # numpy scalars
        if float(value) == int(value) and "int" in type(value).__name__:
            return str(int(value))
        return _cell(float(value))
    except (TypeError, ValueError):
        return str(value)


def _json_value(value):
    if isinstance(value, (bool, int, str)) or value is None:
        return value
    try:
        f = float(value)
    except (TypeError, ValueError):
        return str(value)
    if "int" in type(value).__name__:
        return int(value)
    return None if math.isnan(f) else float(format(f, FLOAT_FORMAT))


def write_table(out_dir, stem: str, columns, rows, fmt: str = "csv") -> Path:
    """Write ``rows`` under ``columns`` as ``stem.csv`` or ``stem.json``.

    CSV uses a header row, '.' decimals and '\\n' line endings; floats are
    printed with a fixed format so repeated runs are byte-identical.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        path = out_dir / f"{stem}.csv"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(columns) + "\n")
            for row in rows:
                fh.write(",".join(_cell(v) for v in row) + "\n")
    elif fmt == "json":
        path = out_dir / f"{stem}.json"
        data = {"columns": list(columns), "rows": [[_json_value(v) for v in row] for row in rows]}
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(data, fh, separators=(",", ":"))
            fh.write("\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return path


def read_csv(path):
    """Header and rows (as strings) of a CSV written by :func:`write_table`."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return lines[0].split(","), [line.split(",") for line in lines[1:]]


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def version() -> str:
    from importlib.metadata import PackageNotFoundError, version as _v
    try:
        return _v("artifact")
    except PackageNotFoundError:
        return "0+unknown"


class RunManifest:
    """Everything needed to repeat a CLI run: resolved arguments, the truncation
    and tolerances used by each computation, tool version and config digest."""

    def __init__(self, command: str, args: dict, config_digest: str | None = None):
        self.command = command
        self.args = args
        self.config_digest = config_digest
        self.computations: list[dict] = []
        self.outputs: list[str] = []

    def record(self, label: str, **fields):
        entry = {"label": label}
        entry.update({k: _plain(v) for k, v in fields.items()})
        self.computations.append(entry)

    def add_output(self, path):
        self.outputs.append(Path(path).name)

    def as_dict(self) -> dict:
        return {
            "tool": "qrabi",
            "version": version(),
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            "command": self.command,
            "args": self.args,
            "config_digest": self.config_digest,
            "nmax_cap_env": os.environ.get("RABI_NMAX_CAP"),
            "computations": self.computations,
            "outputs": {name: None for name in self.outputs},
        }

    def write(self, out_dir) -> Path:
        data = self.as_dict()
        out_dir = Path(out_dir)
        for name in self.outputs:
            data["outputs"][name] = file_digest(out_dir / name)
        path = out_dir / "manifest.json"
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return _json_value(value)
