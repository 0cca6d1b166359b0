"""CSV/JSON/SVG emission with byte-stable number formatting."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import platform
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if v == 0.0:
            return "0"
        return format(v, ".17g")
    return str(value)


@dataclass
class Table:
    name: str
    columns: Sequence[str]
    rows: list = field(default_factory=list)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"{self.name}: row has {len(values)} values for {len(self.columns)} columns")
        self.rows.append(values)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([fmt(v) for v in row])
        return buf.getvalue()

    def column(self, name):
        i = list(self.columns).index(name)
        return [r[i] for r in self.rows]


class OutputDir:
    """Writes files under ``root`` and records their checksums."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.checksums: dict[str, str] = {}

    def write_bytes(self, name: str, data: bytes) -> Path:
        path = self.root / name
        path.write_bytes(data)
        self.checksums[name] = hashlib.sha256(data).hexdigest()
        return path

    def write_table(self, table: Table) -> Path:
        return self.write_bytes(f"{table.name}.csv", table.to_csv().encode())

    def write_manifest(self, cfg, seed: int, timings: dict, extra: dict | None = None) -> Path:
        from .. import __version__
        from ..conic_solver import BACKEND

        manifest = {
            "config_hash": cfg.digest(),
            "config_name": cfg.name,
            "seed": seed,
            "tool_version": __version__,
            "kernel_backend": BACKEND,
            "python": platform.python_version(),
            "outputs": dict(sorted(self.checksums.items())),
            "timings_s": {k: round(v, 6) for k, v in timings.items()},
        }
        if extra:
            manifest.update(extra)
        path = self.root / "manifest.json"
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return path


def render_svg(path: Path, draw) -> None:
    """Render with matplotlib's SVG backend; ``draw(fig)`` populates the figure."""
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    fig = plt.figure(figsize=(7, 5))
    try:
        draw(fig)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
