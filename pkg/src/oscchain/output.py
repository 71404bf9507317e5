"""Deterministic CSV and JSON emission with provenance headers."""
from __future__ import annotations

import json
import math
from pathlib import Path


def fmt(v) -> str:
    if isinstance(v, (int,)) and not isinstance(v, bool):
        return str(v)
    v = float(v)
    if math.isnan(v):
        return "nan"
    return f"{v:.17g}"


class Emitter:
    """Writes files under ``outdir``; every file records config hash and seeds."""

    def __init__(self, outdir, config_hash: str, seeds):
        self.outdir = Path(outdir)
        self.outdir.mkdir(parents=True, exist_ok=True)
        self.config_hash = config_hash
        self.seeds = list(seeds)
        self.written = []

    def _seed_text(self):
        return " ".join(str(s) for s in self.seeds)

    def csv(self, name, columns, rows):
        path = self.outdir / name
        with open(path, "w", newline="\n") as fh:
            fh.write(f"# config_hash={self.config_hash}\n")
            fh.write(f"# seeds={self._seed_text()}\n")
            fh.write(",".join(columns) + "\n")
            for row in rows:
                fh.write(",".join(fmt(v) for v in row) + "\n")
        self.written.append(path)
        return path

    def json(self, name, payload):
        path = self.outdir / name
        body = {"config_hash": self.config_hash, "seeds": self.seeds, **payload}
        path.write_text(json.dumps(body, indent=2, sort_keys=True, allow_nan=True) + "\n")
        self.written.append(path)
        return path
