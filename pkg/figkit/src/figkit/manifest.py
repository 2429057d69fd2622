"""Loading and integrity checking of simulation output bundles.

A bundle is a directory holding one ``manifest.json`` plus the delimited
files it lists.  Every listed file is verified against its SHA-256 checksum
before any of it is interpreted; plotting code therefore never sees silently
truncated or edited data.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["ManifestError", "Bundle", "load_manifest"]


class ManifestError(RuntimeError):
    """A bundle is missing, inconsistent, or fails verification."""


@dataclass(frozen=True)
class Bundle:
    """A verified output bundle.

    ``data`` is the parsed manifest; column access goes through
    :meth:`table`, which re-reads the (already verified) CSV on demand.
    """

    root: Path
    data: dict

    @property
    def label(self) -> str:
        return self.data["label"]

    @property
    def j_max(self) -> float:
        return float(self.data["j_max_rad_s"])

    @property
    def points(self) -> list[dict]:
        return self.data["points"]

    @property
    def config(self) -> dict:
        return self.data["config"]

    def target_sites(self) -> list[int]:
        return [int(s) for s in self.config["network"]["target_sites"]]

    def point(self, label: str) -> dict:
        for entry in self.points:
            if entry["label"] == label:
                return entry
        raise ManifestError(f"bundle {self.label!r} has no point {label!r}")

    def path(self, name: str) -> Path:
        return self.root / name

    def table(self, name: str) -> dict[str, np.ndarray]:
        """Columns of one listed CSV as float arrays (the site column stays
        integer-valued but is returned as float for uniformity)."""
        if name not in self.data["checksums"]:
            raise ManifestError(f"{name} is not listed in the manifest")
        with self.path(name).open(newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise ManifestError(f"{name} is empty")
        header, body = rows[0], rows[1:]
        if not body:
            raise ManifestError(f"{name} contains no data rows")
        try:
            values = np.array([[float(cell) for cell in row] for row in body])
        except ValueError as exc:
            raise ManifestError(f"{name} has malformed rows: {exc}") from exc
        if values.ndim != 2 or values.shape[1] != len(header):
            raise ManifestError(f"{name} has ragged rows")
        return {col: values[:, k] for k, col in enumerate(header)}

    def site_series(self, name: str, site: int,
                    value_col: str) -> tuple[np.ndarray, np.ndarray]:
        """(time, value) for one site of a long-format populations table."""
        t = self.table(name)
        mask = t["site"] == site
        if not mask.any():
            raise ManifestError(f"{name} has no rows for site {site}")
        return t["time_s"][mask], t[value_col][mask]


def load_manifest(path) -> Bundle:
    """Read ``manifest.json`` (or a directory containing it), verify every
    checksum, and return the bundle."""
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    if not path.exists():
        raise ManifestError(f"manifest not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path} is not valid JSON: {exc}") from exc
    for key in ("label", "config", "points", "checksums", "j_max_rad_s"):
        if key not in data:
            raise ManifestError(f"{path} lacks required key {key!r}")
    root = path.parent
    for name, expected in data["checksums"].items():
        target = root / name
        if not target.exists():
            raise ManifestError(f"listed file missing: {name}")
        actual = hashlib.sha256(target.read_bytes()).hexdigest()
        if actual != expected:
            raise ManifestError(
                f"checksum mismatch for {name}: manifest says {expected[:12]}"
                f"..., file hashes to {actual[:12]}...")
    return Bundle(root=root, data=data)
