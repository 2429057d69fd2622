"""Shared fixtures: the checked-in sample bundles and mutation helpers."""

import hashlib
import json
import shutil
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"


@pytest.fixture()
def fig1_copy(tmp_path: Path) -> Path:
    """Writable copy of the fig1 sample bundle for corruption tests."""
    dst = tmp_path / "fig1"
    shutil.copytree(DATA / "fig1", dst)
    return dst


def reseal(bundle: Path, name: str) -> None:
    """Recompute one file's checksum after editing it in a copied bundle."""
    manifest = bundle / "manifest.json"
    data = json.loads(manifest.read_text())
    data["checksums"][name] = hashlib.sha256(
        (bundle / name).read_bytes()).hexdigest()
    manifest.write_text(json.dumps(data))
