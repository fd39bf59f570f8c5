"""Bundled scenario corpus."""

from __future__ import annotations

from importlib import resources
from pathlib import Path


def scenario_paths() -> list[Path]:
    root = resources.files(__name__)
    return sorted(Path(str(p)) for p in root.iterdir() if p.name.endswith(".scn"))
