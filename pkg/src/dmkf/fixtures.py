"""Paths of the example files bundled with the package."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .errors import UsageError

FIXTURES = {
    "wagga": "wagga.dmp",
    "gundagai": "gundagai.dmp",
    "edges": "edges.dmp",
    "registry-extract": "registry_extract.dmm",
    "registry-full92": "registry_full92.dmm",
    "wagga-roles-map": "wagga_roles.map",
    "wagga-full-map": "wagga_full.map",
    "gundagai-map": "gundagai.map",
    "edges-map": "edges.map",
}


def fixture_path(name: str) -> Path:
    if name not in FIXTURES:
        raise UsageError(f"unknown fixture {name!r} (known: {', '.join(sorted(FIXTURES))})")
    return Path(str(resources.files("dmkf.data") / FIXTURES[name]))


def fixture_text(name: str) -> str:
    return fixture_path(name).read_text(encoding="utf-8")
