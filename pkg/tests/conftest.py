from __future__ import annotations

import contextlib
import io

import pytest

from dmkf.cli import main
from dmkf.dsl import parse_plan
from dmkf.fixtures import fixture_path, fixture_text
from dmkf.registry import load_registry


@pytest.fixture(scope="session")
def wagga_plan():
    return parse_plan(fixture_text("wagga"))


@pytest.fixture(scope="session")
def gundagai_plan():
    return parse_plan(fixture_text("gundagai"))


@pytest.fixture(scope="session")
def edges_plan():
    return parse_plan(fixture_text("edges"))


@pytest.fixture(scope="session")
def extract_registry():
    return load_registry(fixture_text("registry-extract"))


@pytest.fixture(scope="session")
def full_registry():
    return load_registry(fixture_text("registry-full92"))


@pytest.fixture(scope="session")
def paths():
    return {name: str(fixture_path(name)) for name in (
        "wagga", "gundagai", "edges",
        "registry-extract", "registry-full92",
        "wagga-roles-map", "wagga-full-map", "gundagai-map", "edges-map",
    )}


def run_cli(*argv: str) -> tuple[int, str, str]:
    """Invoke the CLI in-process, capturing exit code, stdout and stderr."""
    out, err = io.StringIO(), io.StringIO()
    try:
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            code = main(list(argv))
    except SystemExit as exc:  # argparse usage failures
        code = exc.code if isinstance(exc.code, int) else 2
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def cli():
    return run_cli
