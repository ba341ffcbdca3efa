"""Tests for CLI version handling."""

from __future__ import annotations

import importlib
from importlib import metadata as importlib_metadata
from pathlib import Path
import sys
from types import ModuleType
from typing import Callable

import pytest


PROJECT_ROOT = Path(__file__).resolve().parents[1]
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))


def _reload_cli(monkeypatch: pytest.MonkeyPatch, stub: Callable[[str], str]) -> ModuleType:
    """Re-import ``boundedmu.cli`` so its module-level version lookup uses ``stub``."""

    monkeypatch.setattr(importlib_metadata, "version", stub, raising=False)
    sys.modules.pop("boundedmu.cli", None)
    return importlib.import_module("boundedmu.cli")


def teardown_module(_module: ModuleType) -> None:
    sys.modules.pop("boundedmu.cli", None)
    importlib.import_module("boundedmu.cli")


@pytest.mark.parametrize("flag", ["--version", "-V"])
def test_version_flag_reads_boundedmu_distribution(monkeypatch, capsys, flag):
    calls: list[str] = []

    def fake_version(name: str) -> str:
        calls.append(name)
        if name == "boundedmu":
            return "1.2.3"
        raise importlib_metadata.PackageNotFoundError(name)

    cli = _reload_cli(monkeypatch, fake_version)

    with pytest.raises(SystemExit) as excinfo:
        cli.run([flag])

    assert excinfo.value.code == 0
    assert calls == ["boundedmu"]
    assert capsys.readouterr().out.strip() == "boundedmu 1.2.3"


def test_version_falls_back_when_not_installed(monkeypatch, capsys):
    """Running from a source checkout reports 0.0.0."""

    def missing(name: str) -> str:
        raise importlib_metadata.PackageNotFoundError(name)

    cli = _reload_cli(monkeypatch, missing)

    with pytest.raises(SystemExit) as excinfo:
        cli.run(["--version"])

    assert excinfo.value.code == 0
    assert capsys.readouterr().out.strip() == "boundedmu 0.0.0"


def test_subcommand_is_required(capsys):
    cli = importlib.import_module("boundedmu.cli")

    with pytest.raises(SystemExit) as excinfo:
        cli.run([])

    assert excinfo.value.code == 2
    assert "command" in capsys.readouterr().err
