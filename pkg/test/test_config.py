"""Tests for environment driven settings."""

from __future__ import annotations

import os
import sys
from pathlib import Path

import pytest


PROJECT_ROOT = os.path.dirname(os.path.abspath(__file__))
PACKAGE_ROOT = os.path.dirname(PROJECT_ROOT)
if PACKAGE_ROOT not in sys.path:
    sys.path.insert(0, PACKAGE_ROOT)

from boundedmu.config import DEFAULT_NODE_BUDGET, DEFAULT_PARAMS_PATH, Settings, read_dotenv
from boundedmu.errors import BoundedMuError


_KEYS = (
    "BOUNDEDMU_DOTENV",
    "BOUNDEDMU_LOG_LEVEL",
    "BOUNDEDMU_JOBS",
    "BOUNDEDMU_NODE_BUDGET",
    "BOUNDEDMU_MAX_NODES",
    "BOUNDEDMU_PARAMS",
)


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch, tmp_path):
    for key in _KEYS:
        monkeypatch.delenv(key, raising=False)
    monkeypatch.chdir(tmp_path)


def test_defaults_without_environment():
    settings = Settings.from_env()

    assert settings.log_level == "WARNING"
    assert settings.jobs == 1
    assert settings.node_budget == DEFAULT_NODE_BUDGET
    assert settings.params_path == DEFAULT_PARAMS_PATH


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("BOUNDEDMU_LOG_LEVEL", "debug")
    monkeypatch.setenv("BOUNDEDMU_JOBS", "4")
    monkeypatch.setenv("BOUNDEDMU_MAX_NODES", "50")
    monkeypatch.setenv("BOUNDEDMU_PARAMS", "corpus.json")

    settings = Settings.from_env()

    assert settings.log_level == "DEBUG"
    assert settings.jobs == 4
    assert settings.max_nodes == 50
    assert settings.params_path == Path("corpus.json")


@pytest.mark.parametrize(
    "key, value",
    [
        ("BOUNDEDMU_JOBS", "0"),
        ("BOUNDEDMU_NODE_BUDGET", "lots"),
        ("BOUNDEDMU_LOG_LEVEL", "chatty"),
    ],
)
def test_invalid_values_raise(monkeypatch, key, value):
    monkeypatch.setenv(key, value)

    with pytest.raises(BoundedMuError, match=key):
        Settings.from_env()


def test_dotenv_fills_only_unset_variables(monkeypatch, tmp_path):
    dotenv = tmp_path / "custom.env"
    dotenv.write_text(
        "# settings\nBOUNDEDMU_JOBS=3\nexport BOUNDEDMU_MAX_NODES='80'\nnot a setting\n",
        encoding="utf-8",
    )
    monkeypatch.setenv("BOUNDEDMU_JOBS", "2")
    monkeypatch.setenv("BOUNDEDMU_DOTENV", str(dotenv))

    settings = Settings.from_env()

    assert settings.jobs == 2
    assert settings.max_nodes == 80
    assert "BOUNDEDMU_MAX_NODES" not in os.environ


def test_default_dotenv_in_working_directory(tmp_path):
    (tmp_path / ".env").write_text('BOUNDEDMU_NODE_BUDGET="1234"\n', encoding="utf-8")

    assert Settings.from_env().node_budget == 1234


def test_explicit_environment_mapping_bypasses_os_environ(monkeypatch):
    monkeypatch.setenv("BOUNDEDMU_JOBS", "7")

    settings = Settings.from_env(environ={"BOUNDEDMU_JOBS": "5"})

    assert settings.jobs == 5


def test_missing_explicit_dotenv_raises(monkeypatch, tmp_path):
    monkeypatch.setenv("BOUNDEDMU_DOTENV", str(tmp_path / "absent.env"))

    with pytest.raises(BoundedMuError, match="dotenv file not found"):
        Settings.from_env()


def test_read_dotenv_strips_matching_quotes_only(tmp_path):
    dotenv = tmp_path / "quotes.env"
    dotenv.write_text("A=\"x\"\nB='y\nC= z \n=skipped\n", encoding="utf-8")

    assert read_dotenv(dotenv) == {"A": "x", "B": "'y", "C": "z"}
