"""Environment driven settings for the boundedmu CLI.

Values come from ``BOUNDEDMU_*`` environment variables. A dotenv file
(``.env`` in the working directory, or the file named by ``BOUNDEDMU_DOTENV``)
fills in whatever the environment leaves unset; it never overrides a variable
that is already defined and is never written back into ``os.environ``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Mapping, Optional

from .errors import BoundedMuError


PROJECT_ROOT = Path(__file__).resolve().parents[1]
DEFAULT_PARAMS_PATH = PROJECT_ROOT / "params" / "corpus.json"
DEFAULT_NODE_BUDGET = 100_000
DEFAULT_MAX_NODES = 500
DEFAULT_DOTENV = Path(".env")

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def read_dotenv(path: Path) -> Dict[str, str]:
    """Parse ``KEY=value`` lines; blank lines, comments and malformed lines are skipped."""

    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise BoundedMuError(f"cannot read dotenv file: {path}") from exc

    values: Dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("export "):
            line = line[len("export "):].lstrip()
        key, sep, value = line.partition("=")
        key = key.strip()
        if line.startswith("#") or not sep or not key:
            continue
        value = value.strip()
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        values[key] = value
    return values


class _Source:
    """Lookup over the environment with dotenv values as fallback."""

    def __init__(self, environ: Mapping[str, str], fallback: Mapping[str, str]) -> None:
        self._environ = environ
        self._fallback = fallback

    def get(self, name: str) -> Optional[str]:
        value = self._environ.get(name)
        if value is None:
            value = self._fallback.get(name)
        if value is None or not value.strip():
            return None
        return value.strip()

    def integer(self, name: str, default: int, minimum: int) -> int:
        raw = self.get(name)
        if raw is None:
            return default
        try:
            value = int(raw)
        except ValueError as exc:
            raise BoundedMuError(f"{name} must be an integer, got {raw!r}") from exc
        if value < minimum:
            raise BoundedMuError(f"{name} must be at least {minimum}, got {value}")
        return value

    def log_level(self, name: str) -> str:
        level = (self.get(name) or "WARNING").upper()
        if level not in _LOG_LEVELS:
            raise BoundedMuError(
                f"{name} must be one of {', '.join(_LOG_LEVELS)}, got {level!r}"
            )
        return level


@dataclass(frozen=True)
class Settings:
    log_level: str = "WARNING"
    jobs: int = 1
    node_budget: int = DEFAULT_NODE_BUDGET
    max_nodes: int = DEFAULT_MAX_NODES
    params_path: Path = DEFAULT_PARAMS_PATH

    @classmethod
    def from_env(
        cls,
        environ: Optional[Mapping[str, str]] = None,
        dotenv: Optional[Path] = None,
    ) -> "Settings":
        """Build settings from ``environ`` (default ``os.environ``) and a dotenv file.

        ``dotenv`` defaults to ``BOUNDEDMU_DOTENV`` when set, else ``.env``.
        A missing default file is ignored; a missing explicit file is an error.
        """

        env = os.environ if environ is None else environ
        explicit = dotenv
        if explicit is None and (env.get("BOUNDEDMU_DOTENV") or "").strip():
            explicit = Path(env["BOUNDEDMU_DOTENV"].strip()).expanduser()

        if explicit is not None:
            if not explicit.is_file():
                raise BoundedMuError(f"dotenv file not found: {explicit}")
            fallback = read_dotenv(explicit)
        elif DEFAULT_DOTENV.is_file():
            fallback = read_dotenv(DEFAULT_DOTENV)
        else:
            fallback = {}

        source = _Source(env, fallback)
        params = source.get("BOUNDEDMU_PARAMS")
        return cls(
            log_level=source.log_level("BOUNDEDMU_LOG_LEVEL"),
            jobs=source.integer("BOUNDEDMU_JOBS", 1, 1),
            node_budget=source.integer("BOUNDEDMU_NODE_BUDGET", DEFAULT_NODE_BUDGET, 1),
            max_nodes=source.integer("BOUNDEDMU_MAX_NODES", DEFAULT_MAX_NODES, 1),
            params_path=Path(params).expanduser() if params else DEFAULT_PARAMS_PATH,
        )
