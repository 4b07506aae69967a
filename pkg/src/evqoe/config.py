"""Flat key-value run configuration with section-prefixed keys.

Grammar: one `section.key = value` per line, `#` comments, blank lines
ignored. Every key can be overridden on the command line as --key=value.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import IO, Sequence

TOOL_VERSION = "0.1.0"


@dataclass
class RunConfig:
    values: dict[str, str] = field(default_factory=dict)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        config = cls()
        with open(path, encoding="utf-8") as stream:
            config.update_from_stream(stream)
        return config

    def update_from_stream(self, stream: IO[str]) -> None:
        for lineno, line in enumerate(stream, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise ValueError(f"line {lineno}: expected 'key = value', got {text!r}")
            key, _, value = text.partition("=")
            self.values[key.strip()] = value.strip()

    def apply_overrides(self, overrides: Sequence[str]) -> None:
        """Overrides as 'key=value' strings (CLI --key=value flags)."""
        for item in overrides:
            if "=" not in item:
                raise ValueError(f"override must be key=value, got {item!r}")
            key, _, value = item.partition("=")
            self.values[key.strip()] = value.strip()

    # -- typed getters ----------------------------------------------------

    def get(self, key: str, default: str | None = None) -> str | None:
        return self.values.get(key, default)

    def get_str(self, key: str, default: str) -> str:
        return self.values.get(key, default)

    def get_int(self, key: str, default: int) -> int:
        return int(self.values.get(key, default))

    def get_float(self, key: str, default: float) -> float:
        return float(self.values.get(key, default))

    def get_bool(self, key: str, default: bool) -> bool:
        raw = self.values.get(key)
        if raw is None:
            return default
        return raw.lower() in ("1", "true", "yes", "on")

    def get_date(self, key: str, default: date) -> date:
        raw = self.values.get(key)
        return date.fromisoformat(raw) if raw else default

    def get_list(self, key: str, default: Sequence[str] = ()) -> list[str]:
        raw = self.values.get(key)
        if raw is None:
            return list(default)
        return [item.strip() for item in raw.split(",") if item.strip()]

    def get_float_list(self, key: str, default: Sequence[float]) -> list[float]:
        raw = self.values.get(key)
        if raw is None:
            return list(default)
        return [float(item) for item in raw.split(",") if item.strip()]

    def get_int_list(self, key: str, default: Sequence[int]) -> list[int]:
        return [int(v) for v in self.get_float_list(key, list(default))]

    def get_path(self, key: str) -> Path | None:
        raw = self.values.get(key)
        return Path(raw) if raw else None

    def require_path(self, key: str, must_exist: bool = True) -> Path:
        raw = self.values.get(key)
        if not raw:
            raise ValueError(f"missing required config key: {key}")
        path = Path(raw)
        if must_exist and not path.exists():
            raise FileNotFoundError(f"{key}: no such file: {path}")
        return path

    # -- provenance -------------------------------------------------------

    def provenance(self, input_paths: Sequence[Path]) -> dict:
        hashes = {}
        for path in input_paths:
            digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
            hashes[Path(path).name] = digest
        return {
            "tool_version": TOOL_VERSION,
            "seed": self.get_int("run.seed", 0),
            "inputs": hashes,
        }


def provenance_header(provenance: dict) -> str:
    return "# provenance: " + json.dumps(provenance, sort_keys=True) + "\n"
