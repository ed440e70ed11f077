"""Tiny key-value config file format used for schemas and run configs.

One ``key = value`` pair per line, ``#`` starts a comment, values may be
comma-separated lists. Keys are case-sensitive.
"""

from __future__ import annotations

from pathlib import Path

from .errors import ConfigError


def parse_kv_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def read_kv_file(path) -> dict[str, str]:
    return parse_kv_text(Path(path).read_text(encoding="utf-8"))


def split_list(value: str) -> list[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def format_kv(pairs: dict) -> str:
    return "".join(f"{k} = {v}\n" for k, v in pairs.items())
