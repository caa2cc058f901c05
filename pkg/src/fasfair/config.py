"""Flat ``key = value`` scenario files.

Blank lines and ``#`` comments are ignored, whitespace around keys and values
is insignificant, and missing keys take the :class:`Scenario` defaults.  Floats are
rendered with ``repr`` so that parse(render(s)) reproduces ``s`` exactly.
"""

from __future__ import annotations

import math
from pathlib import Path

from .model import Scenario

__all__ = ["ConfigError", "CONFIG_KEYS", "parse_config", "parse_config_values", "load_config",
           "render_config", "parse_overrides", "validate_values"]

INT_KEYS = ("n_c", "n_e")
CONFIG_KEYS = ("p_dbm", "noise_dbm", "d_c", "d_e", "theta", "r1", "r2",
               "n_c", "n_e", "w_c", "w_e")
POSITIVE_KEYS = ("d_c", "d_e", "theta", "r1", "r2", "w_c", "w_e")


class ConfigError(ValueError):
    def __init__(self, message: str, *, key: str | None = None, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.key = key
        self.line = line


def _convert(key: str, raw: str, line: int | None):
    try:
        if key in INT_KEYS:
            value = float(raw)
            if not value.is_integer():
                raise ValueError
            value = int(value)
        else:
            value = float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as a number", key=key, line=line) from None
    return value


def validate_values(values: dict, lines: dict | None = None) -> Scenario:
    """Check every key of ``values`` and build the scenario."""
    lines = lines or {}
    for key, value in values.items():
        line = lines.get(key)
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown key {key!r}", key=key, line=line)
        if not math.isfinite(value):
            raise ConfigError(f"{key} must be finite", key=key, line=line)
        if key in POSITIVE_KEYS and value <= 0:
            raise ConfigError(f"{key} must be positive, got {value!r}", key=key, line=line)
        if key in INT_KEYS and (int(value) != value or value < 1):
            raise ConfigError(f"{key} must be an integer >= 1, got {value!r}", key=key, line=line)
    merged = Scenario().to_values()
    merged.update(values)
    try:
        return Scenario.from_values(**merged)
    except (ValueError, ArithmeticError) as exc:
        raise ConfigError(str(exc)) from exc


def parse_config_values(text: str) -> dict:
    """Only the keys present in ``text``, typed and individually validated."""
    values, lines = _read(text)
    validate_values(values, lines)
    return values


def parse_config(text: str) -> Scenario:
    return validate_values(*_read(text))


def _read(text: str) -> tuple[dict, dict]:
    values, lines = {}, {}
    for number, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {body!r}", line=number)
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown key {key!r}", key=key, line=number)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", key=key, line=number)
        values[key] = _convert(key, raw, number)
        lines[key] = number
    return values, lines


def load_config(path) -> Scenario:
    return parse_config(Path(path).read_text())


def render_config(scenario: Scenario) -> str:
    values = scenario.to_values()
    return "".join(f"{key} = {values[key]!r}\n" for key in CONFIG_KEYS)


def parse_overrides(pairs) -> dict:
    """``["p_dbm=10", ...]`` to a typed dict, for command-line overrides."""
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, raw = (part.strip() for part in item.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown key {key!r}", key=key)
        out[key] = _convert(key, raw, None)
    return out
