"""Flat key = value experiment configs with typed, strict parsing.

Files hold one assignment per line; ``#`` starts a comment. Every command
declares its key schema; unknown keys are rejected so that config drift is
caught instead of silently ignored. Values are typed by the schema:
float, int, str, bool, or comma-separated float lists.
"""

from __future__ import annotations

from pathlib import Path

from .errors import ConfigError


def parse_value(raw: str, kind: str):
    raw = raw.strip()
    try:
        if kind == "float":
            return float(raw)
        if kind == "int":
            return int(raw)
        if kind == "bool":
            if raw.lower() in ("true", "1", "yes", "on"):
                return True
            if raw.lower() in ("false", "0", "no", "off"):
                return False
            raise ValueError(raw)
        if kind == "floatlist":
            return tuple(float(x) for x in raw.split(",") if x.strip())
        if kind == "str":
            return raw
    except ValueError as exc:
        raise ConfigError(f"cannot parse {raw!r} as {kind}") from exc
    raise ConfigError(f"unknown schema kind {kind!r}")


def load_config(path: str | Path | None, schema: dict, overrides=()) -> dict:
    """Read a config file and apply --set overrides against a schema.

    ``schema`` maps key -> (kind, default); None defaults mark required
    keys. Returns a plain dict with every schema key populated.
    """
    raw: dict = {}
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, val = stripped.split("=", 1)
            raw[key.strip()] = val.strip()
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        key, val = item.split("=", 1)
        raw[key.strip()] = val.strip()

    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    out = {}
    for key, (kind, default) in schema.items():
        if key in raw:
            out[key] = parse_value(raw[key], kind)
        elif default is None:
            raise ConfigError(f"missing required config key {key!r}")
        else:
            out[key] = default
    return out
