"""Flat ``key = value`` config files shared by the CLI and the scene scripts."""

from pathlib import Path


class ConfigError(ValueError):
    pass


def normalize_key(key: str) -> str:
    return key.strip().lstrip("-").replace("-", "_").lower()


def parse_kv(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = normalize_key(key)
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = value.strip()
    return out


def load_kv(path) -> dict[str, str]:
    return parse_kv(Path(path).read_text())


def format_kv(values: dict) -> str:
    return "".join(f"{k} = {v}\n" for k, v in values.items())
