"""YAML experiment configs with exact-location error reporting.

The file is parsed twice: ``yaml.safe_load`` for the data and
``yaml.compose`` for node marks, so schema errors can point at the
offending line.  Values can be overridden from the environment with
``RTRL_<SECTION>__<KEY>=value`` (value parsed as YAML, e.g.
``RTRL_TRAIN__TOTAL_STEPS=5000``); top-level scalars use
``RTRL_<KEY>``.
"""

from __future__ import annotations

import os

import yaml

__all__ = ["ConfigError", "ENV_PREFIX", "load_yaml_mapping", "apply_env_overrides", "check_keys"]

ENV_PREFIX = "RTRL_"


class ConfigError(ValueError):
    """Invalid experiment configuration; message carries file:line when known."""


def _collect_lines(node, path, lines):
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            key_path = path + (str(key_node.value),)
            lines[key_path] = key_node.start_mark.line + 1
            _collect_lines(value_node, key_path, lines)
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            _collect_lines(item, path + (i,), lines)


def load_yaml_mapping(path) -> tuple[dict, dict, str]:
    """Returns (data, key line table, filename); the document must be a mapping."""
    with open(path) as fh:
        text = fh.read()
    try:
        data = yaml.safe_load(text)
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping of sections")
    lines: dict = {}
    if root is not None:
        _collect_lines(root, (), lines)
    return data, lines, str(path)


def apply_env_overrides(data: dict, environ=None) -> list[str]:
    """Mutates ``data`` with RTRL_* overrides; returns human-readable notes."""
    environ = os.environ if environ is None else environ
    applied = []
    for name in sorted(environ):
        if not name.startswith(ENV_PREFIX):
            continue
        raw = environ[name]
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigError(f"environment override {name}={raw!r} is not valid YAML: {exc}") from exc
        rest = name[len(ENV_PREFIX):].lower()
        if "__" in rest:
            section, key = rest.split("__", 1)
            target = data.setdefault(section, {})
            if not isinstance(target, dict):
                raise ConfigError(f"environment override {name}: section {section!r} is not a mapping")
            target[key] = value
            applied.append(f"{section}.{key} = {value!r} (from {name})")
        else:
            data[rest] = value
            applied.append(f"{rest} = {value!r} (from {name})")
    return applied


def check_keys(mapping: dict, allowed, path: tuple, lines: dict, filename: str) -> None:
    """Rejects keys outside ``allowed`` with a file:line diagnostic."""
    for key in mapping:
        if key not in allowed:
            key_path = path + (key,)
            line = lines.get(key_path)
            where = f"{filename}:{line}" if line is not None else filename
            dotted = ".".join(str(p) for p in key_path)
            raise ConfigError(
                f"{where}: unknown key '{dotted}' (allowed here: {', '.join(sorted(allowed))})"
            )
