"""YAML configuration loading with ``_base_`` inheritance.

A file may name one or more base files (paths relative to itself) under
the top-level ``_base_`` key. Bases are folded left to right, later
bases overriding earlier ones, and the file's own keys override all of
them. Mappings merge recursively per key; anything else (sequences
included) is replaced wholesale. There is no deletion marker.

Only a deterministic YAML subset is accepted: block/flow mappings,
sequences and plain or quoted scalars. Anchors, aliases, multi-document
streams and non-string mapping keys are rejected outright.
"""

from __future__ import annotations

import json
from pathlib import Path

import yaml

from .errors import ConfigError

BASE_KEY = "_base_"


class _Missing:
    def __repr__(self):
        return "<missing>"

    def __bool__(self):
        return False


MISSING = _Missing()


class _StrictLoader(yaml.SafeLoader):
    """SafeLoader that refuses anchors and aliases."""

    def compose_node(self, parent, index):
        if self.check_event(yaml.events.AliasEvent):
            raise ConfigError("YAML aliases are not supported")
        event = self.peek_event()
        if getattr(event, "anchor", None) is not None:
            raise ConfigError("YAML anchors are not supported")
        return super().compose_node(parent, index)


# Dates stay plain strings: drop the implicit timestamp resolver.
_StrictLoader.yaml_implicit_resolvers = {
    key: [(tag, regexp) for tag, regexp in resolvers if tag != "tag:yaml.org,2002:timestamp"]
    for key, resolvers in yaml.SafeLoader.yaml_implicit_resolvers.items()
}

_SCALARS = (str, int, float, bool, type(None))


def _validate_tree(node, where: str):
    if isinstance(node, dict):
        for key, value in node.items():
            if not isinstance(key, str):
                raise ConfigError(f"{where}: mapping keys must be strings, got {key!r}")
            _validate_tree(value, where)
    elif isinstance(node, list):
        for item in node:
            _validate_tree(item, where)
    elif not isinstance(node, _SCALARS):
        raise ConfigError(f"{where}: unsupported YAML node of type {type(node).__name__}")


def parse_yaml(text: str, where: str = "<string>"):
    """Parse one YAML document from text, restricted to the supported subset."""
    try:
        tree = yaml.load(text, Loader=_StrictLoader)
    except ConfigError:
        raise
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        loc = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"{where}: {exc.problem or exc}{loc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    _validate_tree(tree, where)
    return tree


def merge(base, overlay):
    """Recursive mapping merge; the overlay wins everywhere else."""
    if isinstance(base, dict) and isinstance(overlay, dict):
        merged = dict(base)
        for key, value in overlay.items():
            if key in merged:
                merged[key] = merge(merged[key], value)
            else:
                merged[key] = value
        return merged
    return overlay


def _reject_nested_base(node, where: str):
    if isinstance(node, dict):
        for key, value in node.items():
            if key == BASE_KEY:
                raise ConfigError(
                    f"{where}: {BASE_KEY!r} is only meaningful at the top level"
                )
            _reject_nested_base(value, where)
    elif isinstance(node, list):
        for item in node:
            _reject_nested_base(item, where)


def load_config(path: Path | str):
    """Load a YAML file and resolve its ``_base_`` inheritance chain."""
    return _load(Path(path).resolve(), chain=())


def _load(path: Path, chain: tuple[Path, ...]):
    if path in chain:
        cycle = " -> ".join(str(p) for p in chain + (path,))
        raise ConfigError(f"inheritance cycle: {cycle}")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    raw = parse_yaml(text, where=str(path))

    if isinstance(raw, dict) and BASE_KEY in raw:
        bases = raw[BASE_KEY]
        if isinstance(bases, str):
            bases = [bases]
        if not isinstance(bases, list) or not all(isinstance(b, str) for b in bases):
            raise ConfigError(
                f"{path}: {BASE_KEY!r} must be a path or a list of paths"
            )
        resolved = {}
        for base_ref in bases:
            base_path = (path.parent / base_ref).resolve()
            resolved = merge(resolved, _load(base_path, chain + (path,)))
        own = {k: v for k, v in raw.items() if k != BASE_KEY}
        tree = merge(resolved, own)
    else:
        tree = raw

    _reject_nested_base(tree, where=str(path))
    return tree


def get_path(cfg, dotted: str, default=MISSING):
    """Walk mappings along a dotted path; `default` when any hop is absent."""
    if not dotted:
        raise ConfigError("dotted path must be non-empty")
    node = cfg
    for key in dotted.split("."):
        if not isinstance(node, dict) or key not in node:
            return default
        node = node[key]
    return node


def to_canonical_json(cfg) -> str:
    """Stable JSON rendering of a resolved config for inspection."""
    return json.dumps(cfg, indent=2, ensure_ascii=False) + "\n"
