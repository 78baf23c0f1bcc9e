"""The bundled regression corpus of domain specs."""

import json
from importlib import resources

from .domain import validate_spec

NAMES = ("ball_d3", "ss4_d3", "ss6_d3", "ss8_d3", "ss4_d4", "ss6_d4", "ss8_d4", "kn_d3", "mixed_d5")


def corpus_path(name):
    return resources.files("latlab") / "data" / f"{name}.json"


def load(name):
    if name not in NAMES:
        raise KeyError(f"unknown corpus spec {name!r}; choose from {', '.join(NAMES)}")
    raw = json.loads(corpus_path(name).read_text())
    raw["name"] = name
    return validate_spec(raw)


def all_specs(max_dim=None):
    specs = [load(n) for n in NAMES]
    return [s for s in specs if max_dim is None or s.d <= max_dim]
