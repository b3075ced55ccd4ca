"""Bundled sample networks."""

from __future__ import annotations

from importlib import resources
from typing import List


def bundled_names() -> List[str]:
    return sorted(p.name[:-4] for p in resources.files(__name__).iterdir() if p.name.endswith(".crn"))


def bundled_text(name: str) -> str:
    """Source text of a bundled network, e.g. ``bundled_text("example_isolated")``."""
    if not name.endswith(".crn"):
        name += ".crn"
    return resources.files(__name__).joinpath(name).read_text(encoding="utf-8")


def load_bundled(name: str, strict: bool = True):
    from ..network import parse_network

    return parse_network(bundled_text(name), strict=strict)
