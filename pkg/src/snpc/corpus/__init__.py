"""Bundled example programs."""
from __future__ import annotations

from importlib import resources

from ..lang import Program, inline_composite, parse


def names() -> list[str]:
    return sorted(p.name[:-4] for p in resources.files(__name__).iterdir() if p.name.endswith(".snp"))


def source(name: str) -> str:
    return resources.files(__name__).joinpath(f"{name}.snp").read_text(encoding="utf-8")


def load(name: str, *, atomic: bool = True) -> Program:
    """Parse a bundled program; composite ones are inlined unless ``atomic=False``."""
    p = parse(source(name), name=name)
    return inline_composite(p) if atomic else p
