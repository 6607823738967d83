"""Access to packaged data files: lexicons, prompt templates, schemas."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from pathlib import Path

from .textutil import parse_lexicon


def _asset_root() -> Path:
    return Path(str(resources.files("deepnews") / "assets"))


def schema_dir() -> Path:
    """Directory holding the built-in narrative schema files."""
    return _asset_root() / "schemas"


def template_text(name: str) -> str:
    return (_asset_root() / "templates" / name).read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def lexicon(name: str) -> tuple[str, ...]:
    """Load a packaged lexicon: 'connectors', 'formal', 'colloquial', 'opinion'."""
    path = _asset_root() / "lexicons" / f"{name}.txt"
    return parse_lexicon(path.read_text(encoding="utf-8"))
