"""Model-driven parser generation: constraint mappings, grammars and parsing."""

import json
from os import PathLike
from pathlib import Path
from typing import Iterable, Optional, Union

from . import _mcc

Mapping = Union[str, PathLike, tuple]

__all__ = ["check", "grammar", "parse", "selftest", "FIXTURE_DIR"]

FIXTURE_DIR = _mcc.FIXTURE_DIR


def _named(mappings: Iterable[Mapping]) -> list:
    out = []
    for i, m in enumerate(mappings):
        if isinstance(m, tuple):
            out.append((str(m[0]), m[1]))
        elif isinstance(m, PathLike):
            out.append((str(m), Path(m).read_text()))
        else:
            out.append((f"<mapping {i}>", m))
    return out


def _text(source) -> str:
    return Path(source).read_text() if isinstance(source, PathLike) else source


def check(model, mappings: Iterable[Mapping] = (), strict: bool = False) -> dict:
    """Validate mappings against a model. Returns ok, diagnostics and the canonical constraints."""
    return json.loads(_mcc.check(_text(model), _named(mappings), strict))


def grammar(model, mappings: Iterable[Mapping] = (), format: str = "ebnf",
            start: Optional[str] = None, strict: bool = False) -> dict:
    return json.loads(_mcc.grammar(_text(model), _named(mappings), format, start, strict))


def parse(model, mappings: Iterable[Mapping], input, start: Optional[str] = None,
          strict: bool = False) -> dict:
    """Parse `input` into an instance graph."""
    return json.loads(_mcc.parse(_text(model), _named(mappings), _text(input), start, strict))


def selftest(fixtures: Optional[Union[str, PathLike]] = None):
    return _mcc.selftest(str(fixtures or FIXTURE_DIR))
