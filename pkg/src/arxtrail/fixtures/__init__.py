"""Bundled reference trails and result tables.

Trails carry their tabulated per-addition weights in the row columns
(wk/wd for the related-key SPECK trails, w for the toys); refined and
exactly-counted values live in the result documents so the trails stay
pure difference data.  Weak keys are listed in circuit input order
l2, l1, l0, k0.  Everything here is regenerated and cross-checked by
scripts/build_fixtures.py; edit the tables there, not the JSON.
"""

import json
from importlib import resources

from ..ciphers import (
    TRAIL_FORMAT, Trail, build_chaskey, build_speck, build_speck_toy,
    TOY_CHASKEY_ROTS, trail_from_json,
)

__all__ = ["circuit_for", "load_results", "names", "result_names",
           "trail", "trail_names"]


def _root():
    return resources.files(__package__)


def _load(name: str) -> dict:
    res = _root() / f"{name}.json"
    try:
        text = res.read_text()
    except (FileNotFoundError, IsADirectoryError):
        raise KeyError(f"no fixture named {name!r}") from None
    return json.loads(text)


def names() -> tuple:
    out = []
    for entry in _root().iterdir():
        if entry.name.endswith(".json"):
            out.append(entry.name[:-5])
    return tuple(sorted(out))


def trail_names() -> tuple:
    return tuple(n for n in names()
                 if _load(n).get("format") == TRAIL_FORMAT)


def result_names() -> tuple:
    return tuple(n for n in names()
                 if _load(n).get("format") != TRAIL_FORMAT)


def trail(name: str) -> Trail:
    doc = _load(name)
    if doc.get("format") != TRAIL_FORMAT:
        raise KeyError(f"fixture {name!r} is not a trail")
    return trail_from_json(doc)


def load_results(name: str) -> dict:
    doc = _load(name)
    if doc.get("format") == TRAIL_FORMAT:
        raise KeyError(f"fixture {name!r} is a trail, use trail()")
    return doc


def circuit_for(t: Trail, mode: str = "search"):
    """The circuit a bundled trail is written against."""
    if t.cipher.startswith("speck_toy"):
        return build_speck_toy(t.rounds, t.n)
    if t.cipher.startswith("chaskey_toy"):
        return build_chaskey(t.rounds, t.n, TOY_CHASKEY_ROTS, name=t.cipher)
    if t.cipher.startswith("speck"):
        variant = t.cipher.removeprefix("speck").replace("_", "/")
        return build_speck(variant, t.rounds, mode)
    if t.cipher.startswith("chaskey"):
        return build_chaskey(t.rounds, t.n)
    raise ValueError(f"no circuit builder for cipher {t.cipher!r}")
