"""Coverage map: every implemented check with its reference anchor and the function that computes it."""
from __future__ import annotations

import importlib
import json
from importlib import resources


def emit_manifest():
    return json.loads(resources.files("cuspml.data").joinpath("manifest.json").read_text())


def resolve(entry):
    """The callable named by an entry's function field ("module.attr")."""
    mod, attr = entry["function"].rsplit(".", 1)
    return getattr(importlib.import_module(f"cuspml.{mod}"), attr)
