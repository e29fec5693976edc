"""Small shared helpers: canonical JSON and deterministic RNG derivation."""

from __future__ import annotations

import hashlib
import json
import random
from typing import Any


def canonical_json(obj: Any) -> str:
    """Stable byte-for-byte JSON: sorted keys, compact, trailing newline."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def write_json(path: str, obj: Any) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(canonical_json(obj))


def read_json(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def derive_rng(seed: int, *salt: object) -> random.Random:
    """Independent stream for (seed, salt...): stable across runs and platforms."""
    material = repr((seed,) + salt).encode("ascii")
    digest = hashlib.sha256(material).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))
