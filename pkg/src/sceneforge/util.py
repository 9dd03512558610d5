"""Small shared helpers: stable seeding and atomic JSON writes."""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path


def stable_seed(*parts) -> int:
    """64-bit seed from a stable hash of the parts.

    Unlike builtin hash(), identical inputs give identical seeds across
    processes and runs, so adding models to a build never reshuffles the
    randomness of existing ones.
    """
    digest = hashlib.sha256(":".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


def write_json_atomic(path, payload) -> None:
    """Write JSON via a temp file + rename, so readers never see partial files."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    os.replace(tmp, path)
