"""Canonical JSON encoding used for every artifact the toolkit writes.

Byte-identical output for equal values is a hard requirement (database
directories are diffed and content-addressed), so all serializers funnel
through this module: 2-space indent, LF newlines, insertion-ordered keys,
UTF-8, one trailing newline.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Any


def canonical_json(value: Any) -> str:
    """Encode ``value`` in the canonical layout. Callers are responsible for
    building dicts with keys in schema order; key order is preserved."""
    return json.dumps(value, indent=2, ensure_ascii=False) + "\n"


def parse_json(text: str) -> Any:
    return json.loads(text)


def content_id(data: str | bytes) -> str:
    """Stable 16-hex-digit content digest, used for screenshot ids."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()[:16]


def write_text(path: Path, text: str) -> None:
    """Write atomically (same-directory temp file + rename)."""
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def write_json(path: Path, value: Any) -> None:
    write_text(path, canonical_json(value))


def read_json(path: Path) -> Any:
    return json.loads(path.read_text(encoding="utf-8"))
