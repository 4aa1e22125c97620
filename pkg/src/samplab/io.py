"""Serialization helpers: versioned JSON-lines files, canonical JSON,
stable CSV formatting, time parsing, and content hashing.

All writers are deterministic (sorted keys, LF endings, repr floats) so
pipeline artifacts are byte-identical across reruns.
"""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone

from .errors import SchemaError

MS_PER_DAY = 86_400_000
MS_PER_HOUR = 3_600_000


def to_ms(when) -> int:
    """Milliseconds since the Unix epoch from an int, datetime, or ISO string."""
    if isinstance(when, (int, float)):
        return int(when)
    if isinstance(when, str):
        when = datetime.fromisoformat(when)
    if isinstance(when, datetime):
        if when.tzinfo is None:
            when = when.replace(tzinfo=timezone.utc)
        return int(when.timestamp() * 1000)
    raise SchemaError(f"cannot interpret {when!r} as a time")


def from_ms(ms: int) -> datetime:
    return datetime.fromtimestamp(ms / 1000.0, tz=timezone.utc).replace(tzinfo=None)


def iso_ms(ms: int) -> str:
    return from_ms(ms).isoformat(timespec="milliseconds")


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def fmt_float(x) -> str:
    """Shortest round-trip decimal form; deterministic across runs."""
    return repr(float(x))


def write_jsonl(path, schema: str, version: int, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_json({"schema": schema, "version": version}) + "\n")
        for row in rows:
            fh.write(canonical_json(row) + "\n")


def read_jsonl(path, schema: str, version: int):
    """Yield rows after validating the header line."""
    with open(path, encoding="utf-8") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError:
            raise SchemaError(f"{path}: missing JSON header line")
        if header.get("schema") != schema or header.get("version") != version:
            raise SchemaError(
                f"{path}: expected schema {schema} v{version}, got {header}"
            )
        for line in fh:
            if line.strip():
                yield json.loads(line)
