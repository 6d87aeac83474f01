"""Line-oriented record scanning shared by the registry, mapping-file and
snapshot readers.

Records are whitespace-separated fields on one line; a field starting with
``"`` is a quoted string using the same escapes as the DSL (``\\"`` and
``\\\\``), ``#`` outside a string starts a comment.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass


@dataclass(frozen=True)
class Field:
    value: str
    quoted: bool


class RecordSyntaxError(ValueError):
    pass


def scan_fields(line: str) -> list[Field]:
    """Split one record line into fields; raises RecordSyntaxError."""
    fields: list[Field] = []
    i = 0
    n = len(line)
    while i < n:
        ch = line[i]
        if ch in " \t":
            i += 1
            continue
        if ch == "#":
            break
        if ch == '"':
            i += 1
            value = []
            closed = False
            while i < n:
                c = line[i]
                if c == '"':
                    i += 1
                    closed = True
                    break
                if c == "\\":
                    if i + 1 < n and line[i + 1] in ('"', "\\"):
                        value.append(line[i + 1])
                        i += 2
                        continue
                    raise RecordSyntaxError("unsupported escape sequence in string")
                value.append(c)
                i += 1
            if not closed:
                raise RecordSyntaxError("unterminated string")
            fields.append(Field("".join(value), quoted=True))
            continue
        start = i
        while i < n and line[i] not in ' \t"#':
            i += 1
        fields.append(Field(line[start:i], quoted=False))
    return fields


def digest16(data: str | bytes) -> str:
    """Stable 16-hex-digit content digest (truncated SHA-256)."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()[:16]
