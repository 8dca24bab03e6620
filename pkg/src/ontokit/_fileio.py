"""Atomic file writing helpers.

Every exporter goes through these so that interrupted runs never leave a
half-written file behind, and so that identical inputs produce byte-identical
outputs (keys sorted, UTF-8, trailing newline).
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Iterable


def _atomic_write(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_text_atomic(path: str | Path, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    _atomic_write(path, text)


def dumps_canonical(obj, indent: int | None = 2) -> str:
    return json.dumps(obj, indent=indent, sort_keys=True, ensure_ascii=False)


def write_json_atomic(path: str | Path, obj) -> None:
    write_text_atomic(path, dumps_canonical(obj))


def write_jsonl_atomic(path: str | Path, records: Iterable[dict]) -> None:
    lines = [dumps_canonical(rec, indent=None) for rec in records]
    _atomic_write(path, "".join(line + "\n" for line in lines))
