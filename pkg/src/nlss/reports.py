"""Atomic report writing and runtime knobs shared by the harness."""

from __future__ import annotations

import json
import os
import tempfile


def nlss_threads() -> int:
    """Worker count for embarrassingly parallel sampling loops.

    Read from NLSS_THREADS (default 1).  Results are independent of the
    value by construction: every task derives its own seed and results are
    collected in task order.
    """
    raw = os.environ.get("NLSS_THREADS", "").strip()
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        return 1


def write_bytes_atomic(path, data: bytes) -> None:
    """Write via temp file + rename so readers never see partial output."""
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_text_atomic(path, text: str) -> None:
    write_bytes_atomic(path, text.encode("utf-8"))


def dump_json(obj, path) -> None:
    """Canonical JSON: sorted keys, fixed indentation, trailing newline."""
    write_text_atomic(path, json.dumps(obj, sort_keys=True, indent=2) + "\n")
