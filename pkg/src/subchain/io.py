"""Deterministic CSV output and atomic file writes."""

from __future__ import annotations

import json
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path

import numpy as np


def fmt(value) -> str:
    """17 significant digits; ``nan``/``inf`` spelled the Python way."""
    return f"{float(value):.17g}"


def config_comment(config: dict) -> str:
    return "# config: " + json.dumps(config, sort_keys=True, separators=(",", ":"), default=_json_default)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def csv_text(columns: dict, config: dict = None) -> str:
    """Render equal-length numeric columns as CSV with a header row."""
    names = list(columns)
    data = [np.asarray(columns[k]).ravel() for k in names]
    n = {d.size for d in data}
    if len(n) > 1:
        raise ValueError("CSV columns differ in length")
    lines = []
    if config is not None:
        lines.append(config_comment(config))
    lines.append(",".join(names))
    for row in zip(*data):
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


@contextmanager
def atomic_path(path):
    """Yield a temporary sibling path; rename it over ``path`` on success."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    os.close(fd)
    try:
        yield Path(tmp)
        os.chmod(tmp, 0o644)  # mkstemp creates 0600
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_text(path, text: str) -> None:
    with atomic_path(path) as tmp:
        with open(tmp, "w", newline="\n") as fh:
            fh.write(text)


def read_csv_columns(path) -> dict:
    """Read a numeric CSV written by :func:`csv_text` (comment lines skipped)."""
    with open(path) as fh:
        rows = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    names = rows[0].split(",")
    values = np.array([[float(v) for v in r.split(",")] for r in rows[1:]]).reshape(-1, len(names))
    return {name: values[:, i] for i, name in enumerate(names)}


def max_workers() -> int:
    """Parallelism cap from ``SUBCHAIN_THREADS`` (default: CPU count)."""
    env = os.environ.get("SUBCHAIN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1
