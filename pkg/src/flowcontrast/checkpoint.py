"""Versioned parameter checkpoints.

Arrays are stored as float32 in an ``.npz`` container together with a JSON
metadata blob (format version, shapes, seed, config hash). Saving what was
loaded reproduces the float32 payload bit-exactly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ConfigError

FORMAT_VERSION = 1


def save_checkpoint(path, arrays: dict[str, np.ndarray], meta: dict) -> None:
    payload = {f"param/{name}": np.asarray(arr, dtype=np.float32) for name, arr in arrays.items()}
    header = dict(meta)
    header["format_version"] = FORMAT_VERSION
    header["shapes"] = {name: list(arr.shape) for name, arr in arrays.items()}
    payload["__meta__"] = np.frombuffer(
        json.dumps(header, sort_keys=True).encode("utf-8"), dtype=np.uint8
    )
    with Path(path).open("wb") as fh:
        np.savez(fh, **payload)


def load_checkpoint(path) -> tuple[dict[str, np.ndarray], dict]:
    with np.load(Path(path)) as data:
        if "__meta__" not in data:
            raise ConfigError(f"{path}: not a parameter checkpoint")
        meta = json.loads(bytes(data["__meta__"]).decode("utf-8"))
        if meta.get("format_version") != FORMAT_VERSION:
            raise ConfigError(
                f"{path}: unsupported checkpoint version {meta.get('format_version')}"
            )
        arrays = {
            name[len("param/"):]: data[name].astype(np.float64)
            for name in data.files
            if name.startswith("param/")
        }
    return arrays, meta
