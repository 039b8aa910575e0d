"""Canonical JSON encoding for reports.

Conventions used by every emitter in the package:

* complex scalars encode as [re, im] pairs; real floats stay plain numbers;
* numpy arrays encode as nested row-major lists with the same scalar rule;
* documents are dumped with sorted keys and a fixed indent, so identical
  inputs produce byte-identical files (no timestamps anywhere).
"""

from __future__ import annotations

import json
from dataclasses import asdict, is_dataclass

import numpy as np


def to_jsonable(x):
    if x is None or isinstance(x, (bool, int, str)):
        return x
    if isinstance(x, float):
        return x
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.complexfloating):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return np.stack([x.real, x.imag], axis=-1).tolist()
        return x.tolist()
    if is_dataclass(x) and not isinstance(x, type):
        return to_jsonable(asdict(x))
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    raise TypeError(f"cannot encode {type(x).__name__} into a report")


def canonical_dumps(obj) -> str:
    """Deterministic JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"
