"""JSON and CSV persistence for spaces, kernels, distributions and samples.

All JSON payloads carry a ``format_version`` field; loading rejects
unknown versions instead of guessing.
"""

from __future__ import annotations

import json

import numpy as np

from .dpp import Configuration
from .errors import ConfigError
from .ground import GroundSpace
from .operators import KernelOperator

FORMAT_VERSION = 1


def _check_version(payload: dict, kind: str) -> None:
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ConfigError(f"unsupported {kind} format_version: {version!r}")


def space_to_dict(space: GroundSpace) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "ground_space",
        "label": space.label,
        "points": space.points.tolist(),
        "weights": space.weights.tolist(),
    }


def space_from_dict(payload: dict) -> GroundSpace:
    _check_version(payload, "ground-space")
    return GroundSpace(
        np.asarray(payload["points"], dtype=float),
        np.asarray(payload["weights"], dtype=float),
        payload.get("label", ""),
    )


def kernel_to_dict(K: KernelOperator) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "kernel",
        "space": space_to_dict(K.space),
        "entries": K.entries.tolist(),
    }


def kernel_from_dict(payload: dict) -> KernelOperator:
    _check_version(payload, "kernel")
    space = space_from_dict(payload["space"])
    return KernelOperator(space, np.asarray(payload["entries"], dtype=float))


def distribution_to_dict(table: dict[int, float], n_points: int) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "distribution",
        "n_points": n_points,
        "probabilities": {str(mask): float(p) for mask, p in sorted(table.items())},
    }


def distribution_from_dict(payload: dict) -> dict[int, float]:
    _check_version(payload, "distribution")
    return {int(mask): float(p) for mask, p in payload["probabilities"].items()}


def samples_to_csv(samples: list[Configuration]) -> str:
    """One line per configuration: space-separated occupied indices (may be empty)."""
    return "\n".join(" ".join(str(i) for i in sorted(X.occupied)) for X in samples) + "\n"


def samples_from_csv(text: str, space: GroundSpace) -> list[Configuration]:
    samples = []
    for line in text.splitlines():
        idx = frozenset(int(tok) for tok in line.split())
        samples.append(Configuration(space, idx))
    return samples


def save_json(payload: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
