"""Instance files and generators.

Instances are JSON with integer-exact coordinates: sorted keys, no floats, so
identical flags and seeds produce byte-identical files.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

from .errors import InvalidInput
from .geometry import AxisBox
from .rng import substream

SHAPES = ("unit", "canonical", "mixed")


@dataclass(frozen=True)
class InstanceFile:
    dim: int
    denominator: int
    boxes: tuple[AxisBox, ...]
    target: int | None = None
    provenance: dict | None = None

    def to_json(self) -> str:
        payload = {
            "dim": self.dim,
            "denominator": self.denominator,
            "boxes": [{"lo": list(b.lo), "hi": list(b.hi)} for b in self.boxes],
        }
        if self.target is not None:
            payload["target"] = self.target
        if self.provenance is not None:
            payload["provenance"] = self.provenance
        return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def from_json(text: str) -> InstanceFile:
    data = json.loads(text)
    try:
        dim = int(data["dim"])
        denom = int(data["denominator"])
        boxes = tuple(
            AxisBox(tuple(int(x) for x in b["lo"]),
                    tuple(int(x) for x in b["hi"]), denom)
            for b in data["boxes"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed instance file: {exc}") from exc
    for b in boxes:
        if b.dim != dim:
            raise InvalidInput("box dimension does not match the header")
    target = data.get("target")
    return InstanceFile(dim, denom, boxes,
                        int(target) if target is not None else None,
                        data.get("provenance"))


def gen_random_boxes(n: int, d: int, shape: str, seed: int,
                     long_side: int = 16, span: int | None = None) -> InstanceFile:
    """Deterministic random instance: unit cubes, canonical long boxes with a
    uniformly random long axis, or an even mixture.

    Coordinates land on the 1/L grid (denominator long_side for canonical and
    mixed shapes, 1 for unit cubes); span is the side of the placement region
    in units, default scaled to keep the density moderate.
    """
    if n < 1:
        raise InvalidInput("need n >= 1")
    if shape not in SHAPES:
        raise InvalidInput(f"shape must be one of {SHAPES}")
    if d < 1:
        raise InvalidInput("need d >= 1")
    rng = substream(seed, f"gen:{n}:{d}:{shape}:{long_side}")
    long_here = long_side if shape in ("canonical", "mixed") else 1
    denom = long_here if shape != "unit" else 1
    if span is None:
        span = max(4, round(2.0 * n ** (1 / d))) * max(1, long_here // 4)
    boxes = []
    for _ in range(n):
        canonical = shape == "canonical" or (shape == "mixed" and rng.random() < 0.5)
        lo = [rng.randint(0, span * denom) for _ in range(d)]
        sides = [denom] * d
        if canonical:
            sides[rng.randrange(d)] = long_here * denom
        boxes.append(AxisBox(tuple(lo), tuple(l + s for l, s in zip(lo, sides)),
                             denom))
    return InstanceFile(d, denom, tuple(boxes))
