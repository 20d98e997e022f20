"""Named substreams of a master seed, so components draw independent but
reproducible randomness from one CLI-level --seed."""
from __future__ import annotations

import hashlib
import random


def substream(seed: int, name: str) -> random.Random:
    digest = hashlib.sha256(f"{seed}:{name}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))
