"""Counter-based random stream derivation.

Each stream is a ``random.Random`` seeded from a SHA-256 digest of its path
(master seed plus a tuple of labels/indices), so a rollout's randomness depends
only on its own address and never on scheduling order.
"""

from __future__ import annotations

import hashlib
import random


def derive_seed(seed: int, *path: object) -> int:
    text = ":".join([str(int(seed))] + [str(p) for p in path])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big", signed=False)


def stream(seed: int, *path: object) -> random.Random:
    """Independent ``random.Random`` for the given address."""
    return random.Random(derive_seed(seed, *path))
