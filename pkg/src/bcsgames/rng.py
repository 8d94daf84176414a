"""Deterministic named randomness substreams.

Every randomized routine in the package accepts either an explicit
``random.Random`` or a ``(seed, *labels)`` pair routed through
:func:`substream`.  Substreams are derived by hashing the seed together with
a label path, so independent components (rounds of a protocol, sampler
draws, grid probes) get reproducible, order-independent streams from one
top-level seed.  Re-running with the same seed and labels replays the exact
same draws no matter how work is scheduled.
"""

from __future__ import annotations

import hashlib
import random


def substream_seed(seed: int, *labels: object) -> int:
    """Derive a child seed from ``seed`` and a label path.

    Labels may be ints or strings; they are joined unambiguously before
    hashing so ("a", 1) and ("a1",) differ.
    """
    h = hashlib.sha256()
    h.update(str(int(seed)).encode())
    for label in labels:
        h.update(b"\x1f")
        h.update(repr(label).encode())
    return int.from_bytes(h.digest()[:8], "big")


def substream(seed: int, *labels: object) -> random.Random:
    """A ``random.Random`` seeded from the (seed, labels) path."""
    return random.Random(substream_seed(seed, *labels))
