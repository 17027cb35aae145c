"""Counter-based uniform deviates.

Each (key, purpose, stream, slot) position maps to one double in the open
interval (0, 1) by avalanching a 64-bit counter with the splitmix64 finalizer.
Draws therefore depend only on their position, never on evaluation order or
worker layout: subject i sees the same deviates no matter how work is chunked,
which is what makes populations and surveys bit-reproducible.

Counter layout: purpose (4 bits) | stream (40 bits) | slot (20 bits).
"""

from __future__ import annotations

import numpy as np

_GOLDEN = 0x9E3779B97F4B07B5
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB
_MASK = (1 << 64) - 1

_SLOT_BITS = 20
_STREAM_BITS = 40
MAX_STREAMS = 1 << _STREAM_BITS
MAX_SLOTS = 1 << _SLOT_BITS

# Domain separation between the consumers of the stream space.
PURPOSE_PATH = 1
PURPOSE_SURVEY_TIME = 2
PURPOSE_SURVEY_PICK = 3


def derive_key(seed: int) -> int:
    """Whiten a user seed into a stream key (pure-int splitmix64 finalizer)."""
    z = (int(seed) + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * _MIX_A) & _MASK
    z = ((z ^ (z >> 27)) * _MIX_B) & _MASK
    return z ^ (z >> 31)


def derive_seed(*parts: int) -> int:
    """Fold several integers (e.g. run seed and sample size) into one seed."""
    z = 0
    for p in parts:
        z = derive_key(z ^ (int(p) & _MASK))
    return z


def uniforms(key: int, purpose: int, streams, slots) -> np.ndarray:
    """Uniform deviates in (0, 1) at positions (purpose, stream, slot).

    ``streams`` and ``slots`` broadcast against each other; the result is
    float64 with values ((hash >> 11) + 0.5) * 2**-53, strictly inside the
    open interval so -log(u) is always finite and positive.
    """
    streams = np.asarray(streams, dtype=np.uint64)
    slots = np.asarray(slots, dtype=np.uint64)
    if streams.size and int(streams.max()) >= MAX_STREAMS:
        raise ValueError(f"stream index must be < {MAX_STREAMS}")
    if slots.size and int(slots.max()) >= MAX_SLOTS:
        raise ValueError(f"slot index must be < {MAX_SLOTS}")
    if not 0 < purpose < 16:
        raise ValueError("purpose must be in 1..15")

    c = (np.uint64(purpose << (_STREAM_BITS + _SLOT_BITS))
         | (streams << np.uint64(_SLOT_BITS)) | slots)
    z = np.uint64(key) + (c + np.uint64(1)) * np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX_A)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX_B)
    z = z ^ (z >> np.uint64(31))
    return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53
