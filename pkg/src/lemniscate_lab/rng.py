"""Deterministic hierarchical streams of standard complex Gaussians.

Every random quantity in the library is drawn from a stream addressed by
``(master_seed, label, index, sub_index)``.  The derivation is a pure
function of that tuple, so parallel workers produce identical results
regardless of scheduling.

Bit-exact construction
----------------------
``label`` is hashed to a 64-bit tag: the first 8 bytes of
``SHA-256(label.encode("utf-8"))``, little-endian.  The entropy list
``[master_seed, label_tag, index, sub_index]`` feeds
``numpy.random.SeedSequence``, whose hashing algorithm is fixed by NumPy's
stream-compatibility policy.  Generators are ``PCG64`` and complex
Gaussians come from ``Generator.standard_normal`` (ziggurat): value ``j``
is ``(x[j, 0] + 1j * x[j, 1]) / sqrt(2)`` for ``x = standard_normal((count, 2))``,
giving independent real and imaginary parts of variance 1/2 each.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "StreamSeed",
    "CoefficientDraw",
    "derive_stream",
    "generator",
    "draw_complex_gaussians",
    "stream_fingerprint",
]

_UINT64_MAX = 2**64 - 1


def _label_tag(label: str) -> int:
    return int.from_bytes(hashlib.sha256(label.encode("utf-8")).digest()[:8], "little")


def _check_uint64(name: str, value: int) -> int:
    if not isinstance(value, (int, np.integer)):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if not 0 <= value <= _UINT64_MAX:
        raise ValueError(f"{name} must fit in an unsigned 64-bit integer, got {value}")
    return int(value)


@dataclass(frozen=True)
class StreamSeed:
    """Address of one deterministic stream."""

    master_seed: int
    label: str
    index: int = 0
    sub_index: int = 0

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(
            [self.master_seed, _label_tag(self.label), self.index, self.sub_index]
        )


@dataclass(frozen=True)
class CoefficientDraw:
    """A fixed vector of i.i.d. standard complex Gaussians plus its provenance."""

    values: np.ndarray
    seed: StreamSeed

    def __len__(self) -> int:
        return len(self.values)


def derive_stream(master_seed: int, label: str, index: int = 0, sub_index: int = 0) -> StreamSeed:
    """Derive the stream address for ``(master_seed, label, index, sub_index)``.

    Pure and stable across runs; distinct tuples give distinct streams with
    overwhelming probability.
    """
    if not label:
        raise ValueError("label must be a nonempty string")
    return StreamSeed(
        _check_uint64("master_seed", master_seed),
        label,
        _check_uint64("index", index),
        _check_uint64("sub_index", sub_index),
    )


def generator(seed: StreamSeed) -> np.random.Generator:
    """PCG64 generator owned by ``seed``; fresh on every call."""
    return np.random.Generator(np.random.PCG64(seed.seed_sequence()))


def stream_fingerprint(seed: StreamSeed) -> int:
    """128-bit digest of the derived internal state, for collision scans."""
    words = seed.seed_sequence().generate_state(2, np.uint64)
    return int(words[0]) | (int(words[1]) << 64)


def draw_complex_gaussians(seed: StreamSeed, count: int) -> CoefficientDraw:
    """Draw ``count`` standard complex Gaussians (Re and Im variance 1/2 each)."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    x = generator(seed).standard_normal((count, 2))
    values = (x[:, 0] + 1j * x[:, 1]) / math.sqrt(2.0)
    values.setflags(write=False)
    return CoefficientDraw(values=values, seed=seed)
