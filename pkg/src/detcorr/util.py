"""Small shared helpers: bit manipulation, index/bitstring conversion, seeded RNG streams.

Bit-ordering convention used throughout the package: qubit k occupies bit k of an
outcome index (qubit 0 is the least-significant bit).  Bitstrings in files and on
the command line are written qubit-0-leftmost, so index 6 == 0b110 on three qubits
is the string "011" (qubit0=0, qubit1=1, qubit2=1).
"""

from __future__ import annotations

import hashlib

import numpy as np


def popcount(values: np.ndarray) -> np.ndarray:
    """Number of set bits, elementwise, for a nonnegative integer array."""
    a = np.asarray(values)
    if hasattr(np, "bitwise_count"):
        return np.bitwise_count(a).astype(np.int64)
    # SWAR fallback for numpy < 2.0 (64-bit inputs)
    v = a.astype(np.uint64)
    v = v - ((v >> np.uint64(1)) & np.uint64(0x5555555555555555))
    v = (v & np.uint64(0x3333333333333333)) + ((v >> np.uint64(2)) & np.uint64(0x3333333333333333))
    v = (v + (v >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return ((v * np.uint64(0x0101010101010101)) >> np.uint64(56)).astype(np.int64)


def parity_signs(indices: np.ndarray, mask: int) -> np.ndarray:
    """(-1)**popcount(i & mask) for each index i, as a float array."""
    return 1.0 - 2.0 * (popcount(np.asarray(indices) & mask) & 1)


def index_to_bits(index: int, n: int) -> str:
    """Outcome index -> qubit-0-leftmost bitstring."""
    if not 0 <= index < (1 << n):
        raise ValueError(f"index {index} out of range for {n} qubits")
    return "".join(str((index >> k) & 1) for k in range(n))


def bits_to_index(bits: str) -> int:
    """Qubit-0-leftmost bitstring -> outcome index."""
    if not bits or any(c not in "01" for c in bits):
        raise ValueError(f"invalid bitstring {bits!r}")
    return sum(1 << k for k, c in enumerate(bits) if c == "1")


def derived_rng(seed: int, *labels: str) -> np.random.Generator:
    """Counter-based RNG stream keyed by (seed, labels).

    Streams for different labels are statistically independent, and the draw
    sequence for a given key does not depend on creation order, so tasks can
    run in any order (or in parallel) with bit-identical results.
    """
    keys = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for label in labels:
        digest = hashlib.sha256(label.encode("utf-8")).digest()
        keys.append(int.from_bytes(digest[:8], "big"))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(keys)))


def fmt17(x: float) -> str:
    """Format a float with 17 significant digits (round-trippable)."""
    return format(float(x), ".17g")
