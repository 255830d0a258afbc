"""Stateless hash streams used for every per-event random draw.

Every draw the engine makes (sticky topic selection, top-list tie breaks,
winner picks) is a pure function of ``(seed, purpose, path...)``.  That makes
results independent of visit order, worker count and backend: any code path
that needs the same draw recomputes the same hash.

Bulk sampling (world generation, per-user visit lists) instead uses numpy
Generators derived from labelled SeedSequences, see :func:`derive_rng_stream`.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1
_PHI = 0x9E3779B97F4A7C15
_SEED_TWEAK = 0x243F6A8885A308D3

# Draw-purpose tags; the first path component of every hash.
STICKY = 1  # (STICKY, user, site, source_epoch)
TIE = 2     # (TIE, user, epoch, topic)
WINNER = 3  # (WINNER, user, epoch, site, space_index)


def fmix64(z: int) -> int:
    """64-bit avalanche mix (murmur3 finalizer)."""
    z = int(z) & MASK64
    z ^= z >> 33
    z = (z * 0xFF51AFD7ED558CCD) & MASK64
    z ^= z >> 33
    z = (z * 0xC4CEB9FE1A85EC53) & MASK64
    z ^= z >> 33
    return z


def hash_path(seed: int, *parts: int) -> int:
    """Hash a labelled path of non-negative integers into a uint64."""
    h = fmix64((int(seed) & MASK64) ^ _SEED_TWEAK)
    for p in parts:
        h = fmix64(((h + _PHI) & MASK64) ^ (int(p) & MASK64))
    return h


def uniform_index(h: int, n: int) -> int:
    """Map a hash to an index in [0, n). Modulo bias is negligible for small n."""
    return h % n


_U64 = np.uint64
_S33 = _U64(33)
_M1 = _U64(0xFF51AFD7ED558CCD)
_M2 = _U64(0xC4CEB9FE1A85EC53)
_PHI_U = _U64(_PHI)
_TWEAK_U = _U64(_SEED_TWEAK)


def _fmix64_arr(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> _S33)
    z = z * _M1
    z = z ^ (z >> _S33)
    z = z * _M2
    z = z ^ (z >> _S33)
    return z


def hash_path_arr(seed: int, *parts) -> np.ndarray:
    """Vectorized :func:`hash_path`; parts may be ints or integer arrays.

    Array parts broadcast against each other; the result matches the scalar
    function element-wise exactly.
    """
    shape = np.broadcast_shapes(*(np.shape(p) for p in parts))
    h = np.full(shape, fmix64(int(seed) ^ _SEED_TWEAK), dtype=np.uint64)
    for p in parts:
        p_arr = np.asarray(p, dtype=np.uint64)
        h = _fmix64_arr((h + _PHI_U) ^ p_arr)
    return h


def _encode_label(part) -> list[int]:
    if isinstance(part, (int, np.integer)):
        v = int(part) & MASK64
        return [v & 0xFFFFFFFF, v >> 32]
    if isinstance(part, str):
        digest = hashlib.sha256(part.encode("utf-8")).digest()
        return [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    raise TypeError(f"rng stream labels must be int or str, got {type(part).__name__}")


def derive_rng_stream(seed: int, *path) -> np.random.Generator:
    """Independent numpy Generator for a labelled path.

    Distinct ``(seed, path)`` pairs yield statistically independent streams;
    the same pair always yields the same stream, on any platform and under
    any worker layout.
    """
    words = [seed & 0xFFFFFFFF, (seed >> 32) & 0xFFFFFFFF]
    for part in path:
        words.extend(_encode_label(part))
    return np.random.default_rng(np.random.SeedSequence(words))
