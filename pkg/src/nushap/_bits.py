"""Small helpers for feature sets encoded as integer bitmasks (bit i = feature i)."""

from __future__ import annotations

from typing import Iterable


def to_mask(features: Iterable[int], n: int | None = None) -> int:
    mask = 0
    for i in features:
        i = int(i)
        if i < 0 or (n is not None and i >= n):
            raise IndexError(f"feature index {i} out of range")
        mask |= 1 << i
    return mask


def from_mask(mask: int) -> frozenset[int]:
    return frozenset(i for i in range(mask.bit_length()) if mask >> i & 1)


def members(mask: int) -> list[int]:
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def as_mask(features, n: int | None = None) -> int:
    """Accept either a bitmask int or an iterable of feature indices."""
    if isinstance(features, int):
        if features < 0 or (n is not None and features >> n):
            raise IndexError(f"bitmask {features:#x} out of range for {n} features")
        return features
    return to_mask(features, n)


def minimal_elements(masks: Iterable[int]) -> list[int]:
    """Subset-minimal members of a family of sets, sorted by (size, value)."""
    kept: list[int] = []
    for m in sorted(set(masks), key=lambda x: (popcount(x), x)):
        if not any(k & m == k for k in kept):
            kept.append(m)
    return kept
