"""Fixed-length bit vectors over F_2^n.

Position 0 is the least significant bit of the stored word. Addition and
subtraction in F_2^n are both xor.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable

MAX_BITS = 32


@dataclass(frozen=True)
class BitVec:
    """An element of F_2^len; bit i of ``bits`` is the coefficient of position i."""

    len: int
    bits: int = 0

    def __post_init__(self):
        if not 0 <= self.len <= MAX_BITS:
            raise ValueError(f"BitVec length must be in [0, {MAX_BITS}], got {self.len}")
        if self.bits < 0 or self.bits >> self.len:
            raise ValueError(f"value {self.bits} does not fit in {self.len} bits")

    @classmethod
    def zero(cls, n: int) -> BitVec:
        return cls(n, 0)

    @classmethod
    def from_bits(cls, seq: Iterable[int]) -> BitVec:
        """Build from a bit0-first sequence of 0/1."""
        seq = list(seq)
        value = 0
        for i, b in enumerate(seq):
            if b not in (0, 1):
                raise ValueError(f"bit {i} is {b!r}, expected 0 or 1")
            value |= b << i
        return cls(len(seq), value)

    @classmethod
    def from_str(cls, s: str) -> BitVec:
        return cls.from_bits(int(c) for c in s)

    def bit(self, i: int) -> int:
        if not 0 <= i < self.len:
            raise IndexError(i)
        return (self.bits >> i) & 1

    def to_bits(self) -> list[int]:
        return [(self.bits >> i) & 1 for i in range(self.len)]

    def __int__(self):
        return self.bits

    def __xor__(self, other: BitVec) -> BitVec:
        return xor(self, other)

    def __str__(self):
        return "".join(str(b) for b in self.to_bits())


def xor(a: BitVec, b: BitVec) -> BitVec:
    if a.len != b.len:
        raise ValueError(f"length mismatch: {a.len} vs {b.len}")
    return BitVec(a.len, a.bits ^ b.bits)


def xor_sum(vs: Iterable[BitVec]) -> BitVec:
    vs = list(vs)
    if not vs:
        raise ValueError("xor_sum of an empty list")
    return reduce(xor, vs)


def split(v: BitVec, n1: int) -> tuple[BitVec, BitVec]:
    """Split into the low ``n1`` positions and the remaining high positions."""
    if not 0 <= n1 <= v.len:
        raise ValueError(f"split point {n1} outside [0, {v.len}]")
    low = v.bits & ((1 << n1) - 1)
    return BitVec(n1, low), BitVec(v.len - n1, v.bits >> n1)


def concat(a: BitVec, b: BitVec) -> BitVec:
    """``a`` occupies the low positions, ``b`` the high ones."""
    return BitVec(a.len + b.len, a.bits | (b.bits << a.len))
