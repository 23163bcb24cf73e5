"""Secret-sharing schemes as deterministic maps over a uniform seed, and their audits.

A scheme maps ``(secret, randomness)`` to ``L`` shares. Every audit enumerates
the seed ``secret ++ randomness`` exactly and measures entropies on the result,
so recoverability, leakage and the ramp profile all go through one pathway.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import combinations
from typing import Callable, Sequence

from .bitfield import BitVec, xor_sum
from .entropy import (
    DEFAULT_MAX_SEED_BITS,
    TOL,
    BudgetExceeded,
    JointTable,
    cond_entropy,
    entropy,
    enumerate_table,
    mutual_info,
)
from .verdict import Verdict, judge


@dataclass(frozen=True)
class ShareScheme:
    """``share_map(secret, randomness)`` returns the ``L`` shares as ints.

    The map must also accept int64 numpy arrays (it is evaluated on whole
    blocks of seeds), which holds for any map written with ``&``, ``|``,
    ``^`` and shifts.
    """

    L: int
    n_s: int
    n_r: int
    share_widths: tuple[int, ...]
    share_map: Callable
    name: str = ""

    def __post_init__(self):
        if len(self.share_widths) != self.L:
            raise ValueError(f"{len(self.share_widths)} share widths for L={self.L}")

    @property
    def n_sh(self) -> int:
        return sum(self.share_widths)


def subsets(L: int, size: int) -> list[tuple[int, ...]]:
    """Index sets of ``[L]`` (1-based) of the given size, lexicographic."""
    return list(combinations(range(1, L + 1), size))


def additive_ramp(U: Sequence[BitVec]) -> list[BitVec]:
    """Shares of the additive (L-1, L-1, L) scheme: the blocks, then their xor-sum."""
    U = list(U)
    if not U:
        raise ValueError("need at least one block")
    widths = {b.len for b in U}
    if len(widths) != 1:
        raise ValueError(f"blocks have unequal lengths {sorted(widths)}")
    return U + [xor_sum(U)]


def additive_scheme(L: int, m: int) -> ShareScheme:
    """The additive scheme with the secret equal to ``L-1`` blocks of ``m`` bits, no randomness."""
    if L < 2:
        raise ValueError("additive scheme needs L >= 2")
    mask = (1 << m) - 1

    def share_map(secret, _r):
        blocks = [(secret >> (i * m)) & mask for i in range(L - 1)]
        return blocks + [reduce(lambda a, b: a ^ b, blocks)]

    return ShareScheme(L, (L - 1) * m, 0, (m,) * L, share_map, name=f"additive(L={L},m={m})")


def share_table(scheme: ShareScheme, *, max_seed_bits: int = DEFAULT_MAX_SEED_BITS, workers=None) -> JointTable:
    seed_bits = scheme.n_s + scheme.n_r
    if seed_bits > max_seed_bits:
        raise BudgetExceeded(seed_bits, max_seed_bits)
    smask = (1 << scheme.n_s) - 1

    def mapping(seeds):
        secret = seeds & smask
        shares = scheme.share_map(secret, seeds >> scheme.n_s)
        return (secret, *shares)

    schema = [("S", scheme.n_s)] + [(f"H_{l}", w) for l, w in enumerate(scheme.share_widths, 1)]
    return enumerate_table(seed_bits, mapping, schema, workers=workers)


@dataclass(frozen=True)
class LeakageProfileSS:
    """Normalized leakage ``I(S; H_T) / H(S)`` per collusion size.

    ``C[l]`` is the largest value over subsets of size ``l``; ``per_subset``
    keeps every value.
    """

    C: tuple[float, ...]
    per_subset: dict
    symmetric: bool

    @property
    def L(self) -> int:
        return len(self.C) - 1

    @property
    def monotone(self) -> bool:
        return all(a <= b + TOL for a, b in zip(self.C, self.C[1:]))


def profile_from_table(t: JointTable, secret: str, shares: Sequence[str]) -> LeakageProfileSS:
    h_secret = entropy(t, secret)
    if h_secret <= TOL:
        raise ValueError(f"H({secret}) = 0; normalized leakage is undefined")
    L = len(shares)
    per_subset, C, symmetric = {}, [], True
    for size in range(L + 1):
        vals = []
        for T in subsets(L, size):
            v = mutual_info(t, secret, [shares[i - 1] for i in T]) / h_secret
            per_subset[T] = v
            vals.append(v)
        C.append(max(vals))
        symmetric &= max(vals) - min(vals) <= TOL
    return LeakageProfileSS(tuple(C), per_subset, symmetric)


def leakage_profile(scheme: ShareScheme, *, max_seed_bits: int = DEFAULT_MAX_SEED_BITS) -> LeakageProfileSS:
    t = share_table(scheme, max_seed_bits=max_seed_bits)
    return profile_from_table(t, "S", [f"H_{l}" for l in range(1, scheme.L + 1)])


def check_recoverability(scheme: ShareScheme, t: int, *, table: JointTable | None = None) -> Verdict:
    """Any ``t`` shares determine the secret: max over |T| = t of H(S | H_T) is zero."""
    if not 1 <= t <= scheme.L:
        raise ValueError(f"t={t} outside [1, {scheme.L}]")
    table = table or share_table(scheme)
    worst, witness = -1.0, None
    for T in subsets(scheme.L, t):
        h = cond_entropy(table, "S", [f"H_{l}" for l in T])
        if h > worst + TOL:
            worst, witness = h, T
    return Verdict("recoverability", judge(worst <= TOL), worst, 0.0, witness)


def check_leakage(scheme: ShareScheme, z: int, alpha, *, table: JointTable | None = None) -> Verdict:
    """Any ``z`` or fewer shares leak at most ``alpha * H(S)`` about the secret."""
    table = table or share_table(scheme)
    h = entropy(table, "S")
    worst, witness = 0.0, ()
    for size in range(z + 1):
        for T in subsets(scheme.L, size):
            v = mutual_info(table, "S", [f"H_{l}" for l in T])
            if v > worst + TOL:
                worst, witness = v, T
    required = float(alpha) * h
    return Verdict("privacy_leakage", judge(worst <= required + TOL), worst, required, witness)


def ramp_shape(L: int, t: int, delta: int) -> list[Fraction]:
    """Normalized leakage of a (t, delta, L) ramp scheme for l = 0..L."""
    if not 1 <= delta <= t <= L:
        raise ValueError(f"need 1 <= delta <= t <= L, got delta={delta}, t={t}, L={L}")
    shape = []
    for l in range(L + 1):
        if l <= t - delta:
            shape.append(Fraction(0))
        elif l <= t:
            shape.append(Fraction(l - t + delta, delta))
        else:
            shape.append(Fraction(1))
    return shape


def check_ramp(profile, t: int, delta: int) -> Verdict:
    """Does the profile have the piecewise-linear ramp shape for ``(t, delta)``?

    ``profile`` is a :class:`LeakageProfileSS` or a plain sequence ``C_0..C_L``.
    """
    if isinstance(profile, LeakageProfileSS):
        C, symmetric = list(profile.C), profile.symmetric
    else:
        C, symmetric = [float(c) for c in profile], True
    shape = ramp_shape(len(C) - 1, t, delta)
    worst = max(abs(c - float(s)) for c, s in zip(C, shape))
    ok = symmetric and worst <= TOL
    detail = "" if symmetric else "leakage differs between subsets of equal size"
    return Verdict(
        f"ramp(t={t},delta={delta})",
        judge(ok),
        [float(c) for c in C],
        [str(s) for s in shape],
        detail=detail,
    )
