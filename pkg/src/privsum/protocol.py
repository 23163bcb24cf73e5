"""Private-sum computation protocols as deterministic maps.

A protocol is three maps: ``key_map`` turns the global randomness ``U`` into
per-user keys ``K_l``, ``enc(l, K_l, S_l)`` produces user ``l``'s public
message ``X_l``, and ``dec`` recovers the mod-2 sum from all messages. Users
are 0-indexed in these callables and 1-indexed in variable names (``S_1``,
``X_1``, ...).

All maps work on plain ints and on int64 numpy arrays alike, which is what
lets :func:`joint_law` evaluate a whole block of seeds at once.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .bitfield import MAX_BITS, BitVec
from .entropy import DEFAULT_MAX_SEED_BITS, BudgetExceeded, JointTable, enumerate_table


def _xor_all(values):
    return reduce(lambda a, b: a ^ b, values)


@dataclass(frozen=True)
class ProtocolConfig:
    """``L`` users, ``n``-bit sequences, ``n1`` clear bits (so alpha = n1/n), collusion bound ``T``."""

    L: int
    n: int
    n1: int
    T: int = 0

    def __post_init__(self):
        if self.L < 2:
            raise ValueError(f"need at least 2 users, got L={self.L}")
        if not 1 <= self.n <= MAX_BITS:
            raise ValueError(f"n must be in [1, {MAX_BITS}], got {self.n}")
        if not 0 <= self.n1 <= self.n:
            raise ValueError(f"n1 must be in [0, n={self.n}], got {self.n1}")
        if not 0 <= self.T <= self.L - 2:
            raise ValueError(f"T must be in [0, L-2={self.L - 2}], got {self.T}")

    @property
    def n2(self) -> int:
        return self.n - self.n1

    @property
    def alpha(self) -> Fraction:
        return Fraction(self.n1, self.n)

    @property
    def delta(self) -> Fraction:
        return self.alpha * (self.L - 1)

    @property
    def leak_cap_bits(self) -> int:
        """n * alpha * (L - 1), the allowed leakage in bits."""
        return self.n1 * (self.L - 1)


@dataclass(frozen=True)
class RateTuple:
    R_X: tuple[Fraction, ...]
    R_K: tuple[Fraction, ...]
    R_K_sum: Fraction
    R_U: Fraction

    def __post_init__(self):
        if sum(self.R_K, Fraction(0)) != self.R_K_sum:
            raise ValueError("R_K_sum does not match the per-user key rates")
        if min((*self.R_X, *self.R_K, self.R_U)) < 0:
            raise ValueError("rates must be non-negative")

    @classmethod
    def of(cls, R_X, R_K, R_U) -> RateTuple:
        R_X = tuple(Fraction(r) for r in R_X)
        R_K = tuple(Fraction(r) for r in R_K)
        return cls(R_X, R_K, sum(R_K, Fraction(0)), Fraction(R_U))


def optimal_rates(L: int, alpha: Fraction) -> RateTuple:
    """Smallest achievable rates at leakage parameter ``alpha``."""
    alpha = Fraction(alpha)
    return RateTuple.of([1] * L, [1 - alpha] * L, (1 - alpha) * (L - 1))


@dataclass(frozen=True)
class ProtocolInstance:
    config: ProtocolConfig
    u_bits: int
    key_bits: tuple[int, ...]
    msg_bits: tuple[int, ...]
    key_map: Callable
    enc: Callable
    dec: Callable
    name: str = ""

    def __post_init__(self):
        L = self.config.L
        if len(self.key_bits) != L or len(self.msg_bits) != L:
            raise ValueError(f"need {L} key and message widths")
        for w in (self.u_bits, *self.key_bits, *self.msg_bits):
            if not 0 <= w <= MAX_BITS:
                raise ValueError(f"width {w} outside [0, {MAX_BITS}]")

    @property
    def L(self) -> int:
        return self.config.L

    @property
    def n(self) -> int:
        return self.config.n

    @property
    def seed_bits(self) -> int:
        return self.n * self.L + self.u_bits

    @property
    def rates(self) -> RateTuple:
        n = self.n
        return RateTuple.of(
            [Fraction(b, n) for b in self.msg_bits],
            [Fraction(b, n) for b in self.key_bits],
            Fraction(self.u_bits, n),
        )

    @property
    def is_optimal(self) -> bool:
        return self.rates == optimal_rates(self.L, self.config.alpha)

    def with_config(self, config: ProtocolConfig) -> ProtocolInstance:
        if (config.L, config.n) != (self.L, self.n):
            raise ValueError("config must keep L and n")
        return ProtocolInstance(config, self.u_bits, self.key_bits, self.msg_bits,
                                self.key_map, self.enc, self.dec, self.name)


def build_achievability(config: ProtocolConfig) -> ProtocolInstance:
    """Send the low ``n1`` bits in the clear and pad the rest with keys that xor to zero."""
    L, n1, n2 = config.L, config.n1, config.n2
    clear_mask = (1 << n1) - 1
    block_mask = (1 << n2) - 1

    def key_map(u):
        blocks = [(u >> (i * n2)) & block_mask for i in range(L - 1)]
        return blocks + [_xor_all(blocks)]

    def enc(l, k, s):
        return (s & clear_mask) | ((k ^ (s >> n1)) << n1)

    def dec(xs):
        clear = _xor_all([x & clear_mask for x in xs])
        padded = _xor_all([x >> n1 for x in xs])
        return clear | (padded << n1)

    return ProtocolInstance(
        config, (L - 1) * n2, (n2,) * L, (config.n,) * L, key_map, enc, dec,
        name=f"time-sharing(L={L},n={config.n},n1={n1})",
    )


def run(inst: ProtocolInstance, S: Sequence[BitVec], U: BitVec):
    """One execution: returns ``(K, X, sigma_hat)`` as BitVecs."""
    if len(S) != inst.L:
        raise ValueError(f"expected {inst.L} sequences, got {len(S)}")
    for l, s in enumerate(S, 1):
        if s.len != inst.n:
            raise ValueError(f"S_{l} has {s.len} bits, expected {inst.n}")
    if U.len != inst.u_bits:
        raise ValueError(f"U has {U.len} bits, expected {inst.u_bits}")
    raw_k = inst.key_map(U.bits)
    K = [BitVec(w, int(k)) for w, k in zip(inst.key_bits, raw_k)]
    X = [BitVec(w, int(inst.enc(l, k.bits, s.bits))) for l, (w, k, s) in enumerate(zip(inst.msg_bits, K, S))]
    sigma_hat = BitVec(inst.n, int(inst.dec([x.bits for x in X])))
    return K, X, sigma_hat


def variable_schema(inst: ProtocolInstance) -> list[tuple[str, int]]:
    L, n = inst.L, inst.n
    return (
        [(f"S_{l}", n) for l in range(1, L + 1)]
        + [("U", inst.u_bits)]
        + [(f"K_{l}", w) for l, w in enumerate(inst.key_bits, 1)]
        + [(f"X_{l}", w) for l, w in enumerate(inst.msg_bits, 1)]
        + [("Sigma", n), ("Sigma_hat", n)]
    )


def joint_law(inst: ProtocolInstance, *, max_seed_bits: int = DEFAULT_MAX_SEED_BITS,
              workers: int | None = None) -> JointTable:
    """Exact joint law of (S, U, K, X, Sigma, Sigma_hat) with S_1 in the lowest seed bits."""
    if inst.seed_bits > max_seed_bits:
        raise BudgetExceeded(inst.seed_bits, max_seed_bits)
    L, n = inst.L, inst.n
    smask = (1 << n) - 1

    def mapping(seeds):
        S = [(seeds >> (i * n)) & smask for i in range(L)]
        U = seeds >> (n * L)
        K = list(inst.key_map(U))
        X = [inst.enc(l, K[l], S[l]) for l in range(L)]
        return (*S, U, *K, *X, _xor_all(S), inst.dec(X))

    return enumerate_table(inst.seed_bits, mapping, variable_schema(inst), workers=workers)


class CustomProtocolError(ValueError):
    pass


def _int_table(value, shape: tuple[int, ...], what: str) -> np.ndarray:
    try:
        arr = np.array(value, dtype=object)
    except Exception as exc:  # ragged nesting
        raise CustomProtocolError(f"{what}: malformed table ({exc})") from None
    if arr.shape != shape:
        raise CustomProtocolError(f"{what}: expected shape {shape}, got {arr.shape}")
    flat = arr.ravel().tolist()
    if not all(isinstance(v, int) and not isinstance(v, bool) for v in flat):
        raise CustomProtocolError(f"{what}: entries must be integers")
    return np.array(flat, dtype=np.int64).reshape(shape)


def _check_fits(arr: np.ndarray, width: int, what: str):
    if arr.size and (arr.min() < 0 or arr.max() >> width):
        raise CustomProtocolError(f"{what}: value {int(arr.max())} does not fit in {width} bits")


def _log2_exact(count: int, what: str) -> int:
    if count < 1 or count & (count - 1):
        raise CustomProtocolError(f"{what}: length {count} is not a power of two")
    return count.bit_length() - 1


def load_custom(doc, *, n1: int | None = None, T: int | None = None) -> ProtocolInstance:
    """Build an instance from truth tables (a dict, JSON text, or a path to a JSON file).

    ``n1`` and ``T`` set the privacy budget the instance is audited against;
    they default to the document's optional ``n1``/``T`` fields, then to 0.
    """
    if isinstance(doc, Path) or (isinstance(doc, str) and not doc.lstrip().startswith("{")):
        doc = json.loads(Path(doc).read_text())
    elif isinstance(doc, str):
        doc = json.loads(doc)
    if not isinstance(doc, dict):
        raise CustomProtocolError("protocol document must be a JSON object")
    for key in ("L", "n", "R_U_bits", "key_map", "enc", "dec"):
        if key not in doc:
            raise CustomProtocolError(f"missing field {key!r}")
    L, n, u_bits = doc["L"], doc["n"], doc["R_U_bits"]
    if not all(isinstance(v, int) for v in (L, n, u_bits)):
        raise CustomProtocolError("L, n and R_U_bits must be integers")
    try:
        config = ProtocolConfig(L, n, doc.get("n1", 0) if n1 is None else n1, doc.get("T", 0) if T is None else T)
    except ValueError as exc:
        raise CustomProtocolError(str(exc)) from None
    if not 0 <= u_bits <= MAX_BITS:
        raise CustomProtocolError(f"R_U_bits must be in [0, {MAX_BITS}]")

    enc_doc = doc["enc"]
    if not isinstance(enc_doc, list) or len(enc_doc) != L:
        raise CustomProtocolError(f"enc must list one table per user ({L})")
    key_bits = doc.get("key_bits")
    if key_bits is None:
        key_bits = [_log2_exact(len(t) if isinstance(t, list) else 0, f"enc[{l}]") for l, t in enumerate(enc_doc)]
    msg_bits = doc.get("X_bits", [n] * L)
    if len(key_bits) != L or len(msg_bits) != L:
        raise CustomProtocolError("key_bits and X_bits need one entry per user")
    if sum(msg_bits) > 24:
        raise CustomProtocolError("decoder table too large (sum of X_bits > 24)")

    keys = _int_table(doc["key_map"], (1 << u_bits, L), "key_map")
    for l, w in enumerate(key_bits):
        _check_fits(keys[:, l], w, f"key_map share {l + 1}")
    encs = []
    for l, (kb, xb) in enumerate(zip(key_bits, msg_bits)):
        table = _int_table(enc_doc[l], (1 << kb, 1 << n), f"enc[{l}]")
        _check_fits(table, xb, f"enc[{l}]")
        encs.append(table)
    dec_table = _int_table(doc["dec"], (1 << sum(msg_bits),), "dec")
    _check_fits(dec_table, n, "dec")

    offsets = np.cumsum([0, *msg_bits[:-1]]).tolist()

    def key_map(u):
        return [keys[u, l] for l in range(L)]

    def enc(l, k, s):
        return encs[l][k, s]

    def dec(xs):
        return dec_table[_xor_all([x << off for x, off in zip(xs, offsets)])]

    try:
        return ProtocolInstance(config, u_bits, tuple(key_bits), tuple(msg_bits), key_map, enc, dec,
                                name=str(doc.get("name", "custom")))
    except ValueError as exc:
        raise CustomProtocolError(str(exc)) from None


def dump_custom(inst: ProtocolInstance) -> dict:
    """Materialize an instance's maps as truth tables in the :func:`load_custom` format."""
    L, n = inst.L, inst.n
    if sum(inst.msg_bits) > 24:
        raise ValueError("decoder table too large to materialize")
    u = np.arange(1 << inst.u_bits, dtype=np.int64)
    K = [np.broadcast_to(np.asarray(k, dtype=np.int64), u.shape) for k in inst.key_map(u)]
    key_map = np.stack(K, axis=1).tolist()
    s = np.arange(1 << n, dtype=np.int64)
    enc = []
    for l, kb in enumerate(inst.key_bits):
        k = np.arange(1 << kb, dtype=np.int64)[:, None]
        enc.append(np.broadcast_to(np.asarray(inst.enc(l, k, s[None, :]), dtype=np.int64),
                                   (1 << kb, 1 << n)).tolist())
    idx = np.arange(1 << sum(inst.msg_bits), dtype=np.int64)
    xs, off = [], 0
    for w in inst.msg_bits:
        xs.append((idx >> off) & ((1 << w) - 1))
        off += w
    dec = np.broadcast_to(np.asarray(inst.dec(xs), dtype=np.int64), idx.shape).tolist()
    return {
        "name": inst.name,
        "L": L,
        "n": n,
        "n1": inst.config.n1,
        "T": inst.config.T,
        "R_U_bits": inst.u_bits,
        "key_bits": list(inst.key_bits),
        "X_bits": list(inst.msg_bits),
        "key_map": key_map,
        "enc": enc,
        "dec": dec,
    }
