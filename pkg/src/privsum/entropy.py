"""Exact joint distributions over a uniform seed space, and their entropies.

A :class:`JointTable` is built by pushing every point of a uniform seed space
``[0, 2**seed_bits)`` through a deterministic mapping. Probabilities are the
integer counts divided by ``2**seed_bits``; marginals are formed by adding
counts, so the only floating point step is the final log-weighted sum.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

TOL = 1e-9
DEFAULT_MAX_SEED_BITS = 24
_CHUNK_BITS = 16
_PACK_LIMIT = 62


class BudgetExceeded(ValueError):
    """Raised when an enumeration would exceed the seed-bit budget."""

    def __init__(self, seed_bits: int, budget: int):
        self.seed_bits = seed_bits
        self.budget = budget
        super().__init__(
            f"enumeration needs {seed_bits} seed bits, budget is {budget} "
            f"(raise --max-seed-bits to allow it)"
        )


def default_workers() -> int:
    """Worker count from ``PRIVSUM_THREADS`` (0 or unset means one per CPU)."""
    raw = os.environ.get("PRIVSUM_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"PRIVSUM_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError("PRIVSUM_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


@dataclass(frozen=True, eq=False)
class JointTable:
    """Joint law of named discrete variables, one row per distinct outcome.

    ``columns[i][r]`` is the value of variable ``schema[i]`` in row ``r`` and
    ``counts[r]`` the number of seeds producing that row.
    """

    schema: tuple[tuple[str, int], ...]
    columns: tuple[np.ndarray, ...]
    counts: np.ndarray
    seed_bits: int
    _index: dict = field(init=False, repr=False)
    _cache: dict = field(init=False, repr=False, default_factory=dict)

    def __post_init__(self):
        names = [name for name, _ in self.schema]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        object.__setattr__(self, "_index", {name: i for i, name in enumerate(names)})
        total = int(self.counts.sum())
        if total != 1 << self.seed_bits:
            raise ValueError(f"counts sum to {total}, expected 2**{self.seed_bits}")

    @property
    def vars(self) -> list[str]:
        return [name for name, _ in self.schema]

    @property
    def size(self) -> int:
        return 1 << self.seed_bits

    def width(self, name: str) -> int:
        return self.schema[self._lookup(name)][1]

    def column(self, name: str) -> np.ndarray:
        return self.columns[self._lookup(name)]

    @property
    def masses(self) -> dict[tuple[int, ...], int]:
        rows = zip(*(c.tolist() for c in self.columns)) if self.columns else iter([()])
        return dict(zip(rows, self.counts.tolist()))

    def marginal(self, names: Iterable[str]) -> dict[tuple[int, ...], int]:
        names = _as_names(names)
        out: dict[tuple[int, ...], int] = {}
        cols = [self.column(n).tolist() for n in names]
        for row, c in zip(zip(*cols) if cols else ((),) * len(self.counts), self.counts.tolist()):
            out[row] = out.get(row, 0) + c
        return out

    def _lookup(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}; table has {self.vars}") from None

    def _marginal_counts(self, names: frozenset[str]) -> np.ndarray:
        idx = sorted(self._lookup(n) for n in names)
        if not idx:
            return np.array([self.size], dtype=np.int64)
        cols = [self.columns[i] for i in idx]
        widths = [self.schema[i][1] for i in idx]
        if self._unit and sum(widths) <= _PACK_LIMIT:
            return _group_sizes(_pack(cols, widths))
        _, counts = _aggregate(cols, widths, self.counts)
        return counts

    @property
    def _unit(self) -> bool:
        """Every row has count one (the mapping is injective)."""
        flag = self._cache.get("unit")
        if flag is None:
            flag = self._cache["unit"] = bool((self.counts == 1).all())
        return flag


def _as_names(names) -> list[str]:
    if isinstance(names, str):
        return [names]
    return list(names)


def _pack(cols: Sequence[np.ndarray], widths: Sequence[int]) -> np.ndarray:
    key = np.zeros(len(cols[0]), dtype=np.int64)
    shift = 0
    for col, w in zip(cols, widths):
        if w:
            key |= col.astype(np.int64) << shift
        shift += w
    return key


def _group_sizes(keys: np.ndarray) -> np.ndarray:
    """Multiplicity of each distinct key."""
    if keys.size and int(keys.max()) < 1 << 24:
        sizes = np.bincount(keys)
        return sizes[sizes > 0]
    keys = np.sort(keys)
    starts = np.flatnonzero(np.concatenate(([True], keys[1:] != keys[:-1])))
    return np.diff(np.append(starts, keys.size))


def _aggregate(cols, widths, counts):
    """Group identical rows; returns (distinct row columns, integer counts)."""
    if sum(widths) <= _PACK_LIMIT:
        keys = _pack(cols, widths)
        order = np.argsort(keys, kind="stable")
        keys = keys[order]
        starts = np.flatnonzero(np.concatenate(([True], keys[1:] != keys[:-1])))
        merged = np.add.reduceat(counts[order], starts)
        uniq = keys[starts]
        out, shift = [], 0
        for w in widths:
            out.append((uniq >> shift) & ((1 << w) - 1))
            shift += w
        return out, merged
    rows = np.stack([c.astype(np.int64) for c in cols], axis=1)
    uniq, inverse = np.unique(rows, axis=0, return_inverse=True)
    merged = np.zeros(len(uniq), dtype=np.int64)
    np.add.at(merged, inverse.ravel(), counts)
    return [uniq[:, i] for i in range(uniq.shape[1])], merged


def _check_widths(cols, schema):
    for col, (name, w) in zip(cols, schema):
        if col.size and (col.min() < 0 or col.max() >> w):
            bad = int(col[(col < 0) | (col >> w != 0)][0])
            raise ValueError(f"variable {name!r} produced {bad}, which exceeds {w} bits")


def enumerate_table(
    seed_bits: int,
    mapping: Callable,
    schema: Sequence[tuple[str, int]],
    *,
    vectorized: bool = True,
    workers: int | None = None,
    max_seed_bits: int | None = None,
) -> JointTable:
    """Push every seed in ``[0, 2**seed_bits)`` through ``mapping``.

    With ``vectorized=True`` the mapping receives an int64 array of seeds and
    returns one array (or scalar) per schema entry; otherwise it receives a
    single int and returns a tuple. The seed range is split into chunks that
    may be evaluated by ``workers`` threads; partial counts are merged by
    integer addition, so the result does not depend on the worker count.
    """
    schema = tuple((str(name), int(w)) for name, w in schema)
    if seed_bits < 0:
        raise ValueError("seed_bits must be non-negative")
    if max_seed_bits is not None and seed_bits > max_seed_bits:
        raise BudgetExceeded(seed_bits, max_seed_bits)
    if workers is None:
        workers = default_workers()

    def evaluate(lo: int, hi: int):
        seeds = np.arange(lo, hi, dtype=np.int64)
        if vectorized:
            out = mapping(seeds)
        else:
            rows = [tuple(mapping(int(s))) for s in seeds.tolist()]
            out = [[r[i] for r in rows] for i in range(len(schema))] if rows else []
        if len(out) != len(schema):
            raise ValueError(f"mapping returned {len(out)} values for {len(schema)} variables")
        cols = [np.broadcast_to(np.asarray(c, dtype=np.int64), seeds.shape) for c in out]
        _check_widths(cols, schema)
        return _aggregate(cols, [w for _, w in schema], np.ones(len(seeds), dtype=np.int64))

    total = 1 << seed_bits
    step = 1 << _CHUNK_BITS
    bounds = [(lo, min(lo + step, total)) for lo in range(0, total, step)]
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: evaluate(*b), bounds))
    else:
        parts = [evaluate(*b) for b in bounds]

    if len(parts) == 1:
        cols, counts = parts[0]
    else:
        cols = [np.concatenate([p[0][i] for p in parts]) for i in range(len(schema))]
        counts = np.concatenate([p[1] for p in parts])
        cols, counts = _aggregate(cols, [w for _, w in schema], counts)
    cols = tuple(_narrow(c, w) for c, (_, w) in zip(cols, schema))
    return JointTable(schema, cols, counts.astype(np.int64), seed_bits)


def _narrow(col: np.ndarray, width: int) -> np.ndarray:
    for dt, bits in ((np.uint8, 8), (np.uint16, 16), (np.uint32, 32)):
        if width <= bits:
            return col.astype(dt)
    return col.astype(np.int64)


def _entropy_of_counts(counts: np.ndarray, seed_bits: int) -> float:
    # group equal counts so the float sum has few, order-independent terms
    vals, mult = np.unique(counts, return_counts=True)
    acc = math.fsum(int(m) * int(v) * math.log2(int(v)) for v, m in zip(vals, mult))
    return seed_bits - acc / (1 << seed_bits)


def entropy(t: JointTable, A) -> float:
    """H(A) in bits."""
    key = frozenset(_as_names(A))
    for name in key:
        t._lookup(name)
    cached = t._cache.get(key)
    if cached is None:
        cached = _entropy_of_counts(t._marginal_counts(key), t.seed_bits)
        t._cache[key] = cached
    return cached


def cond_entropy(t: JointTable, A, B) -> float:
    """H(A | B) in bits."""
    A, B = _as_names(A), _as_names(B)
    return entropy(t, A + B) - entropy(t, B)


def mutual_info(t: JointTable, A, B, C=()) -> float:
    """I(A; B | C) in bits."""
    A, B, C = _as_names(A), _as_names(B), _as_names(C)
    return entropy(t, A + C) + entropy(t, B + C) - entropy(t, A + B + C) - entropy(t, C)
