"""Deliberately broken protocols, each expected to fail exactly one named check."""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

from .auditor import AuditReport, audit
from .protocol import ProtocolConfig, ProtocolInstance


def _xor_all(values):
    return reduce(lambda a, b: a ^ b, values)


@dataclass(frozen=True)
class Fixture:
    name: str
    designated: str
    instance: ProtocolInstance
    description: str


def plaintext(L: int = 3, n: int = 2, n1: int = 1, T: int = 1) -> ProtocolInstance:
    """Every user sends its sequence unmasked; correct, but leaks n(L-1) bits."""

    def key_map(u):
        return [u & 0 for _ in range(L)]

    return ProtocolInstance(
        ProtocolConfig(L, n, n1, T), 0, (0,) * L, (n,) * L, key_map,
        lambda l, k, s: s, _xor_all, name="plaintext",
    )


def key_reuse(L: int = 4, n: int = 1, T: int = 2) -> ProtocolInstance:
    """Users 1 and 2 share one pad; the others use additive pads among themselves.

    Keys still cancel, so decoding is correct, but X_1 + X_2 = S_1 + S_2.
    """
    if L < 3:
        raise ValueError("key reuse fixture needs L >= 3")
    mask = (1 << n) - 1
    rest = L - 2
    u_bits = n * (1 + max(rest - 1, 0))

    def key_map(u):
        shared = u & mask
        blocks = [(u >> (n * (i + 1))) & mask for i in range(rest - 1)]
        tail = blocks + [_xor_all(blocks)] if blocks else [u & 0]
        return [shared, shared, *tail]

    return ProtocolInstance(
        ProtocolConfig(L, n, 0, T), u_bits, (n,) * L, (n,) * L, key_map,
        lambda l, k, s: s ^ k, _xor_all, name="key-reuse",
    )


def truncated_key(L: int = 3, n: int = 2, T: int = 1) -> ProtocolInstance:
    """One-time pads whose cancelling key K_L loses its top bit, so decoding fails.

    Audited at the maximal budget (n1 = n) so that only correctness is at stake.
    """
    mask = (1 << n) - 1
    low = (1 << (n - 1)) - 1

    def key_map(u):
        blocks = [(u >> (n * i)) & mask for i in range(L - 1)]
        return blocks + [_xor_all(blocks) & low]

    return ProtocolInstance(
        ProtocolConfig(L, n, n, T), n * (L - 1), (n,) * L, (n,) * L, key_map,
        lambda l, k, s: s ^ k, _xor_all, name="truncated-key",
    )


def default_fixtures() -> list[Fixture]:
    return [
        Fixture("plaintext", "privacy", plaintext(), "X_l = S_l with no keys"),
        Fixture("key-reuse", "privacy", key_reuse(), "K_1 = K_2"),
        Fixture("truncated-key", "correctness", truncated_key(), "K_L missing its top bit"),
    ]


def check_fixture(fx: Fixture, **kw) -> tuple[AuditReport, bool]:
    """Audit a fixture; it behaves as expected iff its designated check is the only failure."""
    report = audit(fx.instance, **kw)
    return report, report.failed() == [fx.designated]
