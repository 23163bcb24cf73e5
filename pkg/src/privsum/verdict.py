from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any

PASS = "pass"
FAIL = "fail"
NOT_APPLICABLE = "n/a"
VACUOUS = "vacuous"


@dataclass(frozen=True)
class Verdict:
    """Outcome of one check, always carrying what was measured and what was required."""

    name: str
    status: str
    measured: Any = None
    required: Any = None
    subset: tuple[int, ...] | None = None
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == PASS

    @property
    def failed(self) -> bool:
        return self.status == FAIL

    def __bool__(self):
        return self.passed

    def gated(self, reason: str) -> Verdict:
        """Same measurement, marked not applicable because a hypothesis failed."""
        if self.status == VACUOUS:
            return self
        return Verdict(self.name, NOT_APPLICABLE, self.measured, self.required, self.subset, reason)


def judge(ok: bool) -> str:
    return PASS if ok else FAIL


def to_jsonable(value):
    """Numbers with 12 significant digits; exact rationals as "p/q" strings."""
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if abs(value) < 1e-12:
            return 0.0
        return float(f"{value:.12g}")
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if hasattr(value, "item"):
        return to_jsonable(value.item())
    raise TypeError(f"cannot serialize {type(value).__name__}")
