"""Exact model and leakage auditor for private summation over F_2^n."""
from .bitfield import BitVec, concat, split, xor, xor_sum
from .entropy import BudgetExceeded, JointTable, cond_entropy, entropy, enumerate_table, mutual_info
from .protocol import (
    ProtocolConfig,
    ProtocolInstance,
    RateTuple,
    build_achievability,
    dump_custom,
    joint_law,
    load_custom,
    run,
)
from .auditor import AuditReport, LeakageProfile, audit, leakage, profile

__version__ = "0.1.0"
