"""Leakage measurement and bound/identity checks on exact protocol joint laws.

Every quantity is an exact entropy of a :class:`~privsum.entropy.JointTable`
produced by :func:`~privsum.protocol.joint_law`. Leakages are kept in bits;
rate comparisons are exact rationals.

Converse-type checks (rate bounds, the encoder-leakage and randomness
lemmas, ramp necessity) are consequences of correctness and privacy, so
:func:`audit` marks them not applicable when those hypotheses fail, while
still recording what was measured.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from . import secret_sharing
from .entropy import DEFAULT_MAX_SEED_BITS, TOL, JointTable, cond_entropy, entropy, mutual_info
from .protocol import ProtocolConfig, ProtocolInstance, RateTuple, joint_law, optimal_rates
from .verdict import FAIL, NOT_APPLICABLE, PASS, VACUOUS, Verdict, judge, to_jsonable

CHECK_ORDER = (
    "correctness", "privacy", "property1", "property2", "property3",
    "theorem1", "theorem2", "lemma1", "lemma2", "lemma3", "lemma4", "lemma5", "lemma6", "ramp",
)


def _user_count(t: JointTable) -> int:
    L = 0
    while f"S_{L + 1}" in t._index:
        L += 1
    if L < 2:
        raise KeyError("table does not contain user variables S_1, S_2, ...")
    return L


def _v(prefix: str, users) -> list[str]:
    return [f"{prefix}_{l}" for l in users]


def all_subsets(L: int) -> list[tuple[int, ...]]:
    """Every subset of [L], by size then lexicographically."""
    return [T for size in range(L + 1) for T in combinations(range(1, L + 1), size)]


def subset_label(T) -> str:
    return "{" + ",".join(str(i) for i in T) + "}"


def leakage(joint: JointTable, T_set) -> float:
    """I(S_[L]; X_[L] | Sigma, S_T, K_T) in bits, for colluding users ``T_set``."""
    L = _user_count(joint)
    T = sorted(T_set)
    if any(not 1 <= i <= L for i in T):
        raise ValueError(f"colluding set {T} is not a subset of [1, {L}]")
    users = range(1, L + 1)
    return mutual_info(joint, _v("S", users), _v("X", users), ["Sigma", *_v("S", T), *_v("K", T)])


def check_correctness(joint: JointTable) -> Verdict:
    """The decoder output equals the true sum on every seed."""
    wrong = joint.column("Sigma") != joint.column("Sigma_hat")
    bad = int(joint.counts[wrong].sum())
    return Verdict("correctness", judge(bad == 0), bad, 0, detail=f"{bad} of {joint.size} seeds decode wrongly")


@dataclass(frozen=True)
class LeakageProfile:
    """Leakage per colluding set; ``C[l]`` is the largest value over sets of size ``l``."""

    C: tuple[float, ...]
    per_subset: dict
    delta: float | None
    symmetric: bool

    @property
    def L(self) -> int:
        return len(self.C) - 1

    @property
    def monotone(self) -> bool:
        return all(a >= b - TOL for a, b in zip(self.C, self.C[1:]))

    def spread(self, size: int) -> float:
        vals = [v for T, v in self.per_subset.items() if len(T) == size]
        return max(vals) - min(vals)


def profile(joint: JointTable, L: int | None = None) -> LeakageProfile:
    L = L or _user_count(joint)
    per_subset = {T: leakage(joint, T) for T in all_subsets(L)}
    C = tuple(max(v for T, v in per_subset.items() if len(T) == size) for size in range(L + 1))

    # adding any one user to any set of at most L-2 colluders lowers leakage by the same amount
    diffs = [
        per_subset[T] - per_subset[tuple(sorted(T + (j,)))]
        for T in per_subset if len(T) <= L - 2
        for j in range(1, L + 1) if j not in T
    ]
    symmetric = max(diffs) - min(diffs) <= TOL
    return LeakageProfile(C, per_subset, diffs[0] if symmetric else None, symmetric)


def check_privacy(prof: LeakageProfile, config: ProtocolConfig) -> Verdict:
    """Largest leakage over colluding sets of size at most T against n*alpha*(L-1)."""
    worst, witness = -1.0, ()
    for T, v in prof.per_subset.items():
        if len(T) <= config.T and v > worst + TOL:
            worst, witness = v, T
    required = config.leak_cap_bits
    return Verdict("privacy", judge(worst <= required + TOL), worst, required, witness)


def check_properties(prof: LeakageProfile, config: ProtocolConfig) -> list[Verdict]:
    L, n1 = prof.L, config.n1
    spread = max(prof.spread(size) for size in range(L + 1))
    out = [
        Verdict("property1", judge(spread <= TOL), spread, 0.0, detail="max spread within a collusion size"),
        Verdict("property2", judge(prof.monotone), list(prof.C), "nonincreasing"),
        Verdict("property3", judge(prof.C[0] <= n1 * (L - 1) + TOL), prof.C[0], n1 * (L - 1), detail="C_0"),
    ]
    if prof.delta is not None:
        out.append(Verdict("property3", judge(prof.delta <= n1 + TOL), prof.delta, n1, detail="Delta"))
    if not prof.symmetric:
        out = [v.gated("leakage symmetry does not hold") for v in out]
    return out


def check_theorem1(rates: RateTuple, alpha, L: int) -> list[Verdict]:
    alpha = Fraction(alpha)
    return [
        Verdict("theorem1", judge(min(rates.R_X) >= 1), list(rates.R_X), Fraction(1), detail="R_X[l] >= 1"),
        Verdict("theorem1", judge(rates.R_K_sum >= (1 - alpha) * L), rates.R_K_sum, (1 - alpha) * L,
                detail="sum R_K >= (1-alpha)L"),
        Verdict("theorem1", judge(rates.R_U >= (1 - alpha) * (L - 1)), rates.R_U, (1 - alpha) * (L - 1),
                detail="R_U >= (1-alpha)(L-1)"),
    ]


def check_theorem2(rates: RateTuple, alpha, prof: LeakageProfile) -> list[Verdict]:
    alpha = Fraction(alpha)
    out = [
        Verdict("theorem2", judge(r >= 1 - alpha), r, 1 - alpha, (l,), detail="R_K[l] >= 1-alpha")
        for l, r in enumerate(rates.R_K, 1)
    ]
    if not prof.symmetric:
        out = [v.gated("leakage symmetry does not hold") for v in out]
    return out


def _chain_set(L: int, l: int, t: int) -> tuple[int, ...]:
    """The colluding set used for user ``l`` at step ``t``: the first t users other than l."""
    if t == L:
        return tuple(range(1, L + 1))
    if t < l:
        return tuple(range(1, t + 1))
    return tuple(i for i in range(1, t + 2) if i != l)


def _equal(name, measured, required, T=None, detail="") -> Verdict:
    return Verdict(name, judge(abs(measured - required) <= TOL), measured, required, T, detail)


def _at_least(name, measured, required, T=None, detail="") -> Verdict:
    return Verdict(name, judge(measured >= required - TOL), measured, required, T, detail)


def identity_suite(joint: JointTable, config: ProtocolConfig, rates: RateTuple | None = None) -> list[Verdict]:
    """Numerical checks of the leakage characterization and randomness lemmas.

    The global-randomness identity is only asserted when ``rates`` are given
    and equal the optimal rates exactly.
    """
    L, n, n1, n2 = config.L, config.n, config.n1, config.n2
    users = tuple(range(1, L + 1))
    X_all, S_all = _v("X", users), _v("S", users)
    leak = {T: leakage(joint, T) for T in all_subsets(L)}
    out: list[Verdict] = []

    for T in all_subsets(L):
        rest = [i for i in users if i not in T]
        h = cond_entropy(joint, _v("S", rest), X_all + _v("K", T) + _v("S", T))
        out.append(_equal("lemma1", leak[T], n * (L - len(T) - (T != users)) - h, T))

    for l in users:
        for t in range(L):
            Tt = _chain_set(L, l, t)
            KT, ST = _v("K", Tt), _v("S", Tt)
            rhs = (cond_entropy(joint, [f"K_{l}", f"S_{l}"], KT + ST + X_all)
                   - cond_entropy(joint, f"K_{l}", KT + S_all + X_all)
                   - n * (t != L - 1))
            lhs = leak[tuple(sorted(Tt + (l,)))] - leak[Tt]
            out.append(_equal("lemma2", lhs, rhs, Tt, detail=f"l={l}, t={t}"))

    encoder_leak = sum(mutual_info(joint, f"S_{l}", f"X_{l}") for l in users)
    out.append(Verdict("lemma3", judge(encoder_leak <= n1 * L + TOL), encoder_leak, n1 * L,
                       detail="sum_l I(S_l; X_l) <= alpha n L"))

    for T in all_subsets(L):
        out.append(_at_least("lemma4", entropy(joint, _v("X", T)), n * len(T), T))
    for T in all_subsets(L):
        out.append(_at_least("lemma5", entropy(joint, _v("K", T)), n2 * (len(T) - (T == users)), T))

    optimal = rates is not None and rates == optimal_rates(L, config.alpha)
    for T in all_subsets(L):
        if T == users:
            continue
        v = _equal("lemma6", cond_entropy(joint, "U", _v("K", T)), n2 * (L - len(T) - 1), T)
        out.append(v if optimal else v.gated("instance rates are not optimal"))
    return out


def ramp_necessity(joint: JointTable, config: ProtocolConfig, optimal: bool = True) -> Verdict:
    """Keys of an optimal protocol must be shares of an (L-1, L-1, L) ramp scheme with secret U."""
    L = config.L
    expected = [Fraction(size, L - 1) if size < L else Fraction(1) for size in range(L + 1)]
    if entropy(joint, "U") <= TOL:
        return Verdict("ramp", VACUOUS, None, [str(e) for e in expected], detail="H(U) = 0")
    prof = secret_sharing.profile_from_table(joint, "U", _v("K", range(1, L + 1)))
    direct = max(abs(v - float(expected[len(T)])) for T, v in prof.per_subset.items())
    shaped = secret_sharing.check_ramp(prof, L - 1, L - 1)
    v = Verdict("ramp", judge(direct <= TOL and shaped.passed), list(prof.C), [str(e) for e in expected],
                detail=f"max deviation {direct:.3g}; shape check {shaped.status}")
    return v if optimal else v.gated("instance rates are not optimal")


def _aggregate(verdicts: list[Verdict]) -> str:
    statuses = {v.status for v in verdicts}
    if FAIL in statuses:
        return FAIL
    if PASS in statuses:
        return PASS
    if VACUOUS in statuses:
        return VACUOUS
    return NOT_APPLICABLE


@dataclass
class AuditReport:
    config: ProtocolConfig
    name: str
    rates: RateTuple
    optimal: bool
    correctness: Verdict
    profile: LeakageProfile
    privacy: Verdict
    properties: list[Verdict]
    theorem1: list[Verdict]
    theorem2: list[Verdict]
    identities: list[Verdict]
    ramp: Verdict
    seed_bits: int = 0

    def verdicts(self) -> dict[str, list[Verdict]]:
        groups = {name: [] for name in CHECK_ORDER}
        for v in [self.correctness, self.privacy, *self.properties, *self.theorem1,
                  *self.theorem2, *self.identities, self.ramp]:
            groups[v.name].append(v)
        return groups

    def checks(self) -> dict[str, str]:
        return {name: _aggregate(vs) for name, vs in self.verdicts().items()}

    def failed(self) -> list[str]:
        return [name for name, status in self.checks().items() if status == FAIL]

    @property
    def ok(self) -> bool:
        return not self.failed()

    @property
    def max_leak_bits(self) -> float:
        return self.privacy.measured

    def to_dict(self) -> dict:
        c = self.config
        prof = self.profile
        return to_jsonable({
            "name": self.name,
            "config": {"L": c.L, "n": c.n, "n1": c.n1, "T": c.T, "alpha": c.alpha, "delta": c.delta,
                       "seed_bits": self.seed_bits},
            "rates": {"R_X": list(self.rates.R_X), "R_K": list(self.rates.R_K),
                      "R_K_sum": self.rates.R_K_sum, "R_U": self.rates.R_U, "optimal": self.optimal},
            "correctness": _verdict_dict(self.correctness),
            "leakage_per_subset": {subset_label(T): v for T, v in prof.per_subset.items()},
            "profile": {"C": list(prof.C), "delta": prof.delta, "symmetric": prof.symmetric},
            "privacy": {"measured": self.privacy.measured, "required": self.privacy.required,
                        "pass": self.privacy.passed, "witness_subset": list(self.privacy.subset or ())},
            "properties": [_verdict_dict(v) for v in self.properties],
            "theorem1": [_verdict_dict(v) for v in self.theorem1],
            "theorem2": [_verdict_dict(v) for v in self.theorem2],
            "identities": [_verdict_dict(v) for v in self.identities],
            "ramp": {"profile": self.ramp.measured, "required": self.ramp.required,
                     "status": self.ramp.status, "pass": self.ramp.passed, "detail": self.ramp.detail},
            "checks": self.checks(),
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _verdict_dict(v: Verdict) -> dict:
    d = {"name": v.name, "status": v.status, "pass": v.passed, "measured": v.measured, "required": v.required}
    if v.subset is not None:
        d["subset"] = list(v.subset)
    if v.detail:
        d["detail"] = v.detail
    return d


def audit(inst: ProtocolInstance, *, max_seed_bits: int = DEFAULT_MAX_SEED_BITS,
          workers: int | None = None, joint: JointTable | None = None) -> AuditReport:
    config, rates = inst.config, inst.rates
    joint = joint if joint is not None else joint_law(inst, max_seed_bits=max_seed_bits, workers=workers)
    correct = check_correctness(joint)
    prof = profile(joint, config.L)
    privacy = check_privacy(prof, config)
    optimal = inst.is_optimal

    properties = check_properties(prof, config)
    thm1 = check_theorem1(rates, config.alpha, config.L)
    thm2 = check_theorem2(rates, config.alpha, prof)
    identities = identity_suite(joint, config, rates)
    ramp = ramp_necessity(joint, config, optimal)

    def gate(vs, *conds):
        for ok, reason in conds:
            if not ok:
                return [v.gated(reason) for v in vs]
        return vs

    is_correct = (correct.passed, "protocol is not correct")
    is_private = (privacy.passed, "protocol is not private")
    is_symmetric = (prof.symmetric, "leakage symmetry does not hold")
    # symmetry gating is already applied inside check_properties
    properties = [gate([v], is_private)[0] if v.name == "property3" else v for v in properties]
    thm1 = gate(thm1, is_correct, is_private)
    thm2 = gate(thm2, is_correct, is_private, is_symmetric)
    gated_ids = []
    for v in identities:
        if v.name in ("lemma1", "lemma2", "lemma4"):
            v = gate([v], is_correct)[0]
        elif v.name == "lemma3":
            v = gate([v], is_correct, is_private)[0]
        else:
            v = gate([v], is_correct, is_private, is_symmetric)[0]
        gated_ids.append(v)
    ramp = gate([ramp], is_correct, is_private, is_symmetric)[0]

    return AuditReport(config, inst.name, rates, optimal, correct, prof, privacy, properties,
                       thm1, thm2, gated_ids, ramp, seed_bits=joint.seed_bits)
