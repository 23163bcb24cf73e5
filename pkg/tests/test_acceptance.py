"""Acceptance gate: one test per criterion, each printing a single PASS/FAIL line.

The grid is L in {2,3,4}, n in {1,2,3}, 0 <= n1 <= n, with collusion bound
T = L - 2. Expected leakage values come from the scalar brute-force oracle in
``oracle.py`` and from the closed forms they were checked against.
"""
from __future__ import annotations

import itertools
import os
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from oracle import H, leak, time_sharing_rows
from privsum import secret_sharing
from privsum.auditor import audit, check_correctness
from privsum.entropy import TOL, cond_entropy, entropy, enumerate_table, mutual_info
from privsum.fixtures import check_fixture, default_fixtures
from privsum.protocol import ProtocolConfig, build_achievability, joint_law

GRID = [ProtocolConfig(L, n, n1, L - 2) for L in (2, 3, 4) for n in (1, 2, 3) for n1 in range(n + 1)]


def announce(pytestconfig, number, ok, text):
    line = f"[criterion {number}] {'PASS' if ok else 'FAIL'}: {text}"
    capman = pytestconfig.pluginmanager.getplugin("capturemanager")
    with capman.global_and_fixture_disabled():
        print("\n" + line, flush=True)
    assert ok, line


@pytest.fixture(scope="module")
def grid():
    start = time.perf_counter()
    joints, wrong = {}, {}
    for c in GRID:
        inst = build_achievability(c)
        j = joint_law(inst)
        wrong[c] = check_correctness(j).measured
        joints[c] = (inst, j)
    elapsed = time.perf_counter() - start
    reports = {c: audit(inst, joint=j) for c, (inst, j) in joints.items()}
    return {"joints": joints, "wrong": wrong, "elapsed": elapsed, "reports": reports}


def test_criterion_1_correctness(grid, pytestconfig):
    bad = {c: w for c, w in grid["wrong"].items() if w}
    ok = not bad and grid["elapsed"] < 10
    announce(pytestconfig, 1, ok, f"{len(GRID)} instances decode the sum on every seed "
             f"({sum(bad.values())} wrong seeds) in {grid['elapsed']:.2f} s (limit 10 s)")


def test_criterion_2_privacy_structure(grid, pytestconfig):
    worst = 0.0
    private = True
    for c, report in grid["reports"].items():
        for t in range(c.L + 1):
            expected = max(c.L - t - 1, 0) * c.n1
            worst = max(worst, abs(report.profile.C[t] - expected))
        private &= report.privacy.passed and report.privacy.measured <= c.n * c.alpha * (c.L - 1) + TOL
    # independent spot check of the expected values against the scalar oracle
    for L, n, n1 in [(3, 2, 1), (4, 1, 1), (2, 3, 2)]:
        rows = time_sharing_rows(L, n, n1)
        for t in range(L + 1):
            got = max(leak(rows, L, T) for T in itertools.combinations(range(1, L + 1), t))
            worst = max(worst, abs(got - max(L - t - 1, 0) * n1))
    announce(pytestconfig, 2, worst <= TOL and private,
             f"max |C_t - (L-t-1) n1| = {worst:.3g} bits (tol {TOL}); leakage within n alpha (L-1): {private}")


def test_criterion_3_rates(grid, pytestconfig):
    mismatches = []
    for c, report in grid["reports"].items():
        r, a, L = report.rates, c.alpha, c.L
        want = ((1,) * L, (1 - a,) * L, (1 - a) * L, (1 - a) * (L - 1))
        if (r.R_X, r.R_K, r.R_K_sum, r.R_U) != want or not report.optimal:
            mismatches.append(c)
        if c.n1 == 0 and (r.R_X, r.R_K, r.R_K_sum, r.R_U) != ((1,) * L, (1,) * L, L, L - 1):
            mismatches.append(c)
        if not all(isinstance(x, (int, Fraction)) for x in (*r.R_K, r.R_K_sum, r.R_U)):
            mismatches.append(c)
    announce(pytestconfig, 3, not mismatches,
             f"exact rational rates match the optimal tuple on {len(GRID) - len(mismatches)}/{len(GRID)} instances")


def test_criterion_4_properties(grid, pytestconfig):
    worst_spread, failures = 0.0, []
    for c, report in grid["reports"].items():
        prof = report.profile
        worst_spread = max(worst_spread, *(prof.spread(s) for s in range(c.L + 1)))
        ok = (prof.symmetric and prof.monotone
              and prof.delta <= c.n1 + TOL
              and prof.C[0] <= c.n1 * (c.L - 1) + TOL
              and all(report.checks()[p] == "pass" for p in ("property1", "property2", "property3")))
        if not ok:
            failures.append(c)
    announce(pytestconfig, 4, not failures and worst_spread <= TOL,
             f"symmetry and properties 1-3 hold on {len(GRID) - len(failures)}/{len(GRID)} instances, "
             f"max per-size spread {worst_spread:.3g}")


def test_criterion_5_identities(grid, pytestconfig):
    names = ("lemma1", "lemma2", "lemma3", "lemma4", "lemma5", "lemma6")
    total, bad, worst = 0, [], 0.0
    for c, report in grid["reports"].items():
        for v in report.identities:
            total += 1
            if v.status != "pass":
                bad.append((c, v.name, v.subset))
            if v.name in ("lemma1", "lemma2", "lemma6"):
                worst = max(worst, abs(v.measured - v.required))
        counts = {n: sum(v.name == n for v in report.identities) for n in names}
        if counts["lemma1"] != 2 ** c.L or counts["lemma2"] != c.L ** 2 or counts["lemma6"] != 2 ** c.L - 1:
            bad.append((c, "coverage", counts))
    announce(pytestconfig, 5, not bad and worst <= TOL,
             f"{total - len(bad)}/{total} identity and bound checks pass, max equality error {worst:.3g}")


def test_criterion_6_ramp(grid, pytestconfig):
    checked, bad, worst = 0, [], 0.0
    for c, report in grid["reports"].items():
        _, j = grid["joints"][c]
        if entropy(j, "U") <= TOL:
            if report.ramp.status != "vacuous":
                bad.append(c)
            continue
        checked += 1
        L = c.L
        expected = [Fraction(k, L - 1) for k in range(L)] + [Fraction(1)]
        prof = secret_sharing.profile_from_table(j, "U", [f"K_{l}" for l in range(1, L + 1)])
        worst = max(worst, *(abs(v - float(e)) for v, e in zip(prof.C, expected)))
        if not (report.ramp.passed and secret_sharing.check_ramp(prof, L - 1, L - 1).passed):
            bad.append(c)
    announce(pytestconfig, 6, not bad and worst <= TOL and checked > 0,
             f"ramp profile [0, 1/(L-1), ..., 1, 1] on {checked - len(bad)}/{checked} instances with H(U) > 0, "
             f"max deviation {worst:.3g}")


def test_criterion_7_fixtures(pytestconfig):
    lines, ok = [], True
    for fx in default_fixtures():
        report, expected = check_fixture(fx)
        ok &= expected
        lines.append(f"{fx.name}->{','.join(report.failed()) or '-'}")
        if fx.name == "plaintext":
            c = fx.instance.config
            err = abs(report.max_leak_bits - c.n * (c.L - 1))
            ok &= err <= TOL
            lines.append(f"plaintext leak error {err:.3g}")
    announce(pytestconfig, 7, ok, "; ".join(lines))


def _sweep(threads: str) -> bytes:
    argv = [sys.executable, "-m", "privsum", "sweep", "--L", "2", "3", "4", "--n", "1", "2", "3"]
    env = {**os.environ, "PRIVSUM_THREADS": threads}
    return subprocess.run(argv, env=env, capture_output=True, check=True).stdout


def test_criterion_8_determinism(pytestconfig):
    first, second = _sweep("1"), _sweep("1")
    wide = _sweep("8")
    largest = build_achievability(ProtocolConfig(4, 3, 0, 2))
    a = audit(largest, workers=1).to_json()
    b = audit(largest, workers=8).to_json()
    ok = first == second == wide and a == b and first.count(b"\n") == len(GRID) + 1
    announce(pytestconfig, 8, ok, f"repeated sweep byte-identical: {first == second}; "
             f"1 vs 8 threads identical: sweep {first == wide}, report {a == b}")


def _random_table(rng):
    seed_bits = int(rng.integers(0, 13))
    widths = [int(w) for w in rng.integers(1, 5, size=3)]
    # coarse tables give repeated values, so dependence between variables is common
    tables = [rng.integers(0, 1 << w, size=1 << seed_bits) for w in widths]
    if rng.random() < 0.5:
        tables[2] = (tables[0] ^ tables[1]) & ((1 << widths[2]) - 1)
    schema = [("A", widths[0]), ("B", widths[1]), ("C", widths[2])]
    t = enumerate_table(seed_bits, lambda s: tuple(tab[s] for tab in tables), schema)
    return t, tables


def test_criterion_9_entropy_engine(pytestconfig):
    rng = np.random.default_rng(20240601)
    worst = 0.0
    for _ in range(1000):
        t, tables = _random_table(rng)
        h = {k: entropy(t, list(k)) for r in range(1, 4) for k in itertools.combinations("ABC", r)}
        errs = [
            # chain rule, two ways
            h[("A", "B", "C")] - (h[("A",)] + cond_entropy(t, "B", "A") + cond_entropy(t, "C", ["A", "B"])),
            h[("A", "B")] - (h[("B",)] + cond_entropy(t, "A", "B")),
            # agreement with the counting oracle
            h[("A", "B", "C")] - H(list(zip(*(x.tolist() for x in tables)))),
        ]
        worst = max(worst, *(abs(e) for e in errs))
        negatives = [
            *h.values(),
            cond_entropy(t, "A", "B"), cond_entropy(t, "C", ["A", "B"]),
            mutual_info(t, "A", "B"), mutual_info(t, "A", "B", "C"), mutual_info(t, ["A", "C"], "B"),
            # conditioning reduces entropy
            h[("A",)] - cond_entropy(t, "A", "B"),
            cond_entropy(t, "A", "B") - cond_entropy(t, "A", ["B", "C"]),
        ]
        worst = max(worst, -min(negatives))
    announce(pytestconfig, 9, worst <= TOL,
             f"1000 random tables: max chain-rule/oracle error or negativity {worst:.3g} (tol {TOL})")
