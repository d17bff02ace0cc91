"""Acceptance suite: one test per release criterion, one printed verdict each.

Every expected value is either a fixed-point fact of the constructions
(verified against independent oracles in the unit suites) or computed here
from first principles; tolerances are pinned in the asserts. Runtime budgets
are asserted too -- the whole point of the artifact is that these checks are
cheap, exact, and reproducible.
"""

import contextlib
import io
import json
import math
import time

import numpy as np

from fluxq import algorithms, cli, machine, qsim
from fluxq.algorithms import (
    backdate_full,
    backdate_partial,
    balanced_bit,
    correspondence_check,
    deutsch_sign_discrepancy,
    grover_components,
    run_extended_deutsch,
    run_extended_grover,
)
from fluxq.boolsys import BooleanSystem, NandEquation, enumerate_solutions
from fluxq.machine import (
    build_circuit,
    configuration_to_assignment,
    enumerate_configurations,
    flux_residuals,
)
from fluxq.qsim import RegisterLayout, StateVector, phase_aligned_deviation, prepare
from fluxq.rng import DeterministicRNG

TOL = 1e-12
METRIC_TOL = 1e-9


def _verdict(number: int, ok: bool, detail: str, elapsed: float, budget: float) -> None:
    status = "PASS" if ok and elapsed < budget else "FAIL"
    print(f"ACCEPTANCE {number} [{status}] {detail} ({elapsed:.2f}s, budget {budget:g}s)")
    assert ok, f"criterion {number}: {detail}"
    assert elapsed < budget, f"criterion {number} exceeded {budget}s ({elapsed:.2f}s)"


def test_criterion_1_one_hot_lemma_property_suite():
    started = time.perf_counter()
    rng = DeterministicRNG(1001)
    checked = 0
    ok = True
    for index in range(10_000):
        m = 1 + rng.randrange(8)
        kind = index % 3
        if kind == 0:  # exact one-hot: must be valid
            values = [0.0] * m
            values[rng.randrange(m)] = 1.0
            expect_one_hot = True
        elif kind == 1:  # sum-conserving spread: breaks mutual exclusion
            values = [rng.random() for _ in range(m)]
            total = sum(values)
            values = [v / total for v in values]
            expect_one_hot = m == 1
        else:  # one-hot with flux bled onto another branch
            values = [0.0] * m
            hot = rng.randrange(m)
            values[hot] = 1.0
            if m > 1:
                other = (hot + 1 + rng.randrange(m - 1)) % m
                epsilon = 1e-6 + rng.random() * 0.5
                values[hot] -= epsilon
                values[other] += epsilon
            expect_one_hot = m == 1
        linear, nonlinear = flux_residuals(values, 1.0)
        valid = linear <= TOL and nonlinear <= TOL
        ok &= valid == expect_one_hot
        checked += 1
    elapsed = time.perf_counter() - started
    _verdict(1, ok and checked == 10_000, f"one-hot lemma on {checked} random vectors (m <= 8)", elapsed, 1.0)


def _random_system(rng: DeterministicRNG) -> BooleanSystem:
    pool = [f"v{i}" for i in range(2 + rng.randrange(9))]  # up to 10 constrained names
    equations = []
    seen = set()
    for _ in range(1 + rng.randrange(8)):
        a = pool[rng.randrange(len(pool))]
        b = a if rng.randrange(12) == 0 else pool[rng.randrange(len(pool))]
        c = pool[rng.randrange(len(pool))]
        if (a, b, c) not in seen:
            seen.add((a, b, c))
            equations.append(NandEquation(a, b, c))
    used = []
    for eq in equations:
        for name in eq.variables():
            if name not in used:
                used.append(name)
    free = [f"f{i}" for i in range(rng.randrange(3))]  # keeps quadruples within the cap
    return BooleanSystem(variables=tuple(used + free), equations=tuple(equations))


def test_criterion_2_machine_soundness_and_completeness():
    started = time.perf_counter()
    rng = DeterministicRNG(2002)
    mismatches = 0
    systems = 0
    for _ in range(200):
        system = _random_system(rng)
        assert len(system.variables) <= 12 and len(system.equations) <= 8
        circuit = build_circuit(system)
        configurations = enumerate_configurations(circuit, 1.0)
        decoded = [configuration_to_assignment(circuit, cfg) for cfg in configurations]
        machine_set = {tuple(sorted(asg.items())) for asg in decoded}
        oracle_set = {tuple(sorted(asg.items())) for asg in enumerate_solutions(system)}
        if machine_set != oracle_set or len(decoded) != len(oracle_set):
            mismatches += 1
        systems += 1
    elapsed = time.perf_counter() - started
    _verdict(
        2,
        mismatches == 0 and systems == 200,
        f"valid configurations <-> brute-force solutions on {systems} random systems, {mismatches} mismatches",
        elapsed,
        30.0,
    )


def test_criterion_3_correlated_state_reproduction():
    started = time.perf_counter()
    report = run_extended_grover(2, DeterministicRNG(3003))
    # the expected state, written out literally: eight amplitudes of modulus
    # 1/(2*sqrt(2)), key and solution equal, flag in minus
    layout = RegisterLayout((("K", 2), ("X", 2), ("F", 1)))
    amps = np.zeros(32, dtype=complex)
    for k in range(4):
        amps[(k << 3) | (k << 1)] = 1 / (2 * math.sqrt(2))
        amps[(k << 3) | (k << 1) | 1] = -1 / (2 * math.sqrt(2))
    expected = StateVector(layout=layout, amplitudes=amps)
    deviation = phase_aligned_deviation(expected, report.final_state)
    ok = deviation <= TOL and report.oracle_calls == 1
    elapsed = time.perf_counter() - started
    _verdict(
        3,
        ok,
        f"extended search at N=4: max amplitude deviation {deviation:.2e}, oracle calls {report.oracle_calls}",
        elapsed,
        1.0,
    )


def test_criterion_4_balanced_pair_distribution():
    started = time.perf_counter()
    report = run_extended_deutsch(DeterministicRNG(4004))
    deviation = 0.0
    for k in range(4):
        for x in (0, 1):
            expected = 0.25 if x == balanced_bit(k) else 0.0
            deviation = max(deviation, abs(float(report.joint_distribution[(k << 1) | x]) - expected))
    flipped = deutsch_sign_discrepancy(report)
    ok = deviation <= TOL and report.oracle_calls == 1 and flipped == ("10", "11")
    elapsed = time.perf_counter() - started
    _verdict(
        4,
        ok,
        f"extended classification: distribution deviation {deviation:.2e}, "
        f"sign discrepancy logged on {','.join(flipped)}, oracle calls {report.oracle_calls}",
        elapsed,
        1.0,
    )


def test_criterion_5_information_metrics():
    started = time.perf_counter()
    ok = True
    for report in (run_extended_grover(2, DeterministicRNG(5005)), run_extended_deutsch(DeterministicRNG(5005))):
        ok &= abs(report.delta_s_nominal - 1.0) <= METRIC_TOL
        ok &= abs(report.delta_r - 2.0) <= METRIC_TOL
        ok &= abs(report.delta_s_nominal - 0.5 * report.delta_r) <= METRIC_TOL
        ok &= report.delta_s_nominal <= report.delta_r + METRIC_TOL
    operational = {}
    for n in (4, 6):  # N = 16, 64
        report = run_extended_grover(n, DeterministicRNG(5006))
        operational[1 << n] = report.delta_s_operational
        ok &= report.delta_s_operational <= report.delta_r + METRIC_TOL
    elapsed = time.perf_counter() - started
    _verdict(
        5,
        ok,
        "gain 1 bit = half of 2-bit reduction entropy at N=4 (both algorithms); "
        f"operational gain bounded by reduction entropy at N=16,64 ({operational[16]:g}, {operational[64]:g} bits)",
        elapsed,
        5.0,
    )


def test_criterion_6_backdating():
    started = time.perf_counter()
    report = run_extended_grover(2, DeterministicRNG(6006))
    layout, prep, gates = grover_components(2, 1)
    worst_full = 0.0
    worst_roundtrip = 0.0
    for k in range(4):
        check = backdate_full(report, k)
        worst_full = max(worst_full, check.preparation_deviation)
        worst_roundtrip = max(worst_roundtrip, check.roundtrip_deviation)
    worst_partial = 0.0
    partial_keys_ok = True
    for bit in (0, 1):
        for value in (0, 1):
            check = backdate_partial(report, bit, value)
            worst_partial = max(worst_partial, check.preparation_deviation, check.roundtrip_deviation)
            expected_keys = {k for k in range(4) if ((k >> (1 - bit)) & 1) == value}
            populations = {k for k, p in enumerate(check.k_populations) if p > 1e-6}
            partial_keys_ok &= populations == expected_keys
    ok = worst_full <= TOL and worst_partial <= TOL and worst_roundtrip <= TOL and partial_keys_ok
    elapsed = time.perf_counter() - started
    _verdict(
        6,
        ok,
        f"backdating at N=4: full {worst_full:.2e}, partial {worst_partial:.2e}, "
        f"forward re-application {worst_roundtrip:.2e}",
        elapsed,
        1.0,
    )


def test_criterion_7_deferred_measurement_indistinguishability():
    started = time.perf_counter()
    deviations = {}
    for n in (2, 3):  # N = 4 and 8
        _, prep, gates = grover_components(n, algorithms.grover_iterations(1 << n))
        early, late = qsim.deferred_measurement_distributions(prep, gates, ("K",), ("X",))
        deviations[1 << n] = float(np.max(np.abs(early - late)))
    ok = all(d <= TOL for d in deviations.values())
    elapsed = time.perf_counter() - started
    _verdict(
        7,
        ok,
        f"key measured first vs last: joint distribution deviation {deviations[4]:.2e} (N=4), "
        f"{deviations[8]:.2e} (N=8)",
        elapsed,
        1.0,
    )


def test_criterion_8_population_flux_correspondence():
    started = time.perf_counter()
    master = DeterministicRNG(8008)
    counts = {"0": 0, "1": 0}
    ok = True
    for trial in range(1000):
        report = correspondence_check(master.split(trial))
        ok &= abs(report.pre_nonlinear_residual - 0.5) <= TOL
        ok &= report.pre_linear_residual <= TOL
        ok &= not report.pre_valid
        ok &= report.post_valid and report.post_max_residual <= TOL
        counts[report.outcome] += 1
    frequencies = {outcome: count / 1000 for outcome, count in counts.items()}
    ok &= all(0.45 <= f <= 0.55 for f in frequencies.values())
    elapsed = time.perf_counter() - started
    _verdict(
        8,
        ok,
        "pre-measurement populations break mutual exclusion by 0.5; post-measurement "
        f"populations are valid flux configurations; outcome frequencies {frequencies['0']:.3f}/{frequencies['1']:.3f}",
        elapsed,
        2.0,
    )


def test_criterion_9_reproducibility(tmp_path):
    started = time.perf_counter()
    problem = tmp_path / "pair.nand"
    problem.write_text("x3 = NAND(x1, x2)\nx1 = NAND(x3, x3)\n")
    command_lines = [
        ["machine", "--input", str(problem), "--samples", "500", "--seed", "7"],
        ["machine", "--input", str(problem), "--samples", "100", "--seed", "7", "--mode", "fast"],
        ["grover", "--n", "2", "--seed", "42"],
        ["grover", "--n", "3", "--seed", "42"],
        ["deutsch", "--seed", "42"],
        ["trajectory", "--algorithm", "grover", "--n", "2", "--seed", "9"],
        ["trajectory", "--algorithm", "pair", "--seed", "9"],
    ]
    ok = True
    for argv in command_lines:
        outputs = []
        for _ in range(2):
            buffer = io.StringIO()
            with contextlib.redirect_stdout(buffer):
                cli.main(argv + ["--format", "json"])
            outputs.append(buffer.getvalue().encode())
        ok &= outputs[0] == outputs[1]
        json.loads(outputs[0])  # and it is well-formed JSON
    elapsed = time.perf_counter() - started
    _verdict(
        9,
        ok,
        f"{len(command_lines)} command lines repeated with fixed seeds: byte-identical JSON",
        elapsed,
        10.0,
    )
