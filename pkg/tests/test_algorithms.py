import dataclasses
import math

import numpy as np
import pytest

from fluxq import algorithms, qsim
from fluxq.algorithms import (
    DEFAULT_SPEEDUP,
    SpeedupModel,
    backdate_full,
    backdate_joint,
    backdate_partial,
    balanced_bit,
    check_inequality,
    correspondence_check,
    delta_r,
    delta_s,
    deutsch_sign_discrepancy,
    grover_iterations,
    run_extended_deutsch,
    run_extended_grover,
)
from fluxq.qsim import RegisterLayout, StateVector, phase_aligned_deviation, prepare
from fluxq.rng import DeterministicRNG


def _correlated_target(n: int) -> StateVector:
    # built literally from the stated pattern: 2**n matching (k, k) pairs,
    # amplitude 1/sqrt(2N) with the flag minus
    layout = RegisterLayout((("K", n), ("X", n), ("F", 1)))
    amps = np.zeros(1 << (2 * n + 1), dtype=complex)
    scale = 1.0 / math.sqrt(2 << n)
    for k in range(1 << n):
        amps[(k << (n + 1)) | (k << 1)] = scale
        amps[(k << (n + 1)) | (k << 1) | 1] = -scale
    return StateVector(layout=layout, amplitudes=amps)


def test_grover_iteration_counts():
    assert [grover_iterations(n) for n in (1, 2, 4, 8, 16, 64)] == [0, 1, 1, 2, 3, 6]


def test_extended_grover_four_instances_reproduces_target_exactly():
    report = run_extended_grover(2, DeterministicRNG(1))
    assert report.oracle_calls == 1
    assert report.iterations == 1
    assert report.exact_regime
    deviation = phase_aligned_deviation(_correlated_target(2), report.final_state)
    assert deviation <= 1e-12
    # measuring (K, X) always yields k = x
    assert np.isclose(report.success_probability, 1.0, atol=1e-12)
    assert report.sampled_outcome[:2] == report.sampled_outcome[2:]


def test_extended_grover_metrics_at_four_instances():
    report = run_extended_grover(2, DeterministicRNG(3))
    assert np.isclose(report.delta_s_nominal, 1.0)
    assert np.isclose(report.delta_s_operational, 1.0)
    assert np.isclose(report.delta_r, 2.0, atol=1e-9)
    assert np.isclose(report.delta_r_von_neumann, 2.0, atol=1e-9)
    assert report.half_rule_ok and report.inequality_ok
    assert check_inequality(report)


def test_extended_grover_eight_instances_success_probability():
    report = run_extended_grover(3, DeterministicRNG(5))
    assert report.iterations == 2
    assert not report.exact_regime
    # closed form: two rotations by 2*asin(1/sqrt(8)) from the uniform start
    theta = math.asin(8**-0.5)
    expected = math.sin(5 * theta) ** 2
    assert np.isclose(report.success_probability, expected, atol=1e-12)
    assert np.isclose(expected, 0.9453, atol=5e-5)
    # pointer-dephased reduction entropy stays log2(N); the coherent value drops below
    assert np.isclose(report.delta_r, 3.0, atol=1e-9)
    assert report.delta_r_von_neumann < 3.0
    assert report.half_rule_ok and report.inequality_ok


def test_extended_deutsch_distribution_and_metrics():
    report = run_extended_deutsch(DeterministicRNG(2))
    assert report.oracle_calls == 1
    assert report.N == 4
    for k in range(4):
        for x in (0, 1):
            expected = 0.25 if x == balanced_bit(k) else 0.0
            assert np.isclose(report.joint_distribution[(k << 1) | x], expected, atol=1e-12)
    assert balanced_bit(0b00) == 0  # constant: no phase difference
    assert balanced_bit(0b11) == 0
    assert balanced_bit(0b01) == 1
    assert np.isclose(report.delta_s_nominal, 1.0)
    assert np.isclose(report.delta_s_operational, 1.0)
    assert np.isclose(report.delta_r, 2.0, atol=1e-9)
    assert np.isclose(report.delta_r_von_neumann, 0.0, atol=1e-9)  # the KX reduction is pure
    assert report.half_rule_ok and report.inequality_ok
    assert check_inequality(report)


def test_deutsch_sign_discrepancy_components():
    report = run_extended_deutsch(DeterministicRNG(4))
    assert deutsch_sign_discrepancy(report) == ("10", "11")


def test_delta_s_values():
    assert delta_s(4) == (1.0, 1.0)
    # N=16 needs 3 oracle calls; the smallest classical budget covering 3 is M=4
    assert delta_s(16) == (2.0, 2.0)
    assert delta_s(64) == (3.0, 3.0)
    assert delta_s(1) == (0.0, 0.0)
    assert delta_s(8) == (1.5, 1.0)  # operational value is coarser off the exact sizes
    with pytest.raises(ValueError):
        delta_s(12)


def test_delta_s_custom_model():
    model = SpeedupModel(quantum_queries=lambda n: 3, classical_queries=lambda m: m - 1)
    assert delta_s(16, model) == (2.0, 2.0)
    assert DEFAULT_SPEEDUP.quantum_queries(16) == 3


def test_delta_r_readings():
    grover = run_extended_grover(2, DeterministicRNG(6))
    reading = delta_r(grover.final_state, ("K",))
    assert np.isclose(reading.shannon, 2.0, atol=1e-9)
    assert np.isclose(reading.von_neumann, 2.0, atol=1e-9)
    deutsch = run_extended_deutsch(DeterministicRNG(6))
    reading = delta_r(deutsch.final_state, ("K", "X"))
    assert np.isclose(reading.shannon, 2.0, atol=1e-9)
    assert np.isclose(reading.von_neumann, 0.0, atol=1e-9)
    layout = RegisterLayout((("K", 2),))
    basis = prepare(layout, {"K": 2})
    assert delta_r(basis, ("K",)) == (0.0, 0.0)


def test_check_inequality_flags_broken_half_rule():
    report = run_extended_grover(2, DeterministicRNG(7))
    tampered = dataclasses.replace(report, delta_s_nominal=0.25)
    with pytest.raises(ValueError):
        check_inequality(tampered)


def test_backdate_full_every_key():
    report = run_extended_grover(2, DeterministicRNG(8))
    layout, _, _ = algorithms.grover_components(2, 1)
    for k in range(4):
        check = backdate_full(report, k)
        assert check.passed
        assert check.preparation_deviation <= 1e-12
        assert check.roundtrip_deviation <= 1e-12
        assert check.x_marginal_deviation <= 1e-12
        assert np.isclose(check.outcome_probability, 0.25, atol=1e-12)
        assert np.isclose(check.k_entropy_bits, 0.0, atol=1e-9)
        assert np.isclose(check.information_gain_bits, 2.0, atol=1e-9)
        # the backdated preparation is the fixed-instance preparation
        expected = prepare(layout, {"K": k, "X": "uniform", "F": "minus"})
        backward = qsim.backward_preparation(
            algorithms.grover_components(2, 1)[2],
            algorithms.grover_components(2, 1)[1],
            qsim.Projector.on_registers(layout, {"K": k}),
        )
        assert phase_aligned_deviation(expected, backward) <= 1e-12


def test_backdate_full_is_exact_even_off_the_ideal_size():
    # the key register is only ever a control, so its reduction commutes with
    # the evolution and the backdated preparation is exact at any size
    report = run_extended_grover(3, DeterministicRNG(9))
    check = backdate_full(report, 5)
    assert check.preparation_deviation <= 1e-12
    assert check.x_marginal_deviation <= 1e-12


def test_backdate_partial_narrows_key_register():
    report = run_extended_grover(2, DeterministicRNG(10))
    # trailing bit 1: keys 01 and 11
    check = backdate_partial(report, 1, 1)
    assert check.passed
    assert np.allclose(check.k_populations, [0.0, 0.5, 0.0, 0.5], atol=1e-12)
    assert np.isclose(check.k_entropy_bits, 1.0, atol=1e-9)
    assert np.isclose(check.information_gain_bits, 1.0, atol=1e-9)
    assert check.x_marginal_deviation <= 1e-12
    # leading bit 0: keys 00 and 01 (rows and columns swap symmetrically)
    check = backdate_partial(report, 0, 0)
    assert np.allclose(check.k_populations, [0.5, 0.5, 0.0, 0.0], atol=1e-12)
    # independent reconstruction of the expected narrowed preparation
    layout, prep, gates = algorithms.grover_components(2, 1)
    backward = qsim.backward_preparation(
        gates, prep, qsim.Projector.on_register_bit(layout, "X", 1, 1)
    )
    expected = (
        prepare(layout, {"K": 1, "X": "uniform", "F": "minus"}).amplitudes
        + prepare(layout, {"K": 3, "X": "uniform", "F": "minus"}).amplitudes
    ) / math.sqrt(2)
    assert np.max(np.abs(backward.amplitudes - expected)) <= 1e-12


def test_backdate_partial_requires_four_instances():
    report = run_extended_grover(3, DeterministicRNG(11))
    with pytest.raises(ValueError):
        backdate_partial(report, 0, 1)


def test_backdate_joint_disturbs_solution_register_off_ideal_size():
    report = run_extended_grover(3, DeterministicRNG(12))
    check = backdate_joint(report, "000", "000")
    assert check.roundtrip_deviation <= 1e-12
    assert check.x_marginal_deviation > 1e-3  # genuinely non-uniform at N=8
    exact = run_extended_grover(2, DeterministicRNG(12))
    check = backdate_joint(exact, "01", "01")
    assert check.x_marginal_deviation <= 1e-12  # collapses to the k = x branch


def test_correspondence_pre_measurement_breaks_mutual_exclusion():
    report = correspondence_check(DeterministicRNG(13))
    assert report.pre_populations["X"] == pytest.approx((0.5, 0.5))
    assert report.pre_populations["Y"] == pytest.approx((0.5, 0.5))
    assert report.pre_coordinates == pytest.approx((0.5, 0.5))
    assert report.pre_linear_residual <= 1e-12
    assert np.isclose(report.pre_nonlinear_residual, 0.5, atol=1e-12)
    assert not report.pre_valid
    assert report.outcome_distribution == pytest.approx((0.5, 0.5))


def test_correspondence_post_measurement_is_valid_machine_configuration():
    for seed in range(20):
        report = correspondence_check(DeterministicRNG(seed))
        assert report.post_valid
        assert report.post_max_residual <= 1e-12
        x11, y11 = report.post_coordinates
        assert sorted((x11, y11)) == [0.0, 1.0]
        assert x11 + report.post_populations["X"][1] == pytest.approx(1.0)
        # coordinate X = population of the first qubit's |0> level
        assert report.assignment == {"x": 1 if x11 == 1.0 else 0}


def test_run_reports_record_seed_and_counts():
    report = run_extended_grover(2, DeterministicRNG(123456789), iterations=2)
    assert report.seed == 123456789
    assert report.oracle_calls == 2
    assert not report.exact_regime  # two rounds overshoot the quarter turn
