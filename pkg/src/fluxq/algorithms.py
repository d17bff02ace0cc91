"""Ancilla-extended search runs and their information accounting.

Both built-in algorithms carry the problem instance in a key register K held
in uniform superposition, so choosing the instance is part of the physics:

* extended Grover -- K and X are n qubits each; each round marks the X
  component equal to K via the equality oracle (phase kickback on the minus
  flag) and inverts X about its mean. At N = 4 one round correlates K and X
  perfectly.
* extended Deutsch -- K (2 qubits) encodes one of the four one-bit functions
  as (f(0), f(1)); a single oracle call plus a Hadamard leaves X holding
  whether the function is balanced.

Metrics reported for every run:

* information gain ``delta_s``: half the logarithm of the instance-space
  size, plus an operational variant -- the logarithmic problem-size reduction
  that would let a classical query budget match the quantum one.
* reduction entropy ``delta_r``: entropy of the measured registers' reduced
  state just before projection. The primary reading is Shannon entropy of the
  populations (what survives once the pointer has dephased the measured
  basis); plain von Neumann entropy is reported alongside, and the two differ
  whenever the measured reduction is coherent.

The run's measurement can be backdated: reverse-evolving the projected final
state yields an equivalent sharper preparation. Fully backdating K turns the
extended run into the original fixed-instance algorithm; backdating a single
X bit halves the key space, which is the operational face of the speed-up.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import machine, qsim
from .boolsys import BooleanSystem
from .machine import FluxConfiguration, build_circuit, validate_configuration
from .qsim import (
    GateSequence,
    Projector,
    RegisterLayout,
    StateVector,
    apply,
    backward_preparation,
    collapse,
    diffusion,
    entropy,
    hadamard,
    joint_distribution,
    marginal_distribution,
    measure,
    oracle_delta,
    oracle_deutsch,
    phase_aligned_deviation,
    prepare,
    reduce,
    register_populations,
)
from .rng import DeterministicRNG

GROVER = "extended_grover"
DEUTSCH = "extended_deutsch"

METRIC_TOLERANCE = 1e-9
STATE_TOLERANCE = 1e-12

MAX_GROVER_QUBITS = 10


def grover_iterations(n_instances: int) -> int:
    """Optimal number of mark-and-diffuse rounds for a size-N search.

    Rounds rotate the solution amplitude by 2*asin(1/sqrt(N)) from asin(1/sqrt(N));
    the count landing closest to the quarter turn is floor(pi / (4*theta)).
    This gives 1, 2, 3, 6 rounds for N = 4, 8, 16, 64; N = 4 is exact.
    """
    if n_instances < 1:
        raise ValueError("instance space must be non-empty")
    if n_instances == 1:
        return 0
    theta = math.asin(n_instances**-0.5)
    return max(1, int(math.pi / (4.0 * theta)))


@dataclass(frozen=True)
class SpeedupModel:
    """Query-count model used for the operational information gain."""

    quantum_queries: Callable[[int], int]
    classical_queries: Callable[[int], int]


# classical exhaustive search resolves the last location for free
DEFAULT_SPEEDUP = SpeedupModel(
    quantum_queries=grover_iterations,
    classical_queries=lambda m: m - 1,
)


class InformationGain(NamedTuple):
    nominal: float  # half the logarithmic instance-space size
    operational: float  # log2(N) - log2(M) for the equal-query-budget size M


def _operational_gain(n_instances: int, quantum_calls: int, classical_queries) -> float:
    """Logarithmic size reduction equalizing classical and quantum query counts.

    M is the smallest power of two whose classical budget covers the quantum
    calls; the gain is log2(N) - log2(M).
    """
    m = 1
    while classical_queries(m) < quantum_calls:
        m *= 2
    return math.log2(n_instances) - math.log2(m)


def delta_s(n_instances: int, model: SpeedupModel = DEFAULT_SPEEDUP) -> InformationGain:
    if n_instances < 1 or n_instances & (n_instances - 1):
        raise ValueError("instance space size must be a power of two")
    nominal = 0.5 * math.log2(n_instances)
    operational = _operational_gain(
        n_instances, model.quantum_queries(n_instances), model.classical_queries
    )
    return InformationGain(nominal=nominal, operational=operational)


class ReductionEntropy(NamedTuple):
    shannon: float  # pointer-dephased reading: Shannon entropy of the populations
    von_neumann: float


def delta_r(state: StateVector, registers: tuple[str, ...]) -> ReductionEntropy:
    """Entropy of the measured registers' reduced state before projection.

    The pointer-dephased Shannon value is the primary measure; the von
    Neumann value is reported for comparison (it is smaller whenever the
    reduced state is coherent, e.g. zero for a pure reduction).
    """
    bits = entropy(reduce(state, registers))
    return ReductionEntropy(shannon=bits.shannon, von_neumann=bits.von_neumann)


@dataclass(frozen=True, eq=False)
class RunReport:
    """One algorithm execution with its exact distribution and metrics."""

    algorithm: str
    N: int
    n: int
    iterations: int
    oracle_calls: int
    seed: int
    final_state: StateVector
    joint_registers: tuple[str, ...]
    joint_distribution: np.ndarray
    sampled_outcome: str
    success_probability: float
    delta_s_nominal: float
    delta_s_operational: float
    delta_r: float
    delta_r_von_neumann: float
    half_rule_ok: bool
    inequality_ok: bool
    exact_regime: bool

    def __post_init__(self):
        assert self.inequality_ok == (self.delta_s_nominal <= self.delta_r + METRIC_TOLERANCE)


def check_inequality(report: RunReport) -> bool:
    """True iff the information gain is bounded by the reduction entropy.

    For the two built-in algorithms the gain must equal exactly half the
    reduction entropy; a violation means the implementation is broken.
    """
    holds = report.delta_s_nominal <= report.delta_r + METRIC_TOLERANCE
    if report.algorithm in (GROVER, DEUTSCH):
        if abs(report.delta_s_nominal - 0.5 * report.delta_r) > METRIC_TOLERANCE:
            raise ValueError(
                f"built-in algorithm {report.algorithm} lost the half-rule: "
                f"gain {report.delta_s_nominal}, reduction entropy {report.delta_r}"
            )
    return holds


# --------------------------------------------------------------------------
# circuits


def grover_components(n: int, iterations: int) -> tuple[RegisterLayout, StateVector, GateSequence]:
    if not 1 <= n <= MAX_GROVER_QUBITS:
        raise ValueError(f"n must be in 1..{MAX_GROVER_QUBITS}")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    layout = RegisterLayout((("K", n), ("X", n), ("F", 1)))
    prep = prepare(layout, {"K": "uniform", "X": "uniform", "F": "minus"})
    round_gates = (oracle_delta(layout, "K", "X", "F"), diffusion(layout, "X"))
    return layout, prep, round_gates * iterations


def deutsch_components() -> tuple[RegisterLayout, StateVector, GateSequence]:
    layout = RegisterLayout((("K", 2), ("X", 1), ("F", 1)))
    prep = prepare(layout, {"K": "uniform", "X": "plus", "F": "minus"})
    gates = (oracle_deutsch(layout, "K", "X", "F"), hadamard(layout.offset("X")))
    return layout, prep, gates


def balanced_bit(k: int) -> int:
    """Whether key k names a balanced function: f(0) xor f(1)."""
    return ((k >> 1) & 1) ^ (k & 1)


def grover_target_state(n: int) -> StateVector:
    """The perfectly correlated end state: sum_k |k>|k> times the minus flag."""
    layout = RegisterLayout((("K", n), ("X", n), ("F", 1)))
    size = 1 << layout.n_qubits
    n_instances = 1 << n
    amps = np.zeros(size, dtype=complex)
    scale = 1.0 / math.sqrt(2 * n_instances)
    for k in range(n_instances):
        base = (k << (n + 1)) | (k << 1)
        amps[base] = scale
        amps[base | 1] = -scale
    return StateVector(layout=layout, amplitudes=amps)


def deutsch_reference_state() -> StateVector:
    """All-positive reference pairing each key with its balanced bit."""
    layout = RegisterLayout((("K", 2), ("X", 1), ("F", 1)))
    amps = np.zeros(16, dtype=complex)
    scale = 1.0 / math.sqrt(8.0)
    for k in range(4):
        base = (k << 2) | (balanced_bit(k) << 1)
        amps[base] = scale
        amps[base | 1] = -scale
    return StateVector(layout=layout, amplitudes=amps)


def _components_for(report: RunReport) -> tuple[RegisterLayout, StateVector, GateSequence]:
    if report.algorithm == GROVER:
        return grover_components(report.n, report.iterations)
    if report.algorithm == DEUTSCH:
        return deutsch_components()
    raise ValueError(f"unknown algorithm {report.algorithm!r}")


# --------------------------------------------------------------------------
# runs


def _build_report(
    algorithm: str,
    n: int,
    n_instances: int,
    iterations: int,
    oracle_calls: int,
    rng: DeterministicRNG,
    final: StateVector,
    joint_registers: tuple[str, ...],
    success_probability: float,
    measured_for_reduction: tuple[str, ...],
    exact_regime: bool,
) -> RunReport:
    joint = joint_distribution(final, joint_registers)
    sampled = measure(final, joint_registers, rng).outcome
    reduction = delta_r(final, measured_for_reduction)
    gain_nominal = 0.5 * math.log2(n_instances)
    gain_operational = _operational_gain(n_instances, oracle_calls, DEFAULT_SPEEDUP.classical_queries)
    return RunReport(
        algorithm=algorithm,
        N=n_instances,
        n=n,
        iterations=iterations,
        oracle_calls=oracle_calls,
        seed=rng.seed,
        final_state=final,
        joint_registers=joint_registers,
        joint_distribution=joint,
        sampled_outcome=sampled,
        success_probability=success_probability,
        delta_s_nominal=gain_nominal,
        delta_s_operational=gain_operational,
        delta_r=reduction.shannon,
        delta_r_von_neumann=reduction.von_neumann,
        half_rule_ok=abs(gain_nominal - 0.5 * reduction.shannon) <= METRIC_TOLERANCE,
        inequality_ok=gain_nominal <= reduction.shannon + METRIC_TOLERANCE,
        exact_regime=exact_regime,
    )


def run_extended_grover(n: int, rng: DeterministicRNG, iterations: int | None = None) -> RunReport:
    """Search over N = 2**n with the instance itself in superposition.

    One oracle call per round. At N = 4 the single default round is exact:
    the final state is the fully correlated superposition and measuring (K, X)
    always yields k = x.
    """
    n_instances = 1 << n
    if iterations is None:
        iterations = grover_iterations(n_instances)
    _, prep, gates = grover_components(n, iterations)
    final = apply(prep, gates)
    joint = joint_distribution(final, ("K", "X"))
    success = float(sum(joint[(k << n) | k] for k in range(n_instances)))
    return _build_report(
        algorithm=GROVER,
        n=n,
        n_instances=n_instances,
        iterations=iterations,
        oracle_calls=iterations,
        rng=rng,
        final=final,
        joint_registers=("K", "X"),
        success_probability=success,
        measured_for_reduction=("K",),
        exact_regime=(n_instances == 4 and iterations == 1),
    )


def run_extended_deutsch(rng: DeterministicRNG) -> RunReport:
    """Balanced-or-constant classification with the function choice in superposition.

    A single oracle call; the outcome distribution is exactly 1/4 on each
    (k, balanced(k)) pair. The reduction entropy over (K, X) is 2 bits in the
    pointer-dephased reading while the von Neumann value is 0 (the flag
    factors out, leaving the measured reduction pure) -- both are reported.
    """
    _, prep, gates = deutsch_components()
    final = apply(prep, gates)
    joint = joint_distribution(final, ("K", "X"))
    success = float(sum(joint[(k << 1) | balanced_bit(k)] for k in range(4)))
    return _build_report(
        algorithm=DEUTSCH,
        n=2,
        n_instances=4,
        iterations=1,
        oracle_calls=1,
        rng=rng,
        final=final,
        joint_registers=("K", "X"),
        success_probability=success,
        measured_for_reduction=("K", "X"),
        exact_regime=True,
    )


def deutsch_sign_discrepancy(report: RunReport) -> tuple[str, ...]:
    """Keys whose produced amplitude is the negative of the all-positive reference.

    The circuit's phase kickback makes the components with f(0) = 1 come out
    negative; populations, correlations, and entropies are unaffected.
    """
    if report.algorithm != DEUTSCH:
        raise ValueError("sign discrepancy is defined for extended Deutsch runs")
    reference = deutsch_reference_state().amplitudes
    produced = report.final_state.amplitudes
    flipped = []
    for k in range(4):
        index = (k << 2) | (balanced_bit(k) << 1)
        if (produced[index] / reference[index]).real < 0:
            flipped.append(format(k, "02b"))
    return tuple(flipped)


# --------------------------------------------------------------------------
# backdating


@dataclass(frozen=True, eq=False)
class BackdateCheck:
    """Result of replacing a final measurement by its backdated preparation."""

    kind: str  # "full" (whole key), "partial" (one solution bit), "joint" (key and solution)
    outcome_label: str
    outcome_probability: float
    preparation_deviation: float | None  # vs the expected closed-form preparation
    roundtrip_deviation: float  # forward re-application vs the projected final state
    x_marginal_deviation: float  # solution-register marginal vs uniform
    k_populations: tuple[float, ...]
    k_entropy_bits: float
    information_gain_bits: float
    exact_claim: bool
    passed: bool


def _backdate(
    report: RunReport, projector: Projector, expected: StateVector | None, exact_claim: bool
) -> BackdateCheck:
    layout, prep, gates = _components_for(report)
    final = apply(prep, gates)
    probability = qsim.outcome_probability(final, projector)
    backward = backward_preparation(gates, prep, projector)

    collapsed = collapse(final, projector)
    roundtrip = phase_aligned_deviation(collapsed, apply(backward, gates))

    x_width = layout.width("X")
    x_marginal = marginal_distribution(backward, layout.positions("X"))
    x_deviation = float(np.max(np.abs(x_marginal - 1.0 / (1 << x_width))))

    k_marginal = marginal_distribution(backward, layout.positions("K"))
    k_bits = qsim.shannon_bits(np.clip(k_marginal, 0.0, None))

    prep_deviation = phase_aligned_deviation(expected, backward) if expected is not None else None
    passed = roundtrip <= STATE_TOLERANCE and (
        not exact_claim or (prep_deviation is not None and prep_deviation <= STATE_TOLERANCE)
    )
    return BackdateCheck(
        kind="",
        outcome_label=projector.label,
        outcome_probability=probability,
        preparation_deviation=prep_deviation,
        roundtrip_deviation=roundtrip,
        x_marginal_deviation=x_deviation,
        k_populations=tuple(float(p) for p in k_marginal),
        k_entropy_bits=k_bits,
        information_gain_bits=layout.width("K") - k_bits,
        exact_claim=exact_claim,
        passed=passed,
    )


def _with_kind(check: BackdateCheck, kind: str) -> BackdateCheck:
    return dataclasses.replace(check, kind=kind)


def backdate_full(report: RunReport, outcome: int | str) -> BackdateCheck:
    """Backdate the reduction induced by reading the whole key register.

    The backdated preparation must be the fixed-instance preparation
    |k>_K (uniform)_X (minus)_F: the key collapses to a sharp value while the
    solution register stays untouched, recovering the non-extended algorithm.
    Because every gate uses K only as a control, this holds at any N; the
    deviations are recorded rather than assumed.
    """
    if report.algorithm != GROVER:
        raise ValueError("full backdating is defined for extended Grover runs")
    layout, _, _ = grover_components(report.n, report.iterations)
    k_text = format(outcome, f"0{report.n}b") if isinstance(outcome, int) else str(outcome)
    projector = Projector.on_registers(layout, {"K": k_text})
    expected = prepare(layout, {"K": k_text, "X": "uniform", "F": "minus"})
    return _with_kind(
        _backdate(report, projector, expected, exact_claim=True), "full"
    )


def backdate_partial(report: RunReport, bit_index: int, value: int) -> BackdateCheck:
    """Backdate the reduction induced by reading one bit of the solution register.

    Exact only in the N = 4 regime: the backdated preparation keeps X uniform
    and narrows K to the even superposition of the two keys whose designated
    bit matches, for an information gain of one bit.
    """
    if report.algorithm != GROVER or report.N != 4:
        raise ValueError("partial backdating is defined for N = 4 extended Grover runs")
    if value not in (0, 1):
        raise ValueError("value must be 0 or 1")
    layout, _, _ = grover_components(report.n, report.iterations)
    projector = Projector.on_register_bit(layout, "X", bit_index, value)

    matching = [k for k in range(4) if ((k >> (1 - bit_index)) & 1) == value]
    parts = [
        prepare(layout, {"K": k, "X": "uniform", "F": "minus"}).amplitudes for k in matching
    ]
    expected = StateVector(layout=layout, amplitudes=sum(parts) / math.sqrt(len(parts)))
    return _with_kind(
        _backdate(report, projector, expected, exact_claim=report.exact_regime), "partial"
    )


def backdate_joint(report: RunReport, k_outcome: str, x_outcome: str) -> BackdateCheck:
    """Backdate the reduction from reading key and solution together.

    Away from the exact N = 4 regime the measured solution need not equal the
    key, and reverse evolution then disturbs the solution register: its
    marginal is no longer uniform. The deviation is informational.
    """
    if report.algorithm != GROVER:
        raise ValueError("joint backdating is defined for extended Grover runs")
    layout, _, _ = grover_components(report.n, report.iterations)
    projector = Projector.on_registers(layout, {"K": k_outcome, "X": x_outcome})
    return _with_kind(_backdate(report, projector, None, exact_claim=False), "joint")


# --------------------------------------------------------------------------
# population <-> flux correspondence


@dataclass(frozen=True)
class CorrespondenceReport:
    """Populations of an entangled pair mapped onto the single-variable circuit.

    Machine coordinates are (X, Y) = (population of the first qubit's |0>
    level, population of the second qubit's |0> level), scaled by Q = 1; the
    X coordinate rides the branch labeled x = 1 and Y the branch labeled
    x = 0. Before measurement the half/half populations satisfy conservation
    but break mutual exclusion with residual one half -- exactly the resting
    circuit's inability to sit between solutions. After measurement the
    coordinates land on a valid one-hot configuration.
    """

    pre_populations: dict[str, tuple[float, ...]]
    pre_coordinates: tuple[float, float]
    pre_linear_residual: float
    pre_nonlinear_residual: float
    pre_valid: bool
    outcome: str
    outcome_distribution: tuple[float, float]
    post_populations: dict[str, tuple[float, ...]]
    post_coordinates: tuple[float, float]
    post_max_residual: float
    post_valid: bool
    assignment: dict[str, int]


def _pair_coordinates(populations: dict[str, tuple[float, ...]]) -> tuple[float, float]:
    return populations["X"][0], populations["Y"][0]


def correspondence_check(rng: DeterministicRNG) -> CorrespondenceReport:
    """Measure one qubit of (|01> + |10>)/sqrt(2) and replay it on the flux circuit."""
    layout = RegisterLayout((("X", 1), ("Y", 1)))
    amps = np.zeros(4, dtype=complex)
    amps[0b01] = amps[0b10] = 2.0**-0.5
    state = StateVector(layout=layout, amplitudes=amps)

    circuit = build_circuit(BooleanSystem(variables=("x",), equations=()))

    def flux_for(coordinates: tuple[float, float]) -> FluxConfiguration:
        x_coord, y_coord = coordinates
        # branch order in the circuit is (x=0, x=1); Y rides x=0, X rides x=1
        return FluxConfiguration(q=1.0, fluxes=((y_coord, x_coord),))

    pre_populations = register_populations(state)
    pre_coordinates = _pair_coordinates(pre_populations)
    pre_validity = validate_configuration(circuit, flux_for(pre_coordinates))

    result = measure(state, ("X",), rng)
    post_populations = register_populations(result.post_state)
    post_coordinates = _pair_coordinates(post_populations)
    post_validity = validate_configuration(circuit, flux_for(post_coordinates))
    assignment = machine.configuration_to_assignment(circuit, flux_for(post_coordinates))

    # the isomorphism this check exists to exhibit: projection lands the
    # coordinates on a valid configuration, coherence kept them off one
    assert post_validity.valid, "post-measurement populations must satisfy the circuit"
    assert not pre_validity.valid, "pre-measurement populations must violate mutual exclusion"

    return CorrespondenceReport(
        pre_populations=pre_populations,
        pre_coordinates=pre_coordinates,
        pre_linear_residual=pre_validity.quadruple_linear[0],
        pre_nonlinear_residual=pre_validity.quadruple_nonlinear[0],
        pre_valid=pre_validity.valid,
        outcome=result.outcome,
        outcome_distribution=(float(result.distribution[0]), float(result.distribution[1])),
        post_populations=post_populations,
        post_coordinates=post_coordinates,
        post_max_residual=post_validity.max_residual,
        post_valid=post_validity.valid,
        assignment=assignment,
    )
