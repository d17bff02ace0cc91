"""Dense statevector simulator over named qubit registers.

Basis convention (fixed for bit-exact report comparison): registers occupy
consecutive qubit positions in declaration order, bits within a register are
big-endian, and basis index ``i`` spells the registers' values read left to
right. So for layout K(2), X(2), F(1), amplitude ``0b01011`` is
|01>_K |01>_X |1>_F.

States are values: operations return fresh StateVector instances and never
mutate their input. Every gate offered here (H, X, Z, CNOT, the two oracle
blocks, inversion-about-mean diffusion) is an involution, so a gate sequence
is inverted by reversing it; backward evolution relies on this.

Measurement is computational-basis only. Exact outcome distributions are
always available alongside sampled outcomes, which keeps verification
deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .rng import DeterministicRNG

NORM_TOLERANCE = 1e-12
EIGENVALUE_FLOOR = 1e-14  # eigenvalues/populations below this count as 0 in entropies
ZERO_PROBABILITY = 1e-24  # outcomes below this probability are treated as impossible
MAX_QUBITS = 24
MAX_REDUCED_QUBITS = 12

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


class ZeroProbabilityError(ValueError):
    """Conditioning on an outcome whose probability is (numerically) zero."""


def _norm(amps: np.ndarray) -> float:
    # pairwise summation: BLAS nrm2 accumulates sequentially and drifts past
    # 1e-12 on 2**21 entries, which would fail honest states at the norm check
    return math.sqrt(float(np.sum(np.abs(amps) ** 2)))


@dataclass(frozen=True)
class RegisterLayout:
    """Named registers at consecutive qubit positions."""

    registers: tuple[tuple[str, int], ...]

    def __post_init__(self):
        names = [name for name, _ in self.registers]
        if len(set(names)) != len(names):
            raise ValueError("register names must be unique")
        if any(width < 1 for _, width in self.registers):
            raise ValueError("register widths must be >= 1")
        if self.n_qubits > MAX_QUBITS:
            raise ValueError(f"layout exceeds {MAX_QUBITS} qubits")

    @property
    def n_qubits(self) -> int:
        return sum(width for _, width in self.registers)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.registers)

    def width(self, name: str) -> int:
        for reg, width in self.registers:
            if reg == name:
                return width
        raise KeyError(f"no register {name!r}")

    def offset(self, name: str) -> int:
        pos = 0
        for reg, width in self.registers:
            if reg == name:
                return pos
            pos += width
        raise KeyError(f"no register {name!r}")

    def positions(self, name: str) -> tuple[int, ...]:
        start = self.offset(name)
        return tuple(range(start, start + self.width(name)))


def _basis_vector(width: int, value: int) -> np.ndarray:
    if not 0 <= value < (1 << width):
        raise ValueError(f"basis value {value} out of range for {width} qubits")
    vec = np.zeros(1 << width, dtype=complex)
    vec[value] = 1.0
    return vec


def _register_vector(width: int, spec) -> np.ndarray:
    """Per-register preparation: basis value, bitstring, or a named product state."""
    if isinstance(spec, int):
        return _basis_vector(width, spec)
    if isinstance(spec, str):
        if spec in ("uniform", "plus"):
            return np.full(1 << width, (1 << width) ** -0.5, dtype=complex)
        if spec == "minus":
            # tensor power of (|0> - |1>)/sqrt(2): sign is the parity of the value
            size = 1 << width
            signs = np.array([(-1) ** bin(v).count("1") for v in range(size)], dtype=complex)
            return signs * size**-0.5
        if set(spec) <= {"0", "1"} and len(spec) == width:
            return _basis_vector(width, int(spec, 2))
        raise ValueError(f"cannot prepare register of width {width} from {spec!r}")
    raise TypeError(f"unsupported preparation spec {spec!r}")


@dataclass(frozen=True, eq=False)
class StateVector:
    layout: RegisterLayout
    amplitudes: np.ndarray  # complex128 of length 2**n_qubits; treat as immutable

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        if amps.shape != (1 << self.layout.n_qubits,):
            raise ValueError("amplitude vector does not match layout size")
        norm = _norm(amps)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"state norm {norm} is not 1 within {NORM_TOLERANCE}")

    @property
    def n_qubits(self) -> int:
        return self.layout.n_qubits

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def prepare(layout: RegisterLayout, values: Mapping[str, int | str]) -> StateVector:
    """Product-state preparation, one spec per register.

    Specs: an integer or bitstring for a basis state, ``"uniform"``/``"plus"``
    for the even superposition, ``"minus"`` for the (|0>-|1>)/sqrt(2) tensor
    power used for phase kickback.
    """
    missing = [name for name in layout.names if name not in values]
    if missing:
        raise ValueError(f"missing preparation for registers: {missing}")
    amps = np.ones(1, dtype=complex)
    for name, width in layout.registers:
        amps = np.kron(amps, _register_vector(width, values[name]))
    return StateVector(layout=layout, amplitudes=amps)


# --------------------------------------------------------------------------
# gates


@dataclass(frozen=True)
class Gate:
    """A primitive unitary; all kinds defined here are involutions.

    ``targets`` are global qubit positions. For ``oracle_delta`` they are the
    key register's qubits, then the query register's, then the flag qubit,
    with ``width`` giving the (equal) register width. For ``oracle_deutsch``
    they are (k0, k1, query, flag). For ``diffusion`` they are the contiguous
    positions of the reflected register.
    """

    kind: str
    targets: tuple[int, ...]
    width: int = 0


def hadamard(qubit: int) -> Gate:
    return Gate("h", (qubit,))


def pauli_x(qubit: int) -> Gate:
    return Gate("x", (qubit,))


def pauli_z(qubit: int) -> Gate:
    return Gate("z", (qubit,))


def cnot(control: int, target: int) -> Gate:
    if control == target:
        raise ValueError("control and target must differ")
    return Gate("cnot", (control, target))


def oracle_delta(layout: RegisterLayout, key: str, query: str, flag: str) -> Gate:
    """|k>|x>|b> -> |k>|x>|b xor equal(k, x)>; key and query must have equal width."""
    kw, qw = layout.width(key), layout.width(query)
    if kw != qw:
        raise ValueError(f"register widths differ: {key}={kw}, {query}={qw}")
    if layout.width(flag) != 1:
        raise ValueError("flag register must be one qubit")
    targets = layout.positions(key) + layout.positions(query) + layout.positions(flag)
    return Gate("oracle_delta", targets, width=kw)


def oracle_deutsch(layout: RegisterLayout, key: str, query: str, flag: str) -> Gate:
    """|k>|x>|b> -> |k>|x>|b xor f_k(x)> with f_k(x) = bit x of the 2-bit key.

    The key is read as (f(0), f(1)): key 00 and 11 are the constant functions,
    01 and 10 the balanced ones.
    """
    if layout.width(key) != 2 or layout.width(query) != 1 or layout.width(flag) != 1:
        raise ValueError("deutsch oracle needs key width 2, query width 1, flag width 1")
    targets = layout.positions(key) + layout.positions(query) + layout.positions(flag)
    return Gate("oracle_deutsch", targets)


def diffusion(layout: RegisterLayout, register: str) -> Gate:
    """Inversion about the mean, acting on one register and fixing the rest."""
    return Gate("diffusion", layout.positions(register))


GateSequence = tuple[Gate, ...]


def _bit_weight(n: int, position: int) -> int:
    return 1 << (n - 1 - position)


def _extract(indices: np.ndarray, n: int, positions: tuple[int, ...]) -> np.ndarray:
    """Register value (big-endian over contiguous positions) of each basis index."""
    shift = n - positions[-1] - 1
    mask = (1 << len(positions)) - 1
    return (indices >> shift) & mask


def _apply_gate(amps: np.ndarray, n: int, gate: Gate) -> np.ndarray:
    if gate.kind in ("h", "x", "z"):
        q = gate.targets[0]
        cube = amps.reshape(1 << q, 2, -1)
        out = np.empty_like(cube)
        if gate.kind == "h":
            out[:, 0, :] = (cube[:, 0, :] + cube[:, 1, :]) * _INV_SQRT2
            out[:, 1, :] = (cube[:, 0, :] - cube[:, 1, :]) * _INV_SQRT2
        elif gate.kind == "x":
            out[:, 0, :] = cube[:, 1, :]
            out[:, 1, :] = cube[:, 0, :]
        else:
            out[:, 0, :] = cube[:, 0, :]
            out[:, 1, :] = -cube[:, 1, :]
        return out.reshape(-1)

    if gate.kind == "diffusion":
        first = gate.targets[0]
        width = 1 << len(gate.targets)
        cube = amps.reshape(1 << first, width, -1)
        # reduce over a contiguous axis: pairwise summation keeps the norm
        # drift below 1e-12 even after dozens of rounds on 2**21 amplitudes
        mean = np.ascontiguousarray(np.moveaxis(cube, 1, -1)).sum(axis=-1) / width
        return (2.0 * mean[:, None, :] - cube).reshape(-1)

    indices = np.arange(amps.size)
    if gate.kind == "cnot":
        control, target = gate.targets
        hit = (indices >> (n - 1 - control)) & 1 == 1
    elif gate.kind == "oracle_delta":
        w = gate.width
        key = _extract(indices, n, gate.targets[:w])
        query = _extract(indices, n, gate.targets[w : 2 * w])
        target = gate.targets[-1]
        hit = key == query
    elif gate.kind == "oracle_deutsch":
        k0, k1, query, target = gate.targets
        f0 = (indices >> (n - 1 - k0)) & 1
        f1 = (indices >> (n - 1 - k1)) & 1
        x = (indices >> (n - 1 - query)) & 1
        hit = np.where(x == 0, f0, f1) == 1
    else:
        raise ValueError(f"unknown gate kind {gate.kind!r}")
    out = amps.copy()
    flipped = indices ^ _bit_weight(n, target)
    out[hit] = amps[flipped[hit]]
    return out


def apply(state: StateVector, gates: Iterable[Gate]) -> StateVector:
    """Run a gate sequence; unitary, so the norm is preserved."""
    amps = state.amplitudes
    n = state.n_qubits
    for gate in gates:
        amps = _apply_gate(amps, n, gate)
    return StateVector(layout=state.layout, amplitudes=amps)


def inverted(gates: Iterable[Gate]) -> GateSequence:
    """Inverse sequence; valid because every gate kind is an involution."""
    return tuple(reversed(tuple(gates)))


# --------------------------------------------------------------------------
# measurement and projection


def _measured_positions(layout: RegisterLayout, registers: Iterable[str]) -> tuple[int, ...]:
    wanted = set(registers)
    unknown = wanted - set(layout.names)
    if unknown:
        raise KeyError(f"unknown registers: {sorted(unknown)}")
    if not wanted:
        raise ValueError("at least one register required")
    # layout order regardless of the order given, so outcome bits read naturally
    positions: tuple[int, ...] = ()
    for name in layout.names:
        if name in wanted:
            positions += layout.positions(name)
    return positions


def marginal_distribution(state: StateVector, qubits: tuple[int, ...]) -> np.ndarray:
    """Exact Born distribution over the given qubits, big-endian in qubit order."""
    n = state.n_qubits
    probs = state.probabilities().reshape([2] * n)
    others = [p for p in range(n) if p not in qubits]
    return probs.transpose(list(qubits) + others).reshape(1 << len(qubits), -1).sum(axis=1)


class MeasurementResult(NamedTuple):
    outcome: str
    post_state: StateVector
    distribution: np.ndarray  # exact, indexed by outcome value
    qubits: tuple[int, ...]


def measure(state: StateVector, registers: Iterable[str], rng: DeterministicRNG) -> MeasurementResult:
    """Projective measurement of whole registers in the computational basis.

    The outcome is sampled from the exact distribution, which is returned as
    well; the post state is the renormalized projection. Outcome bits follow
    layout order.
    """
    qubits = _measured_positions(state.layout, registers)
    distribution = marginal_distribution(state, qubits)
    draw = rng.random()
    cumulative = np.cumsum(distribution)
    value = int(np.searchsorted(cumulative, draw, side="right"))
    value = min(value, distribution.size - 1)
    outcome = format(value, f"0{len(qubits)}b")
    projector = Projector(qubits=qubits, bits=tuple(int(b) for b in outcome))
    post = collapse(state, projector)
    return MeasurementResult(outcome=outcome, post_state=post, distribution=distribution, qubits=qubits)


@dataclass(frozen=True)
class Projector:
    """Computational-basis projector: fixed bits on a set of qubit positions."""

    qubits: tuple[int, ...]
    bits: tuple[int, ...]
    label: str = ""

    def __post_init__(self):
        if len(self.qubits) != len(self.bits):
            raise ValueError("qubits and bits must have equal length")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("bits must be 0 or 1")

    @classmethod
    def on_registers(cls, layout: RegisterLayout, outcomes: Mapping[str, int | str]) -> "Projector":
        qubits: tuple[int, ...] = ()
        bits: tuple[int, ...] = ()
        parts = []
        for name in layout.names:
            if name not in outcomes:
                continue
            width = layout.width(name)
            value = outcomes[name]
            text = format(value, f"0{width}b") if isinstance(value, int) else str(value)
            if len(text) != width or set(text) - {"0", "1"}:
                raise ValueError(f"outcome {value!r} does not fit register {name!r}")
            qubits += layout.positions(name)
            bits += tuple(int(b) for b in text)
            parts.append(f"{name}={text}")
        if not qubits:
            raise ValueError("projector needs at least one register outcome")
        return cls(qubits=qubits, bits=bits, label=",".join(parts))

    @classmethod
    def on_register_bit(cls, layout: RegisterLayout, register: str, bit_index: int, value: int) -> "Projector":
        positions = layout.positions(register)
        if not 0 <= bit_index < len(positions):
            raise ValueError(f"bit index {bit_index} out of range for register {register!r}")
        return cls(
            qubits=(positions[bit_index],),
            bits=(value,),
            label=f"{register}[{bit_index}]={value}",
        )

    def mask(self, n: int) -> np.ndarray:
        indices = np.arange(1 << n)
        keep = np.ones(1 << n, dtype=bool)
        for position, bit in zip(self.qubits, self.bits):
            keep &= ((indices >> (n - 1 - position)) & 1) == bit
        return keep

    def apply(self, amps: np.ndarray, n: int) -> np.ndarray:
        out = amps.copy()
        out[~self.mask(n)] = 0.0
        return out


def collapse(state: StateVector, projector: Projector) -> StateVector:
    """Renormalized projection; raises if the outcome has zero probability."""
    projected = projector.apply(state.amplitudes, state.n_qubits)
    norm = _norm(projected)
    if norm * norm < ZERO_PROBABILITY:
        raise ZeroProbabilityError(f"outcome {projector.label or projector.bits} has probability ~0")
    return StateVector(layout=state.layout, amplitudes=projected / norm)


def outcome_probability(state: StateVector, projector: Projector) -> float:
    norm = _norm(projector.apply(state.amplitudes, state.n_qubits))
    return norm * norm


# --------------------------------------------------------------------------
# reduced densities and entropy


@dataclass(frozen=True, eq=False)
class ReducedDensity:
    """Reduced density operator of a register subset, with its populations."""

    registers: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self):
        trace = float(np.trace(self.matrix).real)
        if abs(trace - 1.0) > 1e-9:
            raise ValueError(f"reduced density trace {trace} != 1")
        if not np.allclose(self.matrix, self.matrix.conj().T, atol=1e-9):
            raise ValueError("reduced density is not Hermitian")

    @property
    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.matrix))

    @property
    def n_qubits(self) -> int:
        return int(round(math.log2(self.matrix.shape[0])))


def reduce(state: StateVector, registers: Iterable[str]) -> ReducedDensity:
    """Partial trace onto the given registers (layout order)."""
    registers = tuple(registers)
    qubits = _measured_positions(state.layout, registers)
    if len(qubits) > MAX_REDUCED_QUBITS:
        raise ValueError(f"reduction to more than {MAX_REDUCED_QUBITS} qubits is not supported")
    n = state.n_qubits
    others = [p for p in range(n) if p not in qubits]
    block = state.amplitudes.reshape([2] * n).transpose(list(qubits) + others)
    kept = block.reshape(1 << len(qubits), -1)
    names = tuple(name for name in state.layout.names if name in set(registers))
    return ReducedDensity(registers=names, matrix=kept @ kept.conj().T)


class EntropyBits(NamedTuple):
    von_neumann: float
    shannon: float


def shannon_bits(weights: np.ndarray) -> float:
    """Shannon entropy in bits; weights below the floor count as exact zeros."""
    probs = weights[weights > EIGENVALUE_FLOOR]
    if probs.size == 0:
        return 0.0
    # clamp the sub-ulp negative that a weight marginally above 1 produces
    return max(0.0, float(-(probs * np.log2(probs)).sum()))


def entropy(density: ReducedDensity) -> EntropyBits:
    """(von Neumann, Shannon-of-populations) in bits; the first never exceeds the second."""
    eigenvalues = np.linalg.eigvalsh(density.matrix)
    return EntropyBits(
        von_neumann=shannon_bits(np.clip(eigenvalues, 0.0, None)),
        shannon=shannon_bits(np.clip(density.populations, 0.0, None)),
    )


# --------------------------------------------------------------------------
# backward evolution


def backward_preparation(gates: GateSequence, prep: StateVector, projector: Projector) -> StateVector:
    """The preparation that forward-evolves exactly into the measured branch.

    Computed as reverse-evolution of the renormalized projected final state:
    run the sequence, project on the outcome, normalize, run the inverse
    sequence. Unit norm is imposed on the result.
    """
    collapsed = collapse(apply(prep, gates), projector)
    return apply(collapsed, inverted(gates))


def register_populations(state: StateVector) -> dict[str, tuple[float, ...]]:
    """Per-register populations: the diagonal of each register's reduced density."""
    return {
        name: tuple(float(p) for p in marginal_distribution(state, state.layout.positions(name)))
        for name in state.layout.names
    }


@dataclass(frozen=True, eq=False)
class PopulationTrajectory:
    """Forward vs backward per-register populations after every gate.

    Step 0 is before any gate; the last backward step equals the
    post-measurement populations by construction.
    """

    registers: tuple[str, ...]
    projector_label: str
    outcome_probability: float
    forward: tuple[dict[str, tuple[float, ...]], ...]
    backward: tuple[dict[str, tuple[float, ...]], ...]

    @property
    def steps(self) -> int:
        return len(self.forward)


def trajectory_populations(
    gates: GateSequence, prep: StateVector, projector: Projector
) -> PopulationTrajectory:
    """Record both evolutions the measurement outcome stitches together."""
    forward_states = [prep]
    for gate in gates:
        forward_states.append(apply(forward_states[-1], (gate,)))
    probability = outcome_probability(forward_states[-1], projector)

    backward_states = [backward_preparation(gates, prep, projector)]
    for gate in gates:
        backward_states.append(apply(backward_states[-1], (gate,)))

    return PopulationTrajectory(
        registers=prep.layout.names,
        projector_label=projector.label or str(tuple(zip(projector.qubits, projector.bits))),
        outcome_probability=probability,
        forward=tuple(register_populations(s) for s in forward_states),
        backward=tuple(register_populations(s) for s in backward_states),
    )


# --------------------------------------------------------------------------
# distribution tools


def joint_distribution(state: StateVector, registers: Iterable[str]) -> np.ndarray:
    """Exact joint outcome distribution over registers, layout-ordered bits."""
    return marginal_distribution(state, _measured_positions(state.layout, registers))


def deferred_measurement_distributions(
    prep: StateVector,
    gates: GateSequence,
    early: Iterable[str],
    late: Iterable[str],
) -> tuple[np.ndarray, np.ndarray]:
    """Joint (early, late) distributions: measure early before vs after the gates.

    Both are computed exactly. When the gates touch the early registers only
    as controls the two agree, so a measurement there commutes with the
    sequence and can be deferred or backdated at will.
    """
    early = tuple(early)
    late = tuple(late)
    early_positions = _measured_positions(prep.layout, early)
    width = len(early_positions)

    final = apply(prep, gates)
    direct = joint_distribution(final, early + late)

    early_distribution = marginal_distribution(prep, early_positions)
    deferred = np.zeros_like(direct)
    late_size = direct.size >> width
    for value in range(1 << width):
        p_early = float(early_distribution[value])
        if p_early < ZERO_PROBABILITY:
            continue
        bits = tuple(int(b) for b in format(value, f"0{width}b"))
        branch = collapse(prep, Projector(qubits=early_positions, bits=bits))
        conditional = joint_distribution(apply(branch, gates), late)
        deferred[value * late_size : (value + 1) * late_size] = p_early * conditional
    return deferred, direct


def phase_aligned_deviation(reference: StateVector | np.ndarray, candidate: StateVector | np.ndarray) -> float:
    """Max amplitude deviation after aligning the physically meaningless global phase."""
    ref = reference.amplitudes if isinstance(reference, StateVector) else np.asarray(reference)
    cand = candidate.amplitudes if isinstance(candidate, StateVector) else np.asarray(candidate)
    overlap = np.vdot(ref, cand)
    if abs(overlap) > 1e-15:
        cand = cand * (overlap.conjugate() / abs(overlap))
    return float(np.max(np.abs(cand - ref)))
