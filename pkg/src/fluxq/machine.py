"""Idealized flux circuit that solves a NAND system in one nondeterministic stroke.

A BooleanSystem compiles to a circuit: one quadruple of parallel branches per
equation, each branch labeled by a satisfying row of that equation's truth
table, plus a two-branch group for every variable no equation constrains.
A flux configuration assigns a non-negative flux to every branch and a total
input flux Q. The circuit's constraint algebra is:

* per quadruple, conservation   sum(flux) = Q,
* per quadruple, mutual exclusion   sum(flux**2) = Q**2,
* per linkage, conservation of the flux carried by one (variable, value)
  label across the quadruples that share it.

For non-negative fluxes the two quadruple constraints force exactly one
branch to carry all of Q (one-hot lemma), so any valid configuration with
Q > 0 spells out a satisfying assignment. Pushing the input from Q = 0 to
Q > 0 therefore "computes" a solution; which one is nondeterministic, and
this module samples it (uniformly by default -- a declared choice, since the
physics picks no distribution).

No continuous dynamics are simulated; only the constraint algebra and the
discrete transition carry computational content.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .boolsys import Assignment, BooleanSystem, validate_assignment
from .rng import DeterministicRNG

DEFAULT_TOLERANCE = 1e-12
QUADRUPLE_CAP = 16

_NAND_ROWS = ((0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, 0))


class MachineError(Exception):
    pass


class NoMotionError(MachineError):
    """The system is unsatisfiable: no valid configuration with Q > 0 exists."""


class ConfigurationError(MachineError):
    """A configuration that cannot be decoded into an assignment."""


class CircuitTooLargeError(MachineError):
    """Exhaustive configuration enumeration refused above the quadruple cap."""


@dataclass(frozen=True)
class Branch:
    quadruple_index: int
    label: dict[str, int]  # variable -> bit, all distinct variables of the equation


@dataclass(frozen=True)
class LinkageConstraint:
    """Flux labeled (variable=value) is conserved between two quadruples.

    Branch index sets list, on each side, exactly the branches whose label
    assigns that value. A side may be empty: the constraint then pins the
    other side's flux to zero.
    """

    variable: str
    value: int
    left_quadruple: int
    left_branches: tuple[int, ...]
    right_quadruple: int
    right_branches: tuple[int, ...]


@dataclass(frozen=True)
class MachineCircuit:
    quadruples: tuple[tuple[Branch, ...], ...]
    linkage_constraints: tuple[LinkageConstraint, ...]
    source_system: BooleanSystem

    @property
    def n_quadruples(self) -> int:
        return len(self.quadruples)


@dataclass(frozen=True)
class FluxConfiguration:
    q: float
    fluxes: tuple[tuple[float, ...], ...]  # parallel to circuit.quadruples

    def __post_init__(self):
        if self.q < 0:
            raise ValueError("input flux Q must be non-negative")
        if any(f < 0 for quad in self.fluxes for f in quad):
            raise ValueError("branch fluxes must be non-negative")


@dataclass(frozen=True)
class ValidityReport:
    valid: bool
    zero_flux_regime: bool
    quadruple_linear: tuple[float, ...]
    quadruple_nonlinear: tuple[float, ...]
    linkage: tuple[float, ...]
    max_residual: float = field(init=False, default=0.0)

    def __post_init__(self):
        residuals = (*self.quadruple_linear, *self.quadruple_nonlinear, *self.linkage)
        object.__setattr__(self, "max_residual", max(residuals, default=0.0))


def flux_residuals(values, q: float) -> tuple[float, float]:
    """Conservation and mutual-exclusion residuals of one branch group.

    Returns (|sum(v) - q|, |sum(v**2) - q**2|). For non-negative values and
    q > 0 both vanish iff exactly one value equals q and the rest are zero.
    """
    linear = abs(sum(values) - q)
    nonlinear = abs(sum(v * v for v in values) - q * q)
    return linear, nonlinear


def build_circuit(sys: BooleanSystem) -> MachineCircuit:
    """Compile a BooleanSystem into its flux circuit.

    Each equation yields a quadruple whose branches are the satisfying rows of
    its truth table; when an equation repeats a variable name, rows that would
    assign that name two different values are not realizable as labels and are
    dropped (a NOT gate, ``x2 = NAND(x1, x1)``, keeps 2 of the 4 rows). Every
    unconstrained variable yields a two-branch group labeled value 0 / value 1,
    so configurations always decode to total assignments.

    Linkage constraints chain consecutive occurrences of each
    (variable, value) pair over the quadruples containing the variable;
    conservation is transitive, so chaining is equivalent to all-pairs.
    """
    quadruples: list[tuple[Branch, ...]] = []
    quad_vars: list[tuple[str, ...]] = []

    for eq in sys.equations:
        index = len(quadruples)
        branches = []
        for row in _NAND_ROWS:
            label: dict[str, int] = {}
            consistent = True
            for name, bit in zip((eq.a, eq.b, eq.c), row):
                if label.get(name, bit) != bit:
                    consistent = False
                    break
                label[name] = bit
            if consistent:
                branches.append(Branch(quadruple_index=index, label=label))
        quadruples.append(tuple(branches))
        quad_vars.append(eq.variables())

    for name in sys.free_variables():
        index = len(quadruples)
        quadruples.append(
            (
                Branch(quadruple_index=index, label={name: 0}),
                Branch(quadruple_index=index, label={name: 1}),
            )
        )
        quad_vars.append((name,))

    constraints: list[LinkageConstraint] = []
    for variable in sys.variables:
        occurrences = [i for i, names in enumerate(quad_vars) if variable in names]
        for left, right in zip(occurrences, occurrences[1:]):
            for value in (0, 1):
                constraints.append(
                    LinkageConstraint(
                        variable=variable,
                        value=value,
                        left_quadruple=left,
                        left_branches=tuple(
                            j for j, b in enumerate(quadruples[left]) if b.label.get(variable) == value
                        ),
                        right_quadruple=right,
                        right_branches=tuple(
                            j for j, b in enumerate(quadruples[right]) if b.label.get(variable) == value
                        ),
                    )
                )

    return MachineCircuit(
        quadruples=tuple(quadruples),
        linkage_constraints=tuple(constraints),
        source_system=sys,
    )


def validate_configuration(
    circuit: MachineCircuit, cfg: FluxConfiguration, tol: float = DEFAULT_TOLERANCE
) -> ValidityReport:
    """Check a configuration against the full constraint algebra.

    With Q effectively zero (Q <= tol) the circuit is at rest and validity
    means every flux is zero within tolerance.
    """
    if len(cfg.fluxes) != circuit.n_quadruples or any(
        len(flux) != len(quad) for flux, quad in zip(cfg.fluxes, circuit.quadruples)
    ):
        raise ValueError("configuration does not match circuit dimensions")

    linear = []
    nonlinear = []
    for flux in cfg.fluxes:
        lin, non = flux_residuals(flux, cfg.q)
        linear.append(lin)
        nonlinear.append(non)

    linkage = []
    for c in circuit.linkage_constraints:
        left = sum(cfg.fluxes[c.left_quadruple][j] for j in c.left_branches)
        right = sum(cfg.fluxes[c.right_quadruple][j] for j in c.right_branches)
        linkage.append(abs(left - right))

    zero_regime = cfg.q <= tol
    if zero_regime:
        valid = all(f <= tol for flux in cfg.fluxes for f in flux)
    else:
        valid = all(r <= tol for r in (*linear, *nonlinear, *linkage))

    return ValidityReport(
        valid=valid,
        zero_flux_regime=zero_regime,
        quadruple_linear=tuple(linear),
        quadruple_nonlinear=tuple(nonlinear),
        linkage=tuple(linkage),
    )


def configuration_to_assignment(circuit: MachineCircuit, cfg: FluxConfiguration) -> Assignment:
    """Decode a valid configuration with Q > 0 into the assignment it spells.

    In each quadruple the one branch carrying more than Q/2 contributes its
    label; the merged labels must be consistent and satisfy the source system.
    Violations mean an invalid configuration slipped past tolerance.
    """
    if cfg.q <= 0:
        raise ConfigurationError("assignment decoding requires Q > 0")
    threshold = cfg.q / 2
    merged: Assignment = {}
    for quad, flux in zip(circuit.quadruples, cfg.fluxes):
        hot = [branch for branch, f in zip(quad, flux) if f > threshold]
        if len(hot) != 1:
            raise ConfigurationError(
                f"quadruple {quad[0].quadruple_index if quad else '?'}: "
                f"expected exactly one branch above Q/2, found {len(hot)}"
            )
        for name, bit in hot[0].label.items():
            if merged.get(name, bit) != bit:
                raise ConfigurationError(f"conflicting values for {name!r} across quadruples")
            merged[name] = bit
    if not validate_assignment(circuit.source_system, merged):
        raise ConfigurationError("decoded assignment does not satisfy the source system")
    return merged


def _one_hot(circuit: MachineCircuit, selection: tuple[int, ...], q: float) -> FluxConfiguration:
    return FluxConfiguration(
        q=q,
        fluxes=tuple(
            tuple(q if j == chosen else 0.0 for j in range(len(quad)))
            for quad, chosen in zip(circuit.quadruples, selection)
        ),
    )


def _consistent_selections(
    circuit: MachineCircuit,
    quad_order: list[int],
    branch_orders: list[list[int]],
    first_only: bool,
) -> list[tuple[int, ...]]:
    """Backtracking over one branch per quadruple with value propagation.

    Selections are one-hot by construction, so the quadruple constraints hold
    exactly; linkage constraints reduce to "quadruples sharing a variable
    agree on its value", which is what the partial-assignment filter enforces.
    """
    selections: list[tuple[int, ...]] = []
    chosen: dict[int, int] = {}

    def extend(pos: int, assignment: Assignment) -> bool:
        if pos == len(quad_order):
            selections.append(tuple(chosen[i] for i in range(circuit.n_quadruples)))
            return first_only
        quad_index = quad_order[pos]
        quad = circuit.quadruples[quad_index]
        for j in branch_orders[quad_index]:
            label = quad[j].label
            if any(assignment.get(name, bit) != bit for name, bit in label.items()):
                continue
            chosen[quad_index] = j
            if extend(pos + 1, {**assignment, **label}):
                return True
            del chosen[quad_index]
        return False

    extend(0, {})
    return selections


def enumerate_configurations(circuit: MachineCircuit, q: float) -> list[FluxConfiguration]:
    """All valid configurations at input flux q > 0, in deterministic order.

    By the one-hot lemma these are exactly the one-branch-per-quadruple
    selections that respect every linkage constraint.
    """
    if q <= 0:
        raise ValueError("enumeration requires q > 0")
    if circuit.n_quadruples > QUADRUPLE_CAP:
        raise CircuitTooLargeError(
            f"{circuit.n_quadruples} quadruples exceeds enumeration cap {QUADRUPLE_CAP}"
        )
    order = list(range(circuit.n_quadruples))
    branch_orders = [list(range(len(quad))) for quad in circuit.quadruples]
    selections = _consistent_selections(circuit, order, branch_orders, first_only=False)
    return [_one_hot(circuit, sel, q) for sel in selections]


def sample_transition(
    circuit: MachineCircuit, q: float, rng: DeterministicRNG, mode: str = "exact"
) -> FluxConfiguration:
    """One stroke of the input piston: a random valid configuration at flux q.

    ``exact`` mode draws uniformly over all valid configurations (requires the
    circuit to fit the enumeration cap). ``fast`` mode runs randomized-order
    backtracking with propagation; it scales further but is NOT uniform over
    solutions, which reports must flag.
    """
    if q <= 0:
        raise ValueError("the transition requires q > 0")
    if mode == "exact":
        configurations = enumerate_configurations(circuit, q)
        if not configurations:
            raise NoMotionError("no motion possible")
        return rng.choice(configurations)
    if mode == "fast":
        order = list(range(circuit.n_quadruples))
        rng.shuffle(order)
        branch_orders = []
        for quad in circuit.quadruples:
            indices = list(range(len(quad)))
            rng.shuffle(indices)
            branch_orders.append(indices)
        selections = _consistent_selections(circuit, order, branch_orders, first_only=True)
        if not selections:
            raise NoMotionError("no motion possible")
        return _one_hot(circuit, selections[0], q)
    raise ValueError(f"unknown mode {mode!r}")


def oscillate(
    circuit: MachineCircuit, steps: int, rng: DeterministicRNG, mode: str = "exact"
) -> list[Assignment]:
    """Assignments from ``steps`` independent transitions.

    Step k uses the child stream ``rng.split(k)``, so samples can be
    reproduced (or computed in parallel) individually.
    """
    if steps <= 0:
        raise ValueError("steps must be positive")
    results = []
    for k in range(steps):
        cfg = sample_transition(circuit, 1.0, rng.split(k), mode=mode)
        results.append(configuration_to_assignment(circuit, cfg))
    return results
