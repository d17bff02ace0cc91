"""Command layer: run configs in, canonical report dicts out.

Both front ends (CLI and HTTP service) call these functions, so a report is
identical no matter which transport carried it. Reports follow one schema:

    {schema_version, command, config, results, checks: [{name, expected, actual, pass}]}

Everything in a report is a plain JSON type, insertion-ordered, and fully
determined by (command, config, seed): serializing the same run twice gives
byte-identical output. Floats are emitted with round-trip precision.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from . import SCHEMA_VERSION, __version__, algorithms, boolsys, machine, qsim
from .rng import DeterministicRNG

INFORMATIONAL = "informational"


@dataclass
class RunConfig:
    command: str
    input_path: str | None = None
    problem_text: str | None = None
    n: int = 2
    seed: int = 0
    samples: int = 0
    mode: str = "exact"
    fmt: str = "text"
    tolerance: float = 1e-12
    iterations: int | None = None
    backdate_bit: int | None = None
    backdate_value: int | None = None
    algorithm: str = "pair"
    outcome: str | None = None

    def __post_init__(self):
        if not 0 <= self.seed < (1 << 64):
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.samples < 0:
            raise ValueError("samples must be non-negative")
        if self.mode not in ("exact", "fast"):
            raise ValueError("mode must be 'exact' or 'fast'")
        if self.fmt not in ("text", "json"):
            raise ValueError("format must be 'text' or 'json'")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


def _check(name: str, expected, actual, passed: bool) -> dict:
    return {"name": name, "expected": expected, "actual": actual, "pass": bool(passed)}


def _info(name: str, note: str, actual) -> dict:
    return _check(name, f"{INFORMATIONAL} ({note})", actual, True)


def _bound(tol: float) -> str:
    return f"<= {tol:g}"


def _report(command: str, config: dict, results: dict, checks: list[dict]) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": {"tool_version": __version__, **config},
        "results": results,
        "checks": checks,
    }


def all_checks_pass(report: dict) -> bool:
    return all(check["pass"] for check in report["checks"])


def exit_code(report: dict) -> int:
    """0 on success; 1 when unsatisfiable or a check failed."""
    if report["command"] == "machine" and not report["results"]["satisfiable"]:
        return 1
    return 0 if all_checks_pass(report) else 1


def _state_fingerprint(state: qsim.StateVector) -> dict:
    amps = state.amplitudes
    if state.n_qubits <= 10:
        return {"amplitudes": [[float(a.real), float(a.imag)] for a in amps]}
    digest = hashlib.sha256(np.round(amps, 12).tobytes()).hexdigest()
    return {"sha256": digest, "n_amplitudes": int(amps.size)}


def _joint_labels(distribution: np.ndarray, k_width: int, x_width: int) -> dict[str, float]:
    labeled = {}
    for value, probability in enumerate(distribution):
        bits = format(value, f"0{k_width + x_width}b")
        labeled[f"k={bits[:k_width]},x={bits[k_width:]}"] = float(probability)
    return labeled


# --------------------------------------------------------------------------
# machine


def run_machine(cfg: RunConfig) -> dict:
    if cfg.problem_text is None:
        raise ValueError("machine command requires problem text")
    system = boolsys.parse_system(cfg.problem_text, allow_free_only=True)
    circuit = machine.build_circuit(system)
    rng = DeterministicRNG(cfg.seed)

    configurations = machine.enumerate_configurations(circuit, 1.0)
    validities = [machine.validate_configuration(circuit, c, cfg.tolerance) for c in configurations]
    solutions = [machine.configuration_to_assignment(circuit, c) for c in configurations]
    satisfiable = bool(configurations)

    def bits_of(assignment: dict[str, int]) -> str:
        return "".join(str(assignment[v]) for v in system.variables)

    machine_bits = sorted(bits_of(asg) for asg in solutions)
    oracle_bits = sorted(bits_of(asg) for asg in boolsys.enumerate_solutions(system))
    oracle_match = machine_bits == oracle_bits

    n_quads = circuit.n_quadruples
    per_quadruple = [
        [
            max((v.quadruple_linear[i] for v in validities), default=0.0),
            max((v.quadruple_nonlinear[i] for v in validities), default=0.0),
        ]
        for i in range(n_quads)
    ]
    max_residual = max((v.max_residual for v in validities), default=0.0)
    all_valid = all(v.valid for v in validities)

    sample_bits: list[str] = []
    samples_are_solutions = True
    if cfg.samples > 0 and satisfiable:
        for asg in machine.oscillate(circuit, cfg.samples, rng, mode=cfg.mode):
            text = bits_of(asg)
            sample_bits.append(text)
            samples_are_solutions &= text in oracle_bits
    frequencies = {}
    for text in sorted(set(sample_bits)):
        frequencies[text] = sample_bits.count(text)

    results = {
        "variables": list(system.variables),
        "equations": [eq.render() for eq in system.equations],
        "free_variables": list(system.free_variables()),
        "quadruples": n_quads,
        "linkage_constraints": len(circuit.linkage_constraints),
        "satisfiable": satisfiable,
        "message": "" if satisfiable else "no motion possible",
        "solutions": machine_bits,
        "bruteforce_solutions": oracle_bits,
        "per_quadruple_residuals": per_quadruple,
        "max_residual": float(max_residual),
        "sampler": cfg.mode + ("" if cfg.mode == "exact" else " (not uniform over solutions)"),
        "samples": sample_bits,
        "sample_frequencies": frequencies,
    }
    checks = [
        _check("solutions_match_bruteforce", True, oracle_match, oracle_match),
        _check(
            "configurations_valid",
            _bound(cfg.tolerance),
            float(max_residual),
            all_valid,
        ),
    ]
    if cfg.samples > 0 and satisfiable:
        checks.append(_check("samples_are_solutions", True, samples_are_solutions, samples_are_solutions))

    config = {
        "seed": cfg.seed,
        "tolerance": cfg.tolerance,
        "input": cfg.input_path or "<inline>",
        "problem_sha256": hashlib.sha256(cfg.problem_text.encode()).hexdigest(),
        "samples": cfg.samples,
        "mode": cfg.mode,
    }
    return _report("machine", config, results, checks)


# --------------------------------------------------------------------------
# grover


def _backdate_dict(check: algorithms.BackdateCheck) -> dict:
    entry = {
        "kind": check.kind,
        "outcome": check.outcome_label,
        "outcome_probability": float(check.outcome_probability),
        "roundtrip_deviation": float(check.roundtrip_deviation),
        "x_marginal_deviation": float(check.x_marginal_deviation),
        "k_populations": [float(p) for p in check.k_populations],
        "k_entropy_bits": float(check.k_entropy_bits),
        "information_gain_bits": float(check.information_gain_bits),
        "exact_claim": check.exact_claim,
        "passed": check.passed,
    }
    if check.preparation_deviation is not None:
        entry["preparation_deviation"] = float(check.preparation_deviation)
    return entry


def _metric_checks(report: algorithms.RunReport, tol: float) -> list[dict]:
    half_gap = abs(report.delta_s_nominal - 0.5 * report.delta_r)
    checks = [
        _check(
            "reduction_entropy_bits",
            float(np.log2(report.N)),
            float(report.delta_r),
            abs(report.delta_r - np.log2(report.N)) <= algorithms.METRIC_TOLERANCE,
        ),
        _check(
            "gain_half_of_reduction_entropy",
            _bound(algorithms.METRIC_TOLERANCE),
            float(half_gap),
            report.half_rule_ok,
        ),
        _check(
            "gain_bounded_by_reduction_entropy",
            True,
            report.inequality_ok,
            report.inequality_ok,
        ),
    ]
    return checks


def run_grover(cfg: RunConfig) -> dict:
    if (cfg.backdate_bit is None) != (cfg.backdate_value is None):
        raise ValueError("backdate-bit and backdate-value must be given together")
    rng = DeterministicRNG(cfg.seed)
    report = algorithms.run_extended_grover(cfg.n, rng, iterations=cfg.iterations)
    n, big_n, tol = report.n, report.N, cfg.tolerance
    exact = report.exact_regime

    checks = [
        _check("oracle_calls", report.iterations, report.oracle_calls, report.oracle_calls == report.iterations),
    ]

    target_deviation = (
        qsim.phase_aligned_deviation(algorithms.grover_target_state(n), report.final_state)
        if big_n == 4
        else None
    )
    if exact:
        checks.append(
            _check("correlated_state_deviation", _bound(tol), float(target_deviation), target_deviation <= tol)
        )
        checks.append(
            _check(
                "solution_matches_key_probability",
                1.0,
                float(report.success_probability),
                abs(report.success_probability - 1.0) <= tol,
            )
        )
        checks.append(
            _check(
                "information_gain_nominal_bits",
                1.0,
                float(report.delta_s_nominal),
                abs(report.delta_s_nominal - 1.0) <= algorithms.METRIC_TOLERANCE,
            )
        )
        checks.append(
            _check(
                "information_gain_operational_bits",
                1.0,
                float(report.delta_s_operational),
                abs(report.delta_s_operational - 1.0) <= algorithms.METRIC_TOLERANCE,
            )
        )
    else:
        checks.append(
            _info("solution_matches_key_probability", "exact claim only at N=4", float(report.success_probability))
        )
        checks.append(_info("information_gain_nominal_bits", "extrapolated beyond N=4", float(report.delta_s_nominal)))
        checks.append(
            _info(
                "information_gain_operational_bits",
                "extrapolated query model",
                float(report.delta_s_operational),
            )
        )
    checks.extend(_metric_checks(report, tol))

    # backdating the full key readout: exact at any size, asserted in the exact regime
    backdates = []
    full_targets = (
        [format(k, f"0{n}b") for k in range(big_n)] if big_n <= 8 else [report.sampled_outcome[:n]]
    )
    for k_text in full_targets:
        check = algorithms.backdate_full(report, k_text)
        backdates.append(_backdate_dict(check))
        worst = max(check.preparation_deviation, check.roundtrip_deviation)
        if exact:
            checks.append(_check(f"backdate_full_K={k_text}", _bound(tol), float(worst), worst <= tol))
        else:
            checks.append(_info(f"backdate_full_K={k_text}", "exact claim only at N=4", float(worst)))

    partials = []
    if big_n == 4:
        combos = (
            [(cfg.backdate_bit, cfg.backdate_value)]
            if cfg.backdate_bit is not None
            else [(b, v) for b in (0, 1) for v in (0, 1)]
        )
        for bit, value in combos:
            check = algorithms.backdate_partial(report, bit, value)
            partials.append(_backdate_dict(check))
            worst = max(check.preparation_deviation, check.roundtrip_deviation)
            ok = (
                worst <= tol
                and abs(check.k_entropy_bits - 1.0) <= algorithms.METRIC_TOLERANCE
                and check.x_marginal_deviation <= tol
            )
            checks.append(_check(f"backdate_partial_X[{bit}]={value}", _bound(tol), float(worst), ok))
    elif cfg.backdate_bit is not None:
        raise ValueError("partial backdating is only defined for N = 4 (n = 2)")

    joint_backdate = None
    if not exact:
        check = algorithms.backdate_joint(report, report.sampled_outcome[:n], report.sampled_outcome[n:])
        joint_backdate = _backdate_dict(check)

    deferred_deviation = None
    if n <= 5:
        _, prep, gates = algorithms.grover_components(n, report.iterations)
        early, late = qsim.deferred_measurement_distributions(prep, gates, ("K",), ("X",))
        deferred_deviation = float(np.max(np.abs(early - late)))
        checks.append(
            _check("deferred_key_measurement_agreement", _bound(tol), deferred_deviation, deferred_deviation <= tol)
        )

    results = {
        "N": big_n,
        "n": n,
        "iterations": report.iterations,
        "oracle_calls": report.oracle_calls,
        "success_probability": float(report.success_probability),
        "sampled_outcome": {"k": report.sampled_outcome[:n], "x": report.sampled_outcome[n:]},
        "delta_s_nominal_bits": float(report.delta_s_nominal),
        "delta_s_operational_bits": float(report.delta_s_operational),
        "delta_r_bits": float(report.delta_r),
        "delta_r_von_neumann_bits": float(report.delta_r_von_neumann),
        "final_state": _state_fingerprint(report.final_state),
        "backdate_full": backdates,
        "backdate_partial": partials,
    }
    if joint_backdate is not None:
        results["backdate_joint_informational"] = joint_backdate
    if report.joint_distribution.size <= 256:
        results["distribution"] = _joint_labels(report.joint_distribution, n, n)
    else:
        results["distribution_note"] = "omitted (outcome space larger than 256)"
    if deferred_deviation is not None:
        results["deferred_measurement_max_deviation"] = deferred_deviation

    config = {
        "seed": cfg.seed,
        "tolerance": tol,
        "n": cfg.n,
        "iterations_requested": cfg.iterations,
        "backdate_bit": cfg.backdate_bit,
        "backdate_value": cfg.backdate_value,
    }
    return _report("grover", config, results, checks)


# --------------------------------------------------------------------------
# deutsch


def run_deutsch(cfg: RunConfig) -> dict:
    rng = DeterministicRNG(cfg.seed)
    report = algorithms.run_extended_deutsch(rng)
    tol = cfg.tolerance

    expected = np.zeros(8)
    for k in range(4):
        expected[(k << 1) | algorithms.balanced_bit(k)] = 0.25
    distribution_deviation = float(np.max(np.abs(report.joint_distribution - expected)))

    reference = algorithms.deutsch_reference_state()
    population_deviation = float(
        np.max(np.abs(np.abs(report.final_state.amplitudes) - np.abs(reference.amplitudes)))
    )
    flipped = algorithms.deutsch_sign_discrepancy(report)

    _, prep, gates = algorithms.deutsch_components()
    early, late = qsim.deferred_measurement_distributions(prep, gates, ("K",), ("X",))
    deferred_deviation = float(np.max(np.abs(early - late)))

    checks = [
        _check("oracle_calls", 1, report.oracle_calls, report.oracle_calls == 1),
        _check(
            "balanced_pair_distribution_deviation",
            _bound(tol),
            distribution_deviation,
            distribution_deviation <= tol,
        ),
        _check(
            "population_match_to_reference",
            _bound(tol),
            population_deviation,
            population_deviation <= tol,
        ),
        _info(
            "reference_sign_discrepancy",
            "phase kickback negates the keys with f(0)=1; populations unaffected",
            "components " + ",".join(flipped),
        ),
        _check(
            "information_gain_nominal_bits",
            1.0,
            float(report.delta_s_nominal),
            abs(report.delta_s_nominal - 1.0) <= algorithms.METRIC_TOLERANCE,
        ),
        _check(
            "information_gain_operational_bits",
            1.0,
            float(report.delta_s_operational),
            abs(report.delta_s_operational - 1.0) <= algorithms.METRIC_TOLERANCE,
        ),
        _info(
            "reduction_entropy_von_neumann_bits",
            "measured reduction is pure; pointer-dephased value is primary",
            float(report.delta_r_von_neumann),
        ),
        _check(
            "deferred_key_measurement_agreement", _bound(tol), deferred_deviation, deferred_deviation <= tol
        ),
    ]
    checks[6:6] = _metric_checks(report, tol)

    results = {
        "N": report.N,
        "n": report.n,
        "oracle_calls": report.oracle_calls,
        "sampled_outcome": {"k": report.sampled_outcome[:2], "x": report.sampled_outcome[2:]},
        "distribution": _joint_labels(report.joint_distribution, 2, 1),
        "balanced_bit_by_key": {format(k, "02b"): algorithms.balanced_bit(k) for k in range(4)},
        "delta_s_nominal_bits": float(report.delta_s_nominal),
        "delta_s_operational_bits": float(report.delta_s_operational),
        "delta_r_bits": float(report.delta_r),
        "delta_r_von_neumann_bits": float(report.delta_r_von_neumann),
        "sign_discrepancy_components": list(flipped),
        "final_state": _state_fingerprint(report.final_state),
        "deferred_measurement_max_deviation": deferred_deviation,
    }
    config = {"seed": cfg.seed, "tolerance": tol}
    return _report("deutsch", config, results, checks)


# --------------------------------------------------------------------------
# trajectory


def _trajectory_setup(cfg: RunConfig, rng: DeterministicRNG):
    if cfg.algorithm == "pair":
        layout = qsim.RegisterLayout((("X", 1), ("Y", 1)))
        amps = np.zeros(4, dtype=complex)
        amps[0b01] = amps[0b10] = 2.0**-0.5
        prep = qsim.StateVector(layout=layout, amplitudes=amps)
        gates: qsim.GateSequence = ()
        measured = ("X",)
    elif cfg.algorithm == "grover":
        iterations = cfg.iterations or algorithms.grover_iterations(1 << cfg.n)
        layout, prep, gates = algorithms.grover_components(cfg.n, iterations)
        measured = ("K", "X")
    elif cfg.algorithm == "deutsch":
        layout, prep, gates = algorithms.deutsch_components()
        measured = ("K", "X")
    else:
        raise ValueError(f"unknown trajectory algorithm {cfg.algorithm!r}")

    if cfg.outcome is not None:
        text = cfg.outcome.replace(",", "").replace(" ", "")
        width = sum(layout.width(name) for name in measured)
        if len(text) != width or set(text) - {"0", "1"}:
            raise ValueError(f"outcome must be {width} bits for {cfg.algorithm}")
    else:
        text = qsim.measure(qsim.apply(prep, gates), measured, rng).outcome

    outcomes = {}
    offset = 0
    for name in measured:
        width = layout.width(name)
        outcomes[name] = text[offset : offset + width]
        offset += width
    projector = qsim.Projector.on_registers(layout, outcomes)
    return prep, gates, projector


def run_trajectory(cfg: RunConfig) -> dict:
    rng = DeterministicRNG(cfg.seed)
    prep, gates, projector = _trajectory_setup(cfg, rng)
    trajectory = qsim.trajectory_populations(gates, prep, projector)
    tol = cfg.tolerance

    collapsed = qsim.collapse(qsim.apply(prep, gates), projector)
    post_populations = qsim.register_populations(collapsed)
    final_deviation = max(
        abs(a - b)
        for name in trajectory.registers
        for a, b in zip(trajectory.backward[-1][name], post_populations[name])
    )
    prep_populations = qsim.register_populations(prep)
    initial_deviation = max(
        abs(a - b)
        for name in trajectory.registers
        for a, b in zip(trajectory.forward[0][name], prep_populations[name])
    )

    def serialize(steps) -> list[dict]:
        return [
            {name: [float(p) for p in step[name]] for name in trajectory.registers} for step in steps
        ]

    results = {
        "algorithm": cfg.algorithm,
        "registers": list(trajectory.registers),
        "steps": trajectory.steps,
        "projector": trajectory.projector_label,
        "outcome_probability": float(trajectory.outcome_probability),
        "forward": serialize(trajectory.forward),
        "backward": serialize(trajectory.backward),
    }
    checks = [
        _check(
            "backward_final_matches_post_measurement",
            _bound(tol),
            float(final_deviation),
            final_deviation <= tol,
        ),
        _check(
            "forward_initial_matches_preparation",
            _bound(tol),
            float(initial_deviation),
            initial_deviation <= tol,
        ),
    ]
    config = {
        "seed": cfg.seed,
        "tolerance": tol,
        "algorithm": cfg.algorithm,
        "n": cfg.n if cfg.algorithm == "grover" else None,
        "outcome_requested": cfg.outcome,
    }
    return _report("trajectory", config, results, checks)


RUNNERS = {
    "machine": run_machine,
    "grover": run_grover,
    "deutsch": run_deutsch,
    "trajectory": run_trajectory,
}


def run(cfg: RunConfig) -> dict:
    try:
        runner = RUNNERS[cfg.command]
    except KeyError:
        raise ValueError(f"unknown command {cfg.command!r}") from None
    return runner(cfg)
