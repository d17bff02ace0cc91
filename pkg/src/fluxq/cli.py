"""Command-line front end.

Thin client over :mod:`fluxq.commands` -- the same layer the HTTP service
wraps -- so a report is identical whichever way it was requested. Exit codes:
0 success, 1 unsatisfiable problem or failed check, 2 usage/parse/runtime
error. Identical (command, flags, seed) produce byte-identical JSON.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__, commands
from .boolsys import ParseError
from .commands import RunConfig
from .machine import MachineError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluxq",
        description="Flux-machine solving of NAND systems and extended quantum search, "
        "with entropy accounting and reproducible reports.",
    )
    parser.add_argument("--version", action="version", version=f"fluxq {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, default=0, help="64-bit unsigned seed (default 0)")
        p.add_argument("--format", dest="fmt", choices=("text", "json"), default="text")
        p.add_argument("--tol", dest="tolerance", type=float, default=1e-12, help="residual tolerance")

    p = sub.add_parser("machine", help="compile a NAND problem file and solve it by flux transitions")
    p.add_argument("--input", required=True, help="problem file (OUT = NAND(IN1, IN2) lines)")
    p.add_argument("--samples", type=int, default=0, help="number of transition samples to draw")
    p.add_argument("--mode", choices=("exact", "fast"), default="exact")
    common(p)

    p = sub.add_parser("grover", help="run extended search over N = 2**n instances")
    p.add_argument("--n", type=int, default=2, help="qubits per register (N = 2**n)")
    p.add_argument("--iterations", type=int, default=None, help="override the round count")
    p.add_argument("--backdate-bit", type=int, default=None, choices=(0, 1), help="solution bit to backdate (N=4)")
    p.add_argument("--backdate-value", type=int, default=None, choices=(0, 1), help="bit value to backdate (N=4)")
    common(p)

    p = sub.add_parser("deutsch", help="run extended balanced-or-constant classification")
    common(p)

    p = sub.add_parser("trajectory", help="forward vs backward populations around a measurement")
    p.add_argument("--algorithm", choices=("pair", "grover", "deutsch"), default="pair")
    p.add_argument("--n", type=int, default=2, help="qubits per register (grover only)")
    p.add_argument("--iterations", type=int, default=None, help="round count (grover only)")
    p.add_argument("--outcome", default=None, help="measured bits; sampled from the seed when omitted")
    common(p)

    p = sub.add_parser("serve", help="serve the same commands over HTTP")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    fields = {
        "command": args.command,
        "seed": args.seed,
        "fmt": args.fmt,
        "tolerance": args.tolerance,
    }
    if args.command == "machine":
        with open(args.input, encoding="utf-8") as handle:
            fields["problem_text"] = handle.read()
        fields["input_path"] = args.input
        fields["samples"] = args.samples
        fields["mode"] = args.mode
    elif args.command == "grover":
        fields["n"] = args.n
        fields["iterations"] = args.iterations
        fields["backdate_bit"] = args.backdate_bit
        fields["backdate_value"] = args.backdate_value
    elif args.command == "trajectory":
        fields["algorithm"] = args.algorithm
        fields["n"] = args.n
        fields["iterations"] = args.iterations
        fields["outcome"] = args.outcome
    return RunConfig(**fields)


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


def _format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_text(report: dict) -> str:
    lines = [f"fluxq {report['command']} (schema {report['schema_version']})"]
    config = ", ".join(f"{k}={_format_value(v)}" for k, v in report["config"].items())
    lines.append(f"config: {config}")
    results = report["results"]

    def emit(key: str, value) -> None:
        lines.append(f"  {key}: {_format_value(value)}")

    lines.append("results:")
    for key, value in results.items():
        if key in ("forward", "backward"):
            lines.append(f"  {key}:")
            for step, populations in enumerate(value):
                for name, probs in populations.items():
                    rendered = " ".join(repr(p) for p in probs)
                    lines.append(f"    step {step} {name}: {rendered}")
        elif key == "distribution" and isinstance(value, dict):
            lines.append("  distribution:")
            for label, probability in value.items():
                lines.append(f"    {label}: {repr(probability)}")
        elif key in ("backdate_full", "backdate_partial") and isinstance(value, list):
            lines.append(f"  {key}:")
            for entry in value:
                rendered = ", ".join(f"{k}={_format_value(v)}" for k, v in entry.items())
                lines.append(f"    {rendered}")
        elif key == "samples" and isinstance(value, list) and len(value) > 20:
            emit("samples", f"({len(value)} drawn; see sample_frequencies)")
        elif key == "final_state":
            if "amplitudes" in value:
                emit(key, f"{len(value['amplitudes'])} amplitudes (json format carries them)")
            else:
                emit(key, f"sha256={value['sha256']} ({value['n_amplitudes']} amplitudes)")
        elif isinstance(value, dict):
            rendered = ", ".join(f"{k}={_format_value(v)}" for k, v in value.items())
            emit(key, rendered or "{}")
        else:
            emit(key, value)

    lines.append("checks:")
    for check in report["checks"]:
        verdict = "PASS" if check["pass"] else "FAIL"
        lines.append(
            f"  [{verdict}] {check['name']}: expected {_format_value(check['expected'])}, "
            f"actual {_format_value(check['actual'])}"
        )
    return "\n".join(lines) + "\n"


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service import app

        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    try:
        cfg = _config_from_args(args)
        report = commands.run(cfg)
    except ParseError as exc:
        print(f"fluxq: parse error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, MachineError) as exc:
        print(f"fluxq: error: {exc}", file=sys.stderr)
        return 2

    output = render_json(report) if cfg.fmt == "json" else render_text(report)
    sys.stdout.write(output)
    return commands.exit_code(report)


if __name__ == "__main__":
    sys.exit(main())
