"""FastAPI app exposing the command layer over HTTP.

Each endpoint wraps one command and returns the same report dict the CLI
prints as JSON; reports stay byte-identical for identical requests. Parse
errors map to 400, validation to 422; an unsatisfiable problem is still a
completed run and returns 200 with ``results.satisfiable = false``.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import SCHEMA_VERSION, __version__, commands
from ..boolsys import ParseError
from ..commands import RunConfig
from ..machine import MachineError
from .schemas import (
    Check,
    DeutschRequest,
    GroverRequest,
    MachineRequest,
    Report,
    ServiceInfo,
    TrajectoryRequest,
)


def _run(cfg: RunConfig) -> Report:
    try:
        report = commands.run(cfg)
    except ParseError as exc:
        raise HTTPException(status_code=400, detail=f"parse error: {exc}") from exc
    except (ValueError, MachineError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc
    return Report(
        schema_version=report["schema_version"],
        command=report["command"],
        config=report["config"],
        results=report["results"],
        checks=[Check.model_validate(check) for check in report["checks"]],
    )


def create_app() -> FastAPI:
    app = FastAPI(
        title="fluxq",
        version=__version__,
        description="Flux-machine solving of NAND systems and extended quantum search, "
        "with entropy accounting and reproducible reports.",
    )

    @app.get("/", response_model=ServiceInfo)
    def info() -> ServiceInfo:
        return ServiceInfo(
            name="fluxq",
            version=__version__,
            schema_version=SCHEMA_VERSION,
            commands=sorted(commands.RUNNERS),
        )

    @app.post("/machine", response_model=Report)
    def machine(request: MachineRequest) -> Report:
        return _run(
            RunConfig(
                command="machine",
                problem_text=request.problem,
                seed=request.seed,
                samples=request.samples,
                mode=request.mode,
                tolerance=request.tolerance,
            )
        )

    @app.post("/grover", response_model=Report)
    def grover(request: GroverRequest) -> Report:
        return _run(
            RunConfig(
                command="grover",
                n=request.n,
                seed=request.seed,
                iterations=request.iterations,
                backdate_bit=request.backdate_bit,
                backdate_value=request.backdate_value,
                tolerance=request.tolerance,
            )
        )

    @app.post("/deutsch", response_model=Report)
    def deutsch(request: DeutschRequest) -> Report:
        return _run(RunConfig(command="deutsch", seed=request.seed, tolerance=request.tolerance))

    @app.post("/trajectory", response_model=Report)
    def trajectory(request: TrajectoryRequest) -> Report:
        return _run(
            RunConfig(
                command="trajectory",
                algorithm=request.algorithm,
                n=request.n,
                iterations=request.iterations,
                outcome=request.outcome,
                seed=request.seed,
                tolerance=request.tolerance,
            )
        )

    return app


app = create_app()
