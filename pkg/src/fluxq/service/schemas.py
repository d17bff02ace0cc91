"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field


class MachineRequest(BaseModel):
    problem: str = Field(description="problem file contents (OUT = NAND(IN1, IN2) lines)")
    seed: int = Field(0, ge=0, lt=1 << 64)
    samples: int = Field(0, ge=0)
    mode: Literal["exact", "fast"] = "exact"
    tolerance: float = Field(1e-12, gt=0)


class GroverRequest(BaseModel):
    n: int = Field(2, ge=1, le=10, description="qubits per register; instance space is 2**n")
    seed: int = Field(0, ge=0, lt=1 << 64)
    iterations: int | None = Field(None, ge=1)
    backdate_bit: int | None = Field(None, ge=0, le=1)
    backdate_value: int | None = Field(None, ge=0, le=1)
    tolerance: float = Field(1e-12, gt=0)


class DeutschRequest(BaseModel):
    seed: int = Field(0, ge=0, lt=1 << 64)
    tolerance: float = Field(1e-12, gt=0)


class TrajectoryRequest(BaseModel):
    algorithm: Literal["pair", "grover", "deutsch"] = "pair"
    n: int = Field(2, ge=1, le=10)
    iterations: int | None = Field(None, ge=1)
    outcome: str | None = Field(None, description="measured bits; sampled from the seed when omitted")
    seed: int = Field(0, ge=0, lt=1 << 64)
    tolerance: float = Field(1e-12, gt=0)


class Check(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    name: str
    expected: Any
    actual: Any
    passed: bool = Field(alias="pass")


class Report(BaseModel):
    """The report schema shared with the CLI's JSON output."""

    schema_version: str
    command: str
    config: dict[str, Any]
    results: dict[str, Any]
    checks: list[Check]


class ServiceInfo(BaseModel):
    name: str
    version: str
    schema_version: str
    commands: list[str]
