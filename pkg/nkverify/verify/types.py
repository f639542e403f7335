from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

DEFAULT_SAMPLES = {"structure": 10000, "immersion": 20, "sample": 1000}
EXACT_STRUCTURE_SAMPLES = 50


##########
# RUN
##########
class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seed: int = Field(default=0, ge=0, lt=2**64)
    samples: int | None = Field(default=None, gt=0)
    tol_algebraic: float = Field(default=1e-10, gt=0)
    tol_fd: float = Field(default=1e-6, gt=0)
    tol_roots: float = Field(default=1e-14, gt=0)
    backend: Literal["float", "exact"] = "float"
    format: Literal["text", "json"] = "text"
    threads: int | None = Field(default=None, gt=0)
    timing: bool = False

    def sample_count(self, command: str) -> int:
        if self.samples is not None:
            return self.samples
        if command == "structure" and self.backend == "exact":
            return EXACT_STRUCTURE_SAMPLES
        return DEFAULT_SAMPLES[command]


##########
# REPORT
##########
class ResidualSummary(BaseModel):
    count: int
    min: float
    median: float
    max: float


class CheckRecord(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    id: str
    anchor: str
    residual: float | None = None
    tol: float
    passed: bool = Field(alias="pass")
    skipped: bool = False
    note: str | None = None
    summary: ResidualSummary | None = None


class Environment(BaseModel):
    seed: int
    samples: int
    backend: str


class VerificationReport(BaseModel):
    suite: str
    checks: list[CheckRecord]
    env: Environment
    values: dict[str, float | bool | str | list[float] | None] = {}
    elapsed_ms: float | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)


##########
# CLASSIFICATION
##########
class CubicRoot(BaseModel):
    value: float
    exact: str
    multiplicity: int
    residual: float
    curvature: float
    curvature_exact: str
    immersion: str | None = None
    measured_h123: float | None = None


class AngleRelationsRecord(BaseModel):
    theta: list[str]
    lambda_residuals: list[str]
    cyclic_sum: str
    product_forms: list[str]


class ClassificationRecord(BaseModel):
    polynomial: str
    coefficients: list[int]
    roots: list[CubicRoot]
    angle_relations: AngleRelationsRecord
    checks: list[CheckRecord]
    elapsed_ms: float | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)
