"""Request/response models for the HTTP service.

Divergent closed-form values (infinite at zero ridge) cross the wire as
JSON ``null``; finite values are plain numbers.  Requests reject unknown
fields so typos fail loudly instead of silently falling back to defaults.
"""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..model import TEACHERS


class PointRequest(BaseModel):
    """One grid point of the model: aspect ratios plus run parameters."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    alpha_f: float = Field(gt=0)
    alpha_p: float = Field(gt=0)
    m: int = Field(default=512, ge=1)
    snr: float = Field(default=10.0, gt=0)
    lam: float = Field(default=1e-6, gt=0, alias="lambda")
    teacher: str = "linear"

    @field_validator("teacher")
    @classmethod
    def _known_teacher(cls, name):
        if name not in TEACHERS:
            known = ", ".join(sorted(TEACHERS))
            raise ValueError(f"unknown teacher {name!r} (known: {known})")
        return name


class QuantitySet(BaseModel):
    """Values of the four error quantities; null marks a divergent value."""

    model_config = ConfigDict(extra="forbid")

    train: Optional[float]
    test: Optional[float]
    bias2: Optional[float]
    variance: Optional[float]


class TheoryResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    alpha_f: float
    alpha_p: float
    regime: str
    ridgeless: QuantitySet
    finite_lambda: QuantitySet
    lambda_bar: float
    sigma_y2: float
    n_f: int
    n_p: int
    m: int
    realized_alpha_f: float
    realized_alpha_p: float


class SimulateRequest(PointRequest):
    trials: Optional[int] = Field(default=None, ge=2)
    seed: int = Field(default=0, ge=0)


class StatModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mean: float
    stderr: float


class SimStats(BaseModel):
    model_config = ConfigDict(extra="forbid")

    train: StatModel
    test: StatModel
    bias2: StatModel
    variance: StatModel


class SimulateResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    alpha_f: float
    alpha_p: float
    theory: QuantitySet
    sim: SimStats
    trials: int
    seed: int
    sigma_y2: float
    n_f: int
    n_p: int
    m: int


class ZSet(BaseModel):
    model_config = ConfigDict(extra="forbid")

    train: float
    test: float
    bias2: float
    variance: float


class ValidateResponse(SimulateResponse):
    z: ZSet
    max_abs_z: float
    ok: bool


class SpectrumRequest(PointRequest):
    n_points: int = Field(default=512, ge=2)


class SpectrumResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    alpha_f: float
    alpha_p: float
    xs: list[float]
    rho: list[float]
    edge_min: float
    edge_max: float
    f_zero: float
    bulk_mass: float


class HealthResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    status: str
    version: str
