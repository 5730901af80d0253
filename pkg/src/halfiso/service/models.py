"""Pydantic request/response models for the service and the CLI.

Every request model forbids unknown keys, so a config file with a typo'd
field is rejected instead of silently ignored.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from ..params import WeightParams


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ParamsModel(StrictModel):
    N: int = Field(ge=2)
    k: float
    l: float
    alpha: float

    def to_domain(self) -> WeightParams:
        return WeightParams(self.N, self.k, self.l, self.alpha)


class ComparisonModel(StrictModel):
    lhs: float
    rhs: float
    relation: str
    holds: bool


class ClassifyRequest(ParamsModel):
    pass


class ClassifyResponse(StrictModel):
    params: ParamsModel
    tag: str
    conditions: Optional[dict[str, ComparisonModel]] = None
    k_ge_l_plus_1: Optional[bool] = None


class ClassifyGridRequest(StrictModel):
    N: list[int]
    k: list[float]
    l: list[float]
    alpha: list[float]


class ClassifyGridResponse(StrictModel):
    rows: list[ClassifyResponse]


class EigenRequest(StrictModel):
    N: int = Field(ge=2)
    alpha: float = Field(gt=-1.0)
    tol: float = Field(default=1e-8, gt=0.0)
    include_profiles: bool = False
    profile_points: int = Field(default=257, ge=16, le=100_000)


class EigenProfilesModel(StrictModel):
    """Eigenfunction samples: the zero-mean radial mode and the first
    angular mode, on a uniform theta grid in (0, pi/2)."""

    theta: list[float]
    radial_zero_mean: list[float]
    first_angular: list[float]


class EigenResponse(StrictModel):
    N: int
    alpha: float
    mu1: float
    mu1_closed_form: float
    mu0: float
    mu_m1: float
    lambda1_half_pi: float
    lambda1_closed_form: float
    theta_hat: Optional[float] = None
    lambda1_at_theta_hat: Optional[float] = None
    profiles: Optional[EigenProfilesModel] = None


class DomainModel(StrictModel):
    kind: Literal["half_ball", "up_axis", "on_wall"]
    radius: float = Field(default=1.0, gt=0.0)
    t: Optional[float] = None


class RatioRequest(StrictModel):
    params: ParamsModel
    domain: DomainModel


class RatioResponse(StrictModel):
    measure: float
    measure_error: float
    perimeter: float
    perimeter_error: float
    ratio: float
    radial_constant: float


class SweepRequest(StrictModel):
    params: ParamsModel
    family: Literal["up_axis", "on_wall"]
    t_min: float = Field(gt=2.0)
    t_max: float
    points: int = Field(ge=4, le=10_000)
    tail_fraction: float = Field(default=0.4, gt=0.0, le=1.0)
    jobs: int = Field(default=1, ge=1)


class SweepRowModel(StrictModel):
    t: float
    ratio: Optional[float]
    measure: Optional[float]
    perimeter: Optional[float]
    error: Optional[str] = None


class SweepResponse(StrictModel):
    rows: list[SweepRowModel]
    fitted_slope: float
    slope_stderr: float
    predicted_slope: float
    tail_start: float


class RadialWeightModel(StrictModel):
    kind: Literal["power", "exp_poly"]
    coeffs: list[float]


class CounterexampleRequest(StrictModel):
    weight: RadialWeightModel = Field(
        default_factory=lambda: RadialWeightModel(kind="exp_poly", coeffs=[1.0, -2.0, 1.0]))
    N: int = Field(default=2, ge=2)
    r0: float = Field(default=1.0, gt=0.0)
    d: Optional[float] = Field(default=None, gt=0.0)
    mc_samples: int = Field(default=0, ge=0)
    seed: int = Field(default=0, ge=0)


class CounterexampleResponse(StrictModel):
    d0: float
    d: float
    R_centered: float
    rho: float
    center: float
    perimeter_centered: float
    perimeter_offcenter: float
    relative_perimeter_margin: float
    chain: list[float]
    chain_margins: list[float]
    radius_comparison_margin: float
    corrected_radius_margin: float
    mc_measure: Optional[float] = None
    mc_stderr: Optional[float] = None


class VanishRequest(StrictModel):
    alpha_prime: float
    beta: float
    c1: float = 1.0
    c2: float = 1.0
    N: int = Field(default=2, ge=2)
    d: float = Field(default=1.0, gt=0.0)
    t_min: float = Field(gt=0.0)
    t_max: float
    points: int = Field(ge=4, le=10_000)


class VanishRowModel(StrictModel):
    t: float
    R: float
    perimeter: float


class VanishResponse(StrictModel):
    rows: list[VanishRowModel]
    tail_slope: float
    perimeter_drop: float


class VerifyRequest(StrictModel):
    only: Optional[list[str]] = None


class VerifyItemModel(StrictModel):
    cid: str
    name: str
    passed: bool
    expected_failure: bool
    details: str


class VerifyResponse(StrictModel):
    passed: bool
    items: list[VerifyItemModel]
