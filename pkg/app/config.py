"""
Scenario configuration: TOML files validated by pydantic, plus environment
overrides read from the process environment (and a local .env file).
"""
import logging
import math
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Literal

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from app.errors import ConfigError, InvalidDomain, ThetaSurfaceError
from app.services.expr import HolomorphicFn, parse
from app.services.surface import Domain, SurfaceData
from app.services.weierstrass import Quadrature

load_dotenv()

logger = logging.getLogger(__name__)

FIXTURES_DIR = Path(__file__).parent / "fixtures"

# Environment
LOG_LEVEL = os.getenv("THETA_LOG_LEVEL", "INFO")
LOG_DIR = os.getenv("THETA_LOG_DIR")
OUT_DIR = os.getenv("THETA_OUT_DIR", "out")


def resolve_jobs(requested: int | None = None) -> int:
    """CLI value, else THETA_JOBS, else every core. 0 means every core."""
    if requested is None:
        raw = os.getenv("THETA_JOBS", "0")
        try:
            requested = int(raw)
        except ValueError as err:
            raise ConfigError(f"THETA_JOBS must be an integer, got {raw!r}") from err
    if requested < 0:
        raise ConfigError(f"worker count must be >= 0, got {requested}")
    return requested or os.cpu_count() or 1


class Tolerances(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    regularity: float = 1e-9
    quadrature: float = 1e-10
    quadrature_limit: int = 200
    lightlike: float = 1e-12
    monge_null: float = 1e-10
    monge_metric: float = 1e-8          # scaled by 1 + lambda^2
    frame: float = 1e-10
    curvature: float = 1e-4             # relative, scaled by 1 + |K|
    sign: float = 1e-12
    weingarten: float = 1e-4
    pair: float = 1e-5
    path: float = 1e-8
    planar: float = 1e-10
    graph: float = 1e-9
    hyperbolic: float = 1e-9
    newton_maxiter: int = 100

    @field_validator("*")
    @classmethod
    def _positive(cls, value):
        if not value > 0:
            raise ValueError("tolerances must be positive")
        return value

    def quadrature_settings(self) -> Quadrature:
        return Quadrature(epsabs=self.quadrature, limit=self.quadrature_limit)


class OutputRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["obj", "csv"]
    projection: tuple[int, int, int] | None = None

    @field_validator("projection")
    @classmethod
    def _projection_indices(cls, value):
        if value is not None and (len(set(value)) != 3 or not all(0 <= k <= 3 for k in value)):
            raise ValueError("projection needs three distinct indices in 0..3")
        return value


def _check_expression(source: str) -> str:
    try:
        parse(source)
    except ThetaSurfaceError as err:
        raise ValueError(str(err)) from err
    return source


def _check_domain(bounds) -> None:
    try:
        Domain.from_bounds(bounds)
    except InvalidDomain as err:
        raise ValueError(str(err)) from err


class ScenarioConfig(BaseModel):
    """One surface data set and the sampling/validation settings applied to it."""

    model_config = ConfigDict(extra="forbid")

    name: str = "scenario"
    description: str = ""
    a_expr: str
    mu_expr: str
    domain: tuple[float, float, float, float]
    scan_domain: tuple[float, float, float, float] | None = None
    w0: tuple[float, float]
    P: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    Q: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    thetas: list[float] = Field(default_factory=lambda: [0.0])
    grid: tuple[int, int] = (17, 17)
    h: float = 1e-3
    probe_grid: int = 64
    pair_lattice: int = 5
    tolerances: Tolerances = Field(default_factory=Tolerances)
    outputs: list[OutputRequest] = Field(
        default_factory=lambda: [OutputRequest(kind="obj"), OutputRequest(kind="csv")]
    )

    @field_validator("a_expr", "mu_expr")
    @classmethod
    def _expression(cls, value):
        return _check_expression(value)

    @field_validator("grid")
    @classmethod
    def _grid_size(cls, value):
        if min(value) < 2:
            raise ValueError(f"grid must be at least 2x2, got {value[0]}x{value[1]}")
        return value

    @field_validator("thetas")
    @classmethod
    def _finite_thetas(cls, value):
        if not value or not all(math.isfinite(t) for t in value):
            raise ValueError("thetas must be a non-empty list of finite angles")
        return value

    @field_validator("h")
    @classmethod
    def _step(cls, value):
        if not 0 < value < 0.1:
            raise ValueError(f"finite-difference step must lie in (0, 0.1), got {value}")
        return value

    @field_validator("probe_grid", "pair_lattice")
    @classmethod
    def _lattice(cls, value):
        if value < 3:
            raise ValueError("probe grids need at least 3 nodes per side")
        return value

    @model_validator(mode="after")
    def _geometry(self):
        _check_domain(self.domain)
        if self.scan_domain is not None:
            _check_domain(self.scan_domain)
        u0, v0 = self.w0
        u_min, u_max, v_min, v_max = self.domain
        if not (u_min <= u0 <= u_max and v_min <= v0 <= v_max):
            raise ValueError(f"w0 {self.w0} lies outside domain {self.domain}")
        return self

    def surface_domain(self) -> Domain:
        return Domain.from_bounds(self.domain)

    def scan(self) -> Domain:
        return Domain.from_bounds(self.scan_domain or self.domain)

    def to_surface_data(self) -> SurfaceData:
        return SurfaceData(
            a=HolomorphicFn.parse(self.a_expr),
            mu=HolomorphicFn.parse(self.mu_expr),
            domain=self.surface_domain(),
            w0=complex(*self.w0),
            P=self.P,
            Q=self.Q,
        )


def _describe(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        where = ".".join(str(p) for p in item["loc"]) or "config"
        parts.append(f"{where}: {item['msg']}")
    return "; ".join(parts)


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        with path.open("rb") as handle:
            data = tomllib.load(handle)
    except FileNotFoundError as err:
        raise ConfigError(f"config file not found: {path}") from err
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"{path}: {err}") from err
    data.setdefault("name", path.stem)
    try:
        config = ScenarioConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(f"{path}: {_describe(err)}") from err
    logger.debug(f"Loaded config {config.name} from {path}")
    return config


def example_ids() -> list[str]:
    return sorted(p.stem for p in FIXTURES_DIR.glob("*.toml"))


def load_example(example_id: str) -> ScenarioConfig:
    if example_id not in example_ids():
        raise ConfigError(f"unknown example {example_id!r}; choose from {', '.join(example_ids())}")
    return load_config(FIXTURES_DIR / f"{example_id}.toml")


def load_source(source: str) -> ScenarioConfig:
    """An example id or a path to a TOML file."""
    if source in example_ids():
        return load_example(source)
    return load_config(source)
