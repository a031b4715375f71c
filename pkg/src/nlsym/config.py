"""Experiment configuration: a single JSON document validated against a strict schema."""
from __future__ import annotations

import hashlib
import json
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, model_validator

from nlsym.kernels import kernel_from_spec
from nlsym.lattice import domain_from_spec, mask_from_domain
from nlsym.semilinear import nonlinearity_from_spec

__all__ = [
    "ExperimentConfig",
    "load_config",
    "config_hash",
    "canonical_json",
    "build_kernel",
    "build_mask",
    "build_nonlinearity",
]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class KernelBlock(_Strict):
    family: Literal["fractional", "radial_profile", "truncated_fractional", "anisotropic"]
    alpha: Optional[float] = None
    p: float = Field(2.0, ge=1.0)
    truncation_radius: Optional[PositiveFloat] = None
    constant: Literal["paper", "unit"] = "unit"
    profile: Literal["power", "constant", "two_power"] = "power"
    beta: Optional[float] = None
    value: PositiveFloat = 1.0

    @model_validator(mode="after")
    def _needs(self):
        if self.family in ("fractional", "anisotropic", "truncated_fractional") and self.alpha is None:
            raise ValueError(f"kernel family {self.family!r} needs alpha")
        if self.family == "truncated_fractional" and self.truncation_radius is None:
            raise ValueError("truncated_fractional needs truncation_radius")
        if self.family == "radial_profile":
            if self.profile in ("power", "two_power") and self.alpha is None:
                raise ValueError(f"profile {self.profile!r} needs alpha")
            if self.profile == "two_power" and self.beta is None:
                raise ValueError("profile 'two_power' needs beta")
            if self.profile == "constant" and self.truncation_radius is None:
                raise ValueError("profile 'constant' needs truncation_radius")
        return self


class DomainShape(_Strict):
    shape: Literal["interval", "box", "ball_p", "union"]
    lower: Optional[List[float]] = None
    upper: Optional[List[float]] = None
    center: Optional[List[float]] = None
    radius: Optional[PositiveFloat] = None
    p: float = Field(2.0, ge=1.0)
    parts: Optional[List["DomainShape"]] = None

    @model_validator(mode="after")
    def _needs(self):
        if self.shape in ("interval", "box"):
            if self.lower is None or self.upper is None:
                raise ValueError(f"shape {self.shape!r} needs lower and upper")
            if self.shape == "interval" and (len(self.lower) != 1 or len(self.upper) != 1):
                raise ValueError("interval bounds must have one entry")
        if self.shape == "ball_p" and (self.center is None or self.radius is None):
            raise ValueError("shape 'ball_p' needs center and radius")
        if self.shape == "union" and not self.parts:
            raise ValueError("shape 'union' needs parts")
        return self

    @property
    def dim(self):
        if self.shape in ("interval", "box"):
            return len(self.lower)
        if self.shape == "ball_p":
            return len(self.center)
        return self.parts[0].dim


class DomainBlock(DomainShape):
    h: PositiveFloat
    padding: int = Field(8, ge=0)


class NonlinearityBlock(_Strict):
    family: Literal["constant", "linear_plus_constant", "logistic", "custom_table"] = "constant"
    value: float = 1.0
    slope: float = 0.0
    rate: float = 1.0
    capacity: PositiveFloat = 1.0
    source: float = 0.0
    u: Optional[List[float]] = None
    f: Optional[List[float]] = None

    @model_validator(mode="after")
    def _needs(self):
        if self.family == "custom_table" and (self.u is None or self.f is None):
            raise ValueError("custom_table needs u and f node lists")
        return self


class SolverBlock(_Strict):
    tol: PositiveFloat = 1e-10
    damping: float = Field(1.0, gt=0.0, le=1.0)
    max_iter: int = Field(200, ge=1)


class SweepBlock(_Strict):
    tol_zero: PositiveFloat = 1e-10
    tol_pos: PositiveFloat = 1e-8
    tol_margin: PositiveFloat = 1e-10
    residual_gate: PositiveFloat = 1e-8
    lambda_grid: Literal["half_step"] = "half_step"


class SpectralBlock(_Strict):
    tol: PositiveFloat = 1e-10
    max_iter: int = Field(10_000, ge=1)
    scan_scales: List[PositiveFloat] = Field(default_factory=list)


class VerifyBlock(_Strict):
    samples: int = Field(1000, ge=1)
    oracle_cells: int = Field(8, ge=1)


class OutputBlock(_Strict):
    dir: str = "out"
    prefix: str = ""


class ExperimentConfig(_Strict):
    kernel: KernelBlock
    domain: DomainBlock
    nonlinearity: NonlinearityBlock = NonlinearityBlock()
    solver: SolverBlock = SolverBlock()
    sweep: SweepBlock = SweepBlock()
    spectral: SpectralBlock = SpectralBlock()
    verify: VerifyBlock = VerifyBlock()
    output: OutputBlock = OutputBlock()
    seed: int = 0

    @model_validator(mode="after")
    def _dims(self):
        if self.domain.dim not in (1, 2):
            raise ValueError("domain dimension must be 1 or 2")
        return self


def load_config(text):
    """Parse and validate a JSON config; raises ``json.JSONDecodeError`` or ``pydantic.ValidationError``."""
    return ExperimentConfig.model_validate(json.loads(text))


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def config_hash(cfg):
    blob = json.dumps(cfg.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _plain(block):
    return {k: v for k, v in block.model_dump().items() if v is not None}


def build_kernel(cfg):
    return kernel_from_spec(_plain(cfg.kernel), cfg.domain.dim)


def _domain_dict(block):
    d = _plain(block)
    d.pop("h", None)
    d.pop("padding", None)
    return d


def build_mask(cfg, scale=1.0):
    """Rasterized domain; ``scale`` shrinks the domain and the spacing together."""
    dom = domain_from_spec(_domain_dict(cfg.domain))
    if scale != 1.0:
        from nlsym.lattice import Domain

        base = dom
        dom = Domain(base.dim, lambda x, b=base, s=scale: b(x / s),
                     tuple(scale * v for v in base.lower), tuple(scale * v for v in base.upper),
                     {**base.description, "scale": scale})
    return mask_from_domain(dom, cfg.domain.h * scale, cfg.domain.padding)


def build_nonlinearity(cfg):
    return nonlinearity_from_spec(_plain(cfg.nonlinearity))
