# qsvrg/core/schemas.py

from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

TRACE_SCHEMA_VERSION = 1


class OracleKind(str, Enum):
    LEAST_SQUARES = "least_squares"
    RIDGE = "ridge"
    LDA = "lda"


class Method(str, Enum):
    QSVRG = "qsvrg"
    SGD_UNIFORM = "sgd_uniform"
    SGD_NONUNIFORM = "sgd_nonuniform"
    SAG_NONUNIFORM = "sag_nonuniform"
    SVRG_NONUNIFORM = "svrg_nonuniform"
    LSVRG_UNIFORM = "lsvrg_uniform"


class VerifySuite(str, Enum):
    UNBIASEDNESS = "unbiasedness"
    THEOREM = "theorem"
    BIAS = "bias"
    VARIANCE = "variance"
    SAMPLER = "sampler"
    CONTRACTION = "contraction"
    ALL = "all"


class SolverConfig(BaseModel):
    method: Method
    alpha: Optional[float] = Field(default=None, gt=0)
    m: Optional[int] = Field(default=None, ge=1)
    l: Optional[int] = Field(default=None, ge=1)  # noqa: E741
    target_passes: float = Field(default=50.0, gt=0)
    epochs: Optional[int] = Field(default=None, ge=1)
    seed: int = Field(default=0, ge=0)
    stream_id: int = Field(default=0, ge=0)
    checkpoint_passes: List[float] = Field(default_factory=list)

    @field_validator("checkpoint_passes")
    @classmethod
    def _ascending(cls, value: List[float]) -> List[float]:
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("checkpoint_passes must be strictly ascending")
        return value

    @model_validator(mode="after")
    def _step_size_range(self) -> "SolverConfig":
        # L = 1 for every oracle after normalization
        if self.method == Method.QSVRG and self.alpha is not None and self.alpha > 1.0:
            raise ValueError(f"qsvrg step size must lie in (0, 1/L] = (0, 1], got {self.alpha}")
        return self


class SyntheticSpec(BaseModel):
    n: int = Field(..., ge=1)
    d: int = Field(..., ge=1)
    kappa: float = Field(..., ge=1)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _tall(self) -> "SyntheticSpec":
        if self.n < self.d:
            raise ValueError(f"synthetic problems need n >= d, got n={self.n}, d={self.d}")
        return self

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "SyntheticSpec":
        """Parse the CLI form "n,d,kappa" (optionally ",seed")"""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) not in (3, 4):
            raise ValueError(f"expected n,d,kappa[,seed], got {text!r}")
        if len(parts) == 4:
            seed = int(parts[3])
        return cls(n=int(parts[0]), d=int(parts[1]), kappa=float(parts[2]), seed=seed)

    def label(self) -> str:
        return f"synthetic:{self.n},{self.d},{self.kappa!r},{self.seed}"

    @classmethod
    def from_label(cls, label: str) -> "SyntheticSpec":
        prefix, _, rest = label.partition(":")
        if prefix != "synthetic" or not rest:
            raise ValueError(f"not a synthetic dataset label: {label!r}")
        return cls.parse(rest)


class ProblemSpec(BaseModel):
    kind: OracleKind = OracleKind.RIDGE
    lambda_scale: float = Field(default=1.0, gt=0)
    lda_class: int = Field(default=1, ge=1)
    lda_lambda: float = Field(default=0.0, ge=0)

    @classmethod
    def parse(cls, text: str, lambda_scale: float = 1.0) -> "ProblemSpec":
        """Parse "least_squares", "ridge[:scale]" or "lda[:class[:lambda]]" """
        name, _, rest = text.partition(":")
        kind = OracleKind(name)
        if kind == OracleKind.RIDGE:
            return cls(kind=kind, lambda_scale=float(rest) if rest else lambda_scale)
        if kind == OracleKind.LDA:
            cls_part, _, lam_part = rest.partition(":")
            return cls(
                kind=kind,
                lda_class=int(cls_part) if cls_part else 1,
                lda_lambda=float(lam_part) if lam_part else 0.0,
            )
        return cls(kind=kind)

    def label(self) -> str:
        if self.kind == OracleKind.RIDGE:
            return f"ridge:{self.lambda_scale!r}"
        if self.kind == OracleKind.LDA:
            return f"lda:{self.lda_class}:{self.lda_lambda!r}"
        return self.kind.value


class ExperimentConfig(BaseModel):
    dataset: Optional[Path] = None
    synthetic: Optional[SyntheticSpec] = None
    problem: ProblemSpec = Field(default_factory=ProblemSpec)
    methods: List[Method] = Field(..., min_length=1)
    passes_budget: float = Field(default=50.0, gt=0)
    seeds: List[int] = Field(default_factory=lambda: [0], min_length=1)
    seed_base: int = Field(default=0, ge=0)
    output_path: Optional[Path] = None
    workers: int = Field(default=1, ge=1)
    alpha: Optional[float] = Field(default=None, gt=0, le=1.0)
    m: Optional[int] = Field(default=None, ge=1)
    l: Optional[int] = Field(default=None, ge=1)  # noqa: E741
    checkpoint_start: Optional[float] = Field(default=None, gt=0)
    checkpoint_ratio: Optional[float] = Field(default=None, gt=1)

    @model_validator(mode="after")
    def _consistent(self) -> "ExperimentConfig":
        if (self.dataset is None) == (self.synthetic is None):
            raise ValueError("exactly one of dataset or synthetic must be given")
        if (self.m is None) != (self.l is None):
            raise ValueError("m and l must be given together")
        return self

    def dataset_label(self) -> str:
        if self.synthetic is not None:
            return self.synthetic.label()
        return str(self.dataset)


class TraceFile(BaseModel):
    """One solver run; serialized as a single JSON line by the trace store"""

    model_config = ConfigDict(populate_by_name=True)

    v: int = TRACE_SCHEMA_VERSION
    dataset: str
    n: int
    d: int
    problem: str
    lambda_: float = Field(..., alias="lambda")
    method: Method
    seed: int
    alpha: float
    l: Optional[int] = None  # noqa: E741
    m: Optional[int] = None
    g_star: float
    residual: float
    points: List[Tuple[float, float]]
    passes: float
    seed_base: int = 0
    gradient_count: int = 0
    stream_id: Optional[int] = None
    checkpoint_start: Optional[float] = None
    checkpoint_ratio: Optional[float] = None

    def label(self) -> str:
        return f"{self.method.value}#{self.seed}"


class CheckResult(BaseModel):
    name: str
    bound: float
    measured: float
    passed: bool
    detail: str = ""

    @property
    def margin(self) -> float:
        return self.bound - self.measured


class VerificationReport(BaseModel):
    suite: VerifySuite
    checks: List[CheckResult] = Field(default_factory=list)
    elapsed_seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]
