from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from src.core import get_settings
from src.models.chain import SamplerKind

settings = get_settings()

LP_PRESETS = ("ones", "neg_ones", "ratios", "neg_ratios", "last")


class ChainConfig(BaseModel):
    """Single chain: T steps of sampler `kind` with d proposals from a 1-based initial state"""

    T: int = Field(ge=0)
    d: int = Field(ge=1)
    kind: SamplerKind
    seed: int = Field(default=settings.DEFAULT_SEED, ge=0)
    initial: int = Field(default=1, ge=1)
    lp_x: str = "ones"
    lp_y: str = "neg_ratios"

    @model_validator(mode="after")
    def check_single_proposal(self):
        if self.kind.single_proposal and self.d != 1:
            raise ValueError(f"{self.kind.value} is a single-proposal sampler, got d={self.d}")
        return self


class ChainRun(BaseModel):
    trajectory: List[int]
    evaluations: int


class RunSpec(BaseModel):
    """Parameters of a benchmark or exact-curve run"""

    subcommand: str
    spins: int = Field(default=settings.DEFAULT_SPINS, ge=1)
    beta: float = settings.DEFAULT_BETA
    samplers: List[SamplerKind] = [SamplerKind.HOBS, SamplerKind.HOMS, SamplerKind.HOPS]
    d: List[int] = [1, 2, 4, 8]
    steps: int = Field(default=settings.DEFAULT_STEPS, ge=0)
    chains: int = Field(default=settings.DEFAULT_CHAINS, ge=1)
    seed: int = Field(default=settings.DEFAULT_SEED, ge=0)
    out: Optional[Path] = None
    lp_x: str = "ones"
    lp_y: str = "neg_ratios"
    couplings: Optional[Path] = None
    initial: int = Field(default=1, ge=1)
    workers: int = Field(default=settings.WORKERS, ge=1)

    @field_validator("samplers", mode="before")
    @classmethod
    def parse_samplers(cls, value):
        if isinstance(value, str):
            value = [item for item in value.split(",") if item.strip()]
        return [SamplerKind.parse(item) if isinstance(item, str) else item for item in value]

    @field_validator("d", mode="before")
    @classmethod
    def parse_sizes(cls, value):
        if isinstance(value, str):
            value = [int(item) for item in value.split(",") if item.strip()]
        return value

    @field_validator("lp_x", "lp_y")
    @classmethod
    def check_preset(cls, value: str) -> str:
        if value not in LP_PRESETS:
            raise ValueError(f"unknown LP objective preset '{value}', expected one of {LP_PRESETS}")
        return value

    @model_validator(mode="after")
    def check_consistency(self):
        if not self.samplers:
            raise ValueError("at least one sampler is required")
        if not self.d or any(size < 1 for size in self.d):
            raise ValueError("proposal sizes must be positive")
        if self.couplings is not None:
            # размер модели известен только после загрузки файла
            return self
        n_states = 1 << self.spins
        if any(size > n_states - 1 for size in self.d):
            raise ValueError(f"proposal size exceeds n-1={n_states - 1}")
        if self.initial > n_states:
            raise ValueError(f"initial state {self.initial} outside [1, {n_states}]")
        return self

    def pairs(self) -> List[tuple[SamplerKind, int]]:
        """(sampler, d) в порядке вывода; одиночные сэмплеры только при d=1"""
        return [
            (kind, size)
            for kind in self.samplers
            for size in self.d
            if not kind.single_proposal or size == 1
        ]
