"""Input schemas for problem, module and candidate JSON files.

Real inputs accept ints, floats, and rational strings such as "1/2"; ints and
strings stay exact downstream.
"""

from typing import Any, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

RealInput = Union[int, float, str]
ComplexInput = Tuple[RealInput, RealInput]


class _Schema(BaseModel):
    model_config = ConfigDict(extra='forbid')


class SingularSpec(_Schema):
    t: RealInput
    w: ComplexInput
    charge: int = 1


class BFieldSpec(_Schema):
    c: Optional[float] = None
    alpha: Tuple[float, float] = (0.0, 0.0)


class LaurentSpec(_Schema):
    """{"r": n, "entries": [[i, j, [[exp, coefficient], ...]], ...]}"""

    r: int = Field(ge=1)
    entries: List[Tuple[int, int, List[Tuple[int, Any]]]] = []


class PunctureSpec(_Schema):
    P: ComplexInput
    tau: List[RealInput]
    s: Optional[List[RealInput]] = None
    chain: List[LaurentSpec]

    @model_validator(mode='after')
    def _lengths_match(self):
        if self.s is not None and len(self.s) != len(self.tau):
            raise ValueError(f"{len(self.s)} s-values for {len(self.tau)} tau-values")
        return self


class BlockSpec(_Schema):
    columns: List[int]
    deg_V: int


class ModuleSpec(_Schema):
    rank: int = Field(ge=1)
    deg_V: int = 0
    twist: ComplexInput = (0, 0)
    twist_provenance: Literal['rho_constant', 'explicit'] = 'explicit'
    frak_a: ComplexInput = (0, 0)
    punctures: List[PunctureSpec] = []
    blocks: List[BlockSpec] = []


class CandidateSpec(_Schema):
    rank: int = Field(ge=1)
    deg_V: int = 0
    frame_columns: Optional[List[int]] = None
    chains: Optional[List[List[LaurentSpec]]] = None
    label: str = ''


class CandidatesSpec(_Schema):
    candidates: List[CandidateSpec]
    exhaustive: bool = False


class ProblemSpec(_Schema):
    name: str = ''
    basis: List[Tuple[RealInput, ComplexInput]]
    singular: List[SingularSpec] = []
    rho0: Tuple[float, float] = (0.0, 0.0)
    B: Optional[BFieldSpec] = None
    base_degree: int = 0
    resolution: Optional[Tuple[int, int, int]] = None
    tolerance: Optional[float] = Field(default=None, gt=0)
    candidates: Optional[CandidatesSpec] = None
    module: Optional[ModuleSpec] = None

    @field_validator('basis')
    @classmethod
    def _three_generators(cls, value):
        if len(value) != 3:
            raise ValueError(f"basis needs three generators, got {len(value)}")
        return value

    @field_validator('resolution')
    @classmethod
    def _even_resolution(cls, value):
        if value is not None and any(n < 8 or n % 2 for n in value):
            raise ValueError(f"resolution entries must be even and >= 8, got {value}")
        return value

    @property
    def rho0_complex(self) -> complex:
        return complex(self.rho0[0], self.rho0[1])
