"""Torus-side rank-one data and the degree vector attached to it."""

from dataclasses import dataclass
from typing import Optional, Tuple

from models.geometry import SingularPoint, TorusGeometry
from models.modules import ParabolicDifferenceModule
from utils.numbers import Scalar


@dataclass(frozen=True)
class TwistForm:
    """Constant twist rho = rho0 dt d(w-bar); integral_rho0 = rho0 * vol"""

    rho0: complex = 0j
    integral_rho0: complex = 0j

    @classmethod
    def over(cls, geom: TorusGeometry, rho0: complex) -> 'TwistForm':
        rho0 = complex(rho0)
        return cls(rho0=rho0, integral_rho0=rho0 * float(geom.volume))


@dataclass(frozen=True)
class RankOneMiniData:
    geometry: TorusGeometry
    singularities: Tuple[SingularPoint, ...]
    rho: TwistForm
    base_degree: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'singularities', tuple(self.singularities))


@dataclass(frozen=True)
class ClosureStep:
    """Compensating jump placed at s = 0 so that the chain closes"""

    P: Scalar
    degree: int
    point: SingularPoint
    merged: bool = False


@dataclass(frozen=True)
class KSDegreeVector:
    c_t: float
    c_w: complex
    c_wbar: complex

    def __post_init__(self):
        if abs(self.c_wbar - self.c_w.conjugate()) > 1e-12 * max(1.0, abs(self.c_w)):
            raise ValueError(f"c_wbar={self.c_wbar} is not the conjugate of c_w={self.c_w}")

    @property
    def is_pure_t(self) -> bool:
        return self.c_w == 0 and self.c_wbar == 0


@dataclass(frozen=True)
class UpsilonResult:
    module: ParabolicDifferenceModule
    closure: Optional[ClosureStep] = None
