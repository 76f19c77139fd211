"""Immutable geometry values: the lattice, the derived torus constants and the
singular set projected onto the elliptic curve."""

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from utils.errors import InvariantViolation
from utils.numbers import Real, Scalar, TauValue, as_complex, as_float, conj, im_part


@dataclass(frozen=True)
class LatticeVector:
    """Generator (a, alpha) of the lattice in R_t x C_w"""

    a: Real
    alpha: Scalar

    def as_floats(self) -> Tuple[float, float, float]:
        z = as_complex(self.alpha)
        return (as_float(self.a), z.real, z.imag)


@dataclass(frozen=True)
class LatticeBasis:
    e1: LatticeVector
    e2: LatticeVector
    e3: LatticeVector

    @property
    def vectors(self) -> Tuple[LatticeVector, LatticeVector, LatticeVector]:
        return (self.e1, self.e2, self.e3)

    def matrix(self) -> np.ndarray:
        """Columns are the generators in Cartesian (t, x, y) coordinates"""
        return np.array([v.as_floats() for v in self.vectors], dtype=float).T


@dataclass(frozen=True)
class TorusGeometry:
    basis: LatticeBasis
    gamma: Scalar
    frak_t: Real
    frak_a: Scalar
    Gamma0: Tuple[Scalar, Scalar]
    exact: bool = True

    @property
    def slice_area(self) -> Real:
        """Im(conj(alpha1) alpha2), the area of the elliptic curve T"""
        alpha1, alpha2 = self.Gamma0
        return im_part(conj(alpha1) * alpha2)

    @property
    def volume(self) -> Real:
        return self.frak_t * self.slice_area

    def lattice_matrix(self) -> np.ndarray:
        return self.basis.matrix()


@dataclass(frozen=True)
class SingularPoint:
    """A Dirac singularity: a lift (t, w) in the universal cover and its charge"""

    t: Real
    w: Scalar
    charge: int = 1

    def cartesian(self) -> np.ndarray:
        z = as_complex(self.w)
        return np.array([as_float(self.t), z.real, z.imag], dtype=float)


@dataclass(frozen=True)
class PunctureWeightTable:
    P: Scalar
    s_values: Tuple[Real, ...]
    tau_values: Tuple[TauValue, ...]
    charges: Optional[Tuple[int, ...]] = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.tau_values) == 0:
            raise InvariantViolation('weight_table', f"empty weight table at P={self.P}")
        if len(self.s_values) != len(self.tau_values):
            raise InvariantViolation(
                'weight_table',
                f"{len(self.s_values)} s-values but {len(self.tau_values)} tau-values at P={self.P}",
            )
        if not 0 <= self.tau_values[0]:
            raise InvariantViolation('weight_table', f"tau {self.tau_values[0]} < 0 at P={self.P}")
        if not self.tau_values[-1] < 1:
            raise InvariantViolation('weight_table', f"tau {self.tau_values[-1]} >= 1 at P={self.P}")
        for left, right in zip(self.tau_values, self.tau_values[1:]):
            if not left < right:
                raise InvariantViolation(
                    'weight_table', f"tau values not strictly increasing at P={self.P}: {left} >= {right}"
                )

    @property
    def m(self) -> int:
        return len(self.tau_values)

    @classmethod
    def from_taus(cls, P: Scalar, taus) -> 'PunctureWeightTable':
        """Weight table on a unit-period slice coordinate (s = tau)"""
        taus = tuple(taus)
        return cls(P=P, s_values=taus, tau_values=taus)
