"""Sampled fields on a lattice-adapted grid of the 3-torus.

Grid node (n1, n2, n3) sits at fractional coordinates (n + offset) / N and at
the Cartesian point L @ xi, where the columns of L are the lattice generators
in (t, x, y) coordinates (w = x + iy). Vector-valued samples are stored with
the component axis first.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple, Union

import numpy as np

from models.geometry import TorusGeometry
from utils.errors import InvariantViolation

NODE_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class TorusGrid:
    geometry: TorusGeometry
    resolution: Tuple[int, int, int]
    offset: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, 'resolution', tuple(int(n) for n in self.resolution))
        if len(self.resolution) != 3:
            raise InvariantViolation('grid_resolution', f"need three sample counts, got {self.resolution}")
        for n in self.resolution:
            if n < 8 or n % 2:
                raise InvariantViolation('grid_resolution', f"every N_i must be even and >= 8, got {self.resolution}")

    @classmethod
    def build(cls, geometry: TorusGeometry, resolution, singular_fractions=()) -> 'TorusGrid':
        """Grid whose nodes avoid the singular points, shifting by half a cell when one is hit"""

        grid = cls(geometry, tuple(resolution))
        if any(grid.hits_node(xi) for xi in singular_fractions):
            grid = cls(geometry, tuple(resolution), (0.5, 0.5, 0.5))
        return grid

    def hits_node(self, xi) -> bool:
        scaled = (np.asarray(xi, dtype=float) % 1.0) * np.asarray(self.resolution) - np.asarray(self.offset)
        return bool(np.all(np.abs(scaled - np.round(scaled)) < NODE_TOLERANCE * np.asarray(self.resolution)))

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.resolution

    @property
    def size(self) -> int:
        return int(np.prod(self.resolution))

    @cached_property
    def lattice(self) -> np.ndarray:
        return self.geometry.lattice_matrix()

    @cached_property
    def inverse_lattice(self) -> np.ndarray:
        return np.linalg.inv(self.lattice)

    @cached_property
    def volume(self) -> float:
        return float(abs(np.linalg.det(self.lattice)))

    @property
    def cell_volume(self) -> float:
        return self.volume / self.size

    @cached_property
    def spacing(self) -> float:
        """Longest cell edge: max |e_i| / N_i"""
        lengths = np.linalg.norm(self.lattice, axis=0)
        return float(np.max(lengths / np.asarray(self.resolution)))

    @cached_property
    def fractional(self) -> np.ndarray:
        axes = [(np.arange(n) + o) / n for n, o in zip(self.resolution, self.offset)]
        return np.stack(np.meshgrid(*axes, indexing='ij'))

    @cached_property
    def cartesian(self) -> np.ndarray:
        return np.einsum('ij,j...->i...', self.lattice, self.fractional)

    @cached_property
    def mode_numbers(self) -> np.ndarray:
        axes = [np.fft.fftfreq(n, d=1.0 / n) for n in self.resolution]
        return np.stack(np.meshgrid(*axes, indexing='ij'))

    @cached_property
    def wavevectors(self) -> np.ndarray:
        """K = 2 pi L^{-T} m, Cartesian components first"""
        return 2.0 * np.pi * np.einsum('ji,j...->i...', self.inverse_lattice, self.mode_numbers)

    @cached_property
    def wavenumber_squared(self) -> np.ndarray:
        return np.sum(self.wavevectors ** 2, axis=0)

    @cached_property
    def offset_phase(self) -> np.ndarray:
        """exp(i K . x_0) for the offset of node (0, 0, 0)"""
        shift = sum(m * (o / n) for m, o, n in zip(self.mode_numbers, self.offset, self.resolution))
        return np.exp(2j * np.pi * shift)

    def plane_fractions(self) -> np.ndarray:
        """xi_3 of every grid plane"""
        n3 = self.resolution[2]
        return (np.arange(n3) + self.offset[2]) / n3


@dataclass(frozen=True, eq=False)
class ScalarField3:
    grid: TorusGrid
    samples: np.ndarray

    def __post_init__(self):
        if tuple(self.samples.shape) != self.grid.shape:
            raise InvariantViolation('field_shape', f"samples {self.samples.shape} on a {self.grid.shape} grid")

    def mean(self) -> float:
        return float(np.mean(self.samples))


@dataclass(frozen=True, eq=False)
class OneFormField:
    """Real 1-form A_t dt + A_x dx + A_y dy"""

    grid: TorusGrid
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray

    @classmethod
    def zero(cls, grid: TorusGrid) -> 'OneFormField':
        zeros = np.zeros(grid.shape)
        return cls(grid, zeros, zeros.copy(), zeros.copy())


@dataclass(frozen=True, eq=False)
class Form2Field:
    """Real 2-form tx dt^dx + ty dt^dy + xy dx^dy (components may be constants)"""

    grid: TorusGrid
    tx: Union[np.ndarray, float]
    ty: Union[np.ndarray, float]
    xy: Union[np.ndarray, float]

    def __add__(self, other: 'Form2Field') -> 'Form2Field':
        return Form2Field(self.grid, self.tx + other.tx, self.ty + other.ty, self.xy + other.xy)

    def __sub__(self, other: 'Form2Field') -> 'Form2Field':
        return Form2Field(self.grid, self.tx - other.tx, self.ty - other.ty, self.xy - other.xy)

    def components(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        shape = self.grid.shape
        return tuple(np.broadcast_to(np.asarray(c, dtype=float), shape) for c in (self.tx, self.ty, self.xy))

    def on_pair(self, u: np.ndarray, v: np.ndarray):
        """Evaluate on the vector pair (u, v)"""
        m_tx = u[0] * v[1] - u[1] * v[0]
        m_ty = u[0] * v[2] - u[2] * v[0]
        m_xy = u[1] * v[2] - u[2] * v[1]
        return self.tx * m_tx + self.ty * m_ty + self.xy * m_xy

    # F = sqrt(-1) * Omega in the complex frame (dw^dw-bar, dt^dw, dt^dw-bar)
    @property
    def F_wwbar(self):
        return -0.5 * np.asarray(self.xy)

    @property
    def F_tw(self):
        return 0.5j * (np.asarray(self.tx) - 1j * np.asarray(self.ty))

    @property
    def F_twbar(self):
        return 0.5j * (np.asarray(self.tx) + 1j * np.asarray(self.ty))


@dataclass(frozen=True)
class HarmonicBField:
    """B = c (i/2) dw^dw-bar + alpha dt^dw-bar + conj(alpha) dt^dw"""

    c: float
    alpha: complex = 0j

    def as_form(self, grid: TorusGrid) -> Form2Field:
        return Form2Field(grid, 2.0 * self.alpha.real, 2.0 * self.alpha.imag, float(self.c))

    @property
    def mean_curvature(self) -> float:
        return -0.5 * self.c


@dataclass(frozen=True)
class LabCharge:
    cartesian: Tuple[float, float, float]
    fractional: Tuple[float, float, float]
    k: int


@dataclass(frozen=True)
class NearFieldFit:
    k: int
    fit: float
    residual: float
    samples: int

    @property
    def relative_error(self) -> float:
        expected = self.k / 2.0
        return abs(self.fit - expected) / abs(expected)


@dataclass(frozen=True)
class NormalizationResult:
    f: ScalarField3
    residual: float
    mean_defect: float


@dataclass(frozen=True, eq=False)
class MonopoleSolution:
    grid: TorusGrid
    charges: Tuple[LabCharge, ...]
    chi: ScalarField3
    chi_gradient: np.ndarray
    omega: Form2Field
    B: HarmonicBField
    G_field: ScalarField3
    deg_an: float
    mask: np.ndarray
    near_field_fit: Tuple[NearFieldFit, ...]
    slice_fluxes: np.ndarray
    initial_plane: int
    bogomolny_residual: float
    normalization: Optional[NormalizationResult] = None
    base_degree: int = 0
    rho0: complex = 0j

    @property
    def F_wwbar(self):
        return self.omega.F_wwbar

    @property
    def F_tw(self):
        return self.omega.F_tw

    @property
    def F_twbar(self):
        return self.omega.F_twbar
