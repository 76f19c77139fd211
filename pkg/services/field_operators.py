"""Spectral and finite-difference calculus on a TorusGrid.

Gradients are returned with the Cartesian (t, x, y) component axis first.
Finite differences act along the lattice axes and are mapped to Cartesian
components with L^{-T}.
"""

from typing import Callable, Optional

import numpy as np
from scipy import fft

from models.fields import Form2Field, OneFormField, TorusGrid
from utils.config import runtime_threads

Gradient = Callable[[TorusGrid, np.ndarray], np.ndarray]


def _workers(workers: Optional[int]) -> int:
    return workers if workers is not None else runtime_threads()


def spectral_gradient(grid: TorusGrid, samples: np.ndarray, workers: Optional[int] = None) -> np.ndarray:
    coeffs = fft.fftn(samples, workers=_workers(workers))
    return np.stack([
        fft.ifftn(1j * K * coeffs, workers=_workers(workers)).real for K in grid.wavevectors
    ])


def spectral_laplacian(grid: TorusGrid, samples: np.ndarray, workers: Optional[int] = None) -> np.ndarray:
    coeffs = fft.fftn(samples, workers=_workers(workers))
    return fft.ifftn(-grid.wavenumber_squared * coeffs, workers=_workers(workers)).real


def spectral_partial(grid: TorusGrid, samples: np.ndarray, axis: int, workers: Optional[int] = None) -> np.ndarray:
    """Cartesian partial derivative of a real or complex field"""
    coeffs = fft.fftn(samples, workers=_workers(workers))
    out = fft.ifftn(1j * grid.wavevectors[axis] * coeffs, workers=_workers(workers))
    return out if np.iscomplexobj(samples) else out.real


def fd_lattice_gradient(grid: TorusGrid, samples: np.ndarray) -> np.ndarray:
    """Central differences d/dxi_i along the three lattice axes"""
    return np.stack([
        (np.roll(samples, -1, axis=i) - np.roll(samples, 1, axis=i)) * (n / 2.0)
        for i, n in enumerate(grid.resolution)
    ])


def fd_gradient(grid: TorusGrid, samples: np.ndarray) -> np.ndarray:
    return np.einsum('ji,j...->i...', grid.inverse_lattice, fd_lattice_gradient(grid, samples))


def fd_laplacian(grid: TorusGrid, samples: np.ndarray) -> np.ndarray:
    """Second-order discrete Laplacian: sum_ij (L^-1 L^-T)_ij d_i d_j in lattice coordinates"""

    metric = grid.inverse_lattice @ grid.inverse_lattice.T
    out = np.zeros_like(samples, dtype=float)
    for i, ni in enumerate(grid.resolution):
        second = (np.roll(samples, -1, axis=i) - 2.0 * samples + np.roll(samples, 1, axis=i)) * ni ** 2
        out += metric[i, i] * second
        for j in range(i + 1, 3):
            if metric[i, j] == 0.0:
                continue
            nj = grid.resolution[j]
            mixed = (
                np.roll(samples, (-1, -1), axis=(i, j))
                - np.roll(samples, (-1, 1), axis=(i, j))
                - np.roll(samples, (1, -1), axis=(i, j))
                + np.roll(samples, (1, 1), axis=(i, j))
            ) * (ni * nj / 4.0)
            out += 2.0 * metric[i, j] * mixed
    return out


def exterior_derivative(grid: TorusGrid, one_form: OneFormField, gradient: Gradient = fd_gradient) -> Form2Field:
    dt = gradient(grid, one_form.t)
    dx = gradient(grid, one_form.x)
    dy = gradient(grid, one_form.y)
    return Form2Field(
        grid,
        tx=dx[0] - dt[1],
        ty=dy[0] - dt[2],
        xy=dy[1] - dx[2],
    )


def star_d(grid: TorusGrid, grad: np.ndarray) -> Form2Field:
    """Hodge star of df given the Cartesian gradient of f"""
    return Form2Field(grid, tx=grad[2], ty=-grad[1], xy=grad[0])


def spectral(workers: Optional[int] = None) -> Gradient:
    return lambda grid, samples: spectral_gradient(grid, samples, workers)
