"""Ewald evaluation of the periodic Green potential of a set of point charges.

Each charge k contributes (k/2) phi, where phi is the zero-mean periodic
solution of lap(phi) = -4 pi (delta - 1/V). The real-space part sums screened
images erfc(eta r)/r, the reciprocal part is a single inverse FFT onto the
grid, and the constant -pi/(eta^2 V) per unit charge restores the zero mean.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft
from scipy.special import erfc

from models.fields import LabCharge, TorusGrid
from utils.config import runtime_threads
from utils.logger import get_logger

logger = get_logger(__name__)

DEFAULT_ACCURACY = 1e-16


class EwaldGreenFunction:
    """Potential and exact gradient of sum_P (k_P/2) phi(x - x_P) on a grid"""

    def __init__(self, grid: TorusGrid, accuracy: float = DEFAULT_ACCURACY, workers: Optional[int] = None):
        self.grid = grid
        self.workers = workers if workers is not None else runtime_threads()

        log_inverse = math.log(1.0 / accuracy)
        k_cut = math.pi / grid.spacing
        self.eta = k_cut / (2.0 * math.sqrt(log_inverse))
        self.r_cut = math.sqrt(log_inverse) / self.eta

        row_norms = np.linalg.norm(grid.inverse_lattice, axis=1)
        self.image_range = tuple(int(math.ceil(self.r_cut * n + 0.5)) for n in row_norms)

        logger.debug(
            f"Ewald eta={self.eta:.4f} r_cut={self.r_cut:.4f} images={self.image_range} on grid {grid.shape}"
        )

    def evaluate(self, charges: Sequence[LabCharge]) -> Tuple[np.ndarray, np.ndarray]:
        """chi and its Cartesian gradient on the grid"""

        grid = self.grid
        chi = np.zeros(grid.shape)
        grad = np.zeros((3,) + grid.shape)
        if not charges:
            return chi, grad

        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            parts: List[Tuple[np.ndarray, np.ndarray]] = list(pool.map(self._real_space, charges))

        # fixed summation order keeps results independent of the worker count
        for charge, (value, gradient) in zip(charges, parts):
            weight = charge.k / 2.0
            chi += weight * value
            grad += weight * gradient

        recip_value, recip_grad = self._reciprocal(charges)
        chi += recip_value
        grad += recip_grad

        total_weight = sum(charge.k / 2.0 for charge in charges)
        chi += -math.pi / (self.eta ** 2 * grid.volume) * total_weight
        return chi, grad

    def _real_space(self, charge: LabCharge) -> Tuple[np.ndarray, np.ndarray]:
        grid = self.grid
        delta = grid.fractional - np.asarray(charge.fractional).reshape(3, 1, 1, 1)
        delta -= np.round(delta)

        value = np.zeros(grid.shape)
        gradient = np.zeros((3,) + grid.shape)
        n1, n2, n3 = self.image_range
        for i in range(-n1, n1 + 1):
            for j in range(-n2, n2 + 1):
                for k in range(-n3, n3 + 1):
                    shift = np.array([i, j, k], dtype=float).reshape(3, 1, 1, 1)
                    d = np.einsum('ij,j...->i...', grid.lattice, delta + shift)
                    r = np.sqrt(np.sum(d ** 2, axis=0))
                    inside = r < self.r_cut
                    if not inside.any():
                        continue
                    r_in = r[inside]
                    screened = erfc(self.eta * r_in) / r_in
                    value[inside] += screened
                    radial = -(2.0 * self.eta / math.sqrt(math.pi)) * np.exp(-(self.eta * r_in) ** 2) / r_in - screened / r_in
                    for axis in range(3):
                        gradient[axis][inside] += radial * d[axis][inside] / r_in
        return value, gradient

    def _reciprocal(self, charges: Sequence[LabCharge]) -> Tuple[np.ndarray, np.ndarray]:
        grid = self.grid
        K2 = grid.wavenumber_squared
        with np.errstate(divide='ignore', invalid='ignore'):
            kernel = (4.0 * math.pi / grid.volume) * np.exp(-K2 / (4.0 * self.eta ** 2)) / K2
        kernel[0, 0, 0] = 0.0

        structure = np.zeros(grid.shape, dtype=complex)
        for charge in charges:
            phase = sum(m * x for m, x in zip(grid.mode_numbers, charge.fractional))
            structure += (charge.k / 2.0) * np.exp(-2j * np.pi * phase)

        coefficients = kernel * structure * grid.offset_phase * grid.size
        value = fft.ifftn(coefficients, workers=self.workers).real
        gradient = np.stack([
            fft.ifftn(1j * K * coefficients, workers=self.workers).real for K in grid.wavevectors
        ])
        return value, gradient


def periodic_green_potential(
    grid: TorusGrid,
    charges: Sequence[LabCharge],
    accuracy: float = DEFAULT_ACCURACY,
    workers: Optional[int] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    return EwaldGreenFunction(grid, accuracy, workers).evaluate(charges)
