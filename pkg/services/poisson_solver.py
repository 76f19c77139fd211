"""Spectral solve of the normalization equation G0 - (lap f)/4 = target."""

from typing import Optional

import numpy as np
from scipy import fft

from models.fields import NormalizationResult, ScalarField3, TorusGrid
from services.field_operators import spectral_laplacian
from utils.config import runtime_threads
from utils.errors import SolvabilityError
from utils.logger import get_logger

logger = get_logger(__name__)


def poisson_normalize(
    grid: TorusGrid,
    G0: ScalarField3,
    target: float,
    tolerance: float = 1e-3,
    workers: Optional[int] = None,
) -> NormalizationResult:
    """Find zero-mean f with G0 - (lap f)/4 = target, lap the Euclidean Laplacian.

    The equation is solvable only when mean(G0) equals the target; a larger
    defect than the tolerance raises SolvabilityError, a smaller one is
    projected out and reported.
    """

    workers = workers if workers is not None else runtime_threads()
    source = G0.samples - target
    mean_defect = float(np.mean(source))
    if abs(mean_defect) > tolerance:
        raise SolvabilityError(mean_defect, tolerance)

    rhs = 4.0 * (source - mean_defect)
    K2 = grid.wavenumber_squared
    coeffs = fft.fftn(rhs, workers=workers)
    with np.errstate(divide='ignore', invalid='ignore'):
        solution = coeffs / (-K2)
    solution[0, 0, 0] = 0.0
    f = fft.ifftn(solution, workers=workers).real

    normalized = G0.samples - 0.25 * spectral_laplacian(grid, f, workers) - mean_defect
    residual = float(np.max(np.abs(normalized - target)))
    logger.debug(f"Normalization residual {residual:.3e}, mean defect {mean_defect:.3e}")

    return NormalizationResult(f=ScalarField3(grid, f), residual=residual, mean_defect=mean_defect)
