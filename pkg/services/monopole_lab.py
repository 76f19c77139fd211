"""Rank-one Dirac monopoles on the flat 3-torus.

The potential is phi = sqrt(-1) chi with chi the periodic Green potential of
the charges, and the curvature is F = sqrt(-1) Omega with Omega = *d chi + B.
B is the constant harmonic form whose dx^dy coefficient c is fixed by the
degree of the initial slice. The analytic degree integrates
G = -Omega_xy / 2 + (d_t chi) / 2 over the unmasked cells and adds the
modelled cap of every masked ball.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from models.fields import (
    Form2Field,
    HarmonicBField,
    LabCharge,
    MonopoleSolution,
    NearFieldFit,
    OneFormField,
    ScalarField3,
    TorusGrid,
)
from models.geometry import SingularPoint, TorusGeometry
from models.mini import TwistForm
from services.field_operators import (
    exterior_derivative,
    fd_gradient,
    spectral,
    spectral_partial,
    star_d,
)
from services.green_function import EwaldGreenFunction
from services.poisson_solver import poisson_normalize
from utils.config import runtime_threads
from utils.errors import InvariantViolation, ResolutionError
from utils.logger import get_logger

logger = get_logger(__name__)

NEIGHBOURS = np.array([(i, j, k) for i in (-1, 0, 1) for j in (-1, 0, 1) for k in (-1, 0, 1)], dtype=float)


@dataclass(frozen=True)
class LabSettings:
    mask_cells: float = 3.0
    shell_cells: Tuple[float, float] = (2.0, 6.0)
    ewald_accuracy: float = 1e-16
    solvability_tolerance: float = 1e-3
    poisson_residual: float = 1e-10
    residual_radius: float = 0.2
    workers: int = 1

    @classmethod
    def from_config(cls, config: Optional[Dict[str, Any]] = None) -> 'LabSettings':
        lab = (config or {}).get('lab', {})
        shell = lab.get('shell_cells', [2, 6])
        return cls(
            mask_cells=float(lab.get('mask_cells', 3)),
            shell_cells=(float(shell[0]), float(shell[1])),
            ewald_accuracy=float(lab.get('ewald_accuracy', 1e-16)),
            solvability_tolerance=float(lab.get('solvability_tolerance', 1e-3)),
            poisson_residual=float(lab.get('poisson_residual', 1e-10)),
            residual_radius=float(lab.get('residual_radius', 0.2)),
            workers=runtime_threads(config),
        )


@dataclass(frozen=True)
class NuShift:
    """Shift of the d-bar operator by nu_t dt + nu_wbar d(w-bar); constants or grid samples"""

    nu_t: Any = 0j
    nu_wbar: Any = 0j


def lab_charges(geom: TorusGeometry, points: Sequence[SingularPoint]) -> List[LabCharge]:
    """Charges in grid coordinates; coincident orbits are merged and cancelled pairs dropped"""

    inverse = np.linalg.inv(geom.lattice_matrix())
    merged: List[List[Any]] = []
    for point in points:
        x = point.cartesian()
        xi = (inverse @ x) % 1.0
        for entry in merged:
            delta = xi - entry[1]
            if np.all(np.abs(delta - np.round(delta)) < 1e-12):
                entry[2] += int(point.charge)
                break
        else:
            merged.append([x, xi, int(point.charge)])

    charges = []
    for x, xi, k in merged:
        if k == 0:
            logger.warning(f"Charges at fractional position {tuple(xi)} cancel and are dropped")
            continue
        charges.append(LabCharge(cartesian=tuple(float(v) for v in x), fractional=tuple(float(v) for v in xi), k=k))
    return charges


def build_grid(geom: TorusGeometry, resolution: Sequence[int], charges: Sequence[LabCharge]) -> TorusGrid:
    return TorusGrid.build(geom, resolution, [charge.fractional for charge in charges])


def periodic_green_potential(
    grid: TorusGrid,
    charges: Sequence[LabCharge],
    settings: Optional[LabSettings] = None,
) -> ScalarField3:
    """chi with lap(chi) = -2 pi sum k delta + 2 pi sum k / vol and zero mean"""

    settings = settings or LabSettings(workers=runtime_threads())
    chi, _ = EwaldGreenFunction(grid, settings.ewald_accuracy, settings.workers).evaluate(charges)
    return ScalarField3(grid, chi)


def distance_to_charge(grid: TorusGrid, charge: LabCharge) -> Tuple[np.ndarray, np.ndarray]:
    """Nearest-image distance and displacement (Cartesian, component axis first) from a charge"""

    delta = grid.fractional - np.asarray(charge.fractional).reshape(3, 1, 1, 1)
    delta -= np.round(delta)
    best_r = np.full(grid.shape, np.inf)
    best_d = np.zeros((3,) + grid.shape)
    for shift in NEIGHBOURS:
        d = np.einsum('ij,j...->i...', grid.lattice, delta + shift.reshape(3, 1, 1, 1))
        r = np.sqrt(np.sum(d ** 2, axis=0))
        closer = r < best_r
        best_r = np.where(closer, r, best_r)
        best_d = np.where(closer, d, best_d)
    return best_r, best_d


def shortest_period(grid: TorusGrid) -> float:
    return float(min(np.linalg.norm(grid.lattice @ shift) for shift in NEIGHBOURS if np.any(shift)))


def check_mask_separation(grid: TorusGrid, charges: Sequence[LabCharge], radius: float):
    period = shortest_period(grid)
    if period <= 2.0 * radius:
        raise ResolutionError(
            f"mask radius {radius:.4g} overlaps its own periodic image (shortest period {period:.4g})"
        )
    for i, first in enumerate(charges):
        for second in charges[i + 1:]:
            delta = np.asarray(second.fractional) - np.asarray(first.fractional)
            delta -= np.round(delta)
            distance = min(np.linalg.norm(grid.lattice @ (delta + shift)) for shift in NEIGHBOURS)
            if distance <= 2.0 * radius:
                raise ResolutionError(
                    f"charges at {first.fractional} and {second.fractional} are {distance:.4g} apart; "
                    f"masks of radius {radius:.4g} overlap, raise the resolution"
                )


def initial_plane(grid: TorusGrid, charges: Sequence[LabCharge]) -> int:
    """Grid plane xi_3 = const inside the wrap gap of the charges, farthest from them"""

    planes = grid.plane_fractions()
    if not charges:
        return 0

    heights = np.array([charge.fractional[2] for charge in charges])
    lowest, highest = float(heights.min()), float(heights.max())

    best, best_margin = None, -1.0
    for index, p in enumerate(planes):
        if lowest < p < highest or p in (lowest, highest):
            continue
        above = lowest - p if p < lowest else lowest + 1.0 - p
        below = p - highest if p > highest else p + 1.0 - highest
        margin = min(above, below)
        if margin > best_margin:
            best, best_margin = index, margin

    if best is None or best_margin < 1.0 / grid.resolution[2]:
        raise ResolutionError(
            f"no grid plane lies a full cell inside the initial-slice gap ({highest - 1.0:.4g}, {lowest:.4g}); "
            f"raise N3 above {grid.resolution[2]}"
        )
    return best


def plane_flux(grid: TorusGrid, form: Form2Field) -> np.ndarray:
    """Mean of form(e1, e2) over every plane xi_3 = const"""
    e1, e2 = grid.lattice[:, 0], grid.lattice[:, 1]
    values = np.broadcast_to(form.on_pair(e1, e2), grid.shape)
    return values.mean(axis=(0, 1))


def topological_c(grid: TorusGrid, chi_flux: float, base_degree: int, alpha: complex) -> float:
    """c fixing the first Chern number of the initial slice to base_degree"""

    e1, e2 = grid.lattice[:, 0], grid.lattice[:, 1]
    m_tx = e1[0] * e2[1] - e1[1] * e2[0]
    m_ty = e1[0] * e2[2] - e1[2] * e2[0]
    m_xy = e1[1] * e2[2] - e1[2] * e2[1]
    twist = 2.0 * alpha.real * m_tx + 2.0 * alpha.imag * m_ty
    return (-2.0 * math.pi * base_degree - chi_flux - twist) / m_xy


def near_field_fit(
    grid: TorusGrid,
    chi: np.ndarray,
    charges: Sequence[LabCharge],
    shell_cells: Tuple[float, float] = (2.0, 6.0),
) -> Tuple[NearFieldFit, ...]:
    """Least-squares fit of chi against {1/r, 1, linear, r^2} on the shell around each charge"""

    inner, outer = shell_cells[0] * grid.spacing, shell_cells[1] * grid.spacing
    fits = []
    for charge in charges:
        r, d = distance_to_charge(grid, charge)
        shell = (r >= inner) & (r <= outer)
        rs = r[shell]
        design = np.column_stack([1.0 / rs, np.ones_like(rs), d[0][shell], d[1][shell], d[2][shell], rs ** 2])
        target = chi[shell]
        coeffs, _, _, _ = np.linalg.lstsq(design, target, rcond=None)
        residual = float(np.sqrt(np.mean((design @ coeffs - target) ** 2)))
        fits.append(NearFieldFit(k=charge.k, fit=float(coeffs[0]), residual=residual, samples=int(rs.size)))
        logger.debug(f"Near-field fit k={charge.k}: c={coeffs[0]:.6f} on {rs.size} shell samples")
    return tuple(fits)


def bogomolny_residual(grid: TorusGrid, omega: Form2Field, chi: np.ndarray, B: Form2Field) -> Form2Field:
    return omega - star_d(grid, fd_gradient(grid, chi)) - B


def _max_abs(form: Form2Field, where: np.ndarray) -> float:
    if not where.any():
        return 0.0
    return float(max(np.max(np.abs(component[where])) for component in form.components()))


def assemble_and_degree(
    grid: TorusGrid,
    charges: Sequence[LabCharge],
    rho: TwistForm,
    B: Optional[HarmonicBField] = None,
    base_degree: int = 0,
    settings: Optional[LabSettings] = None,
) -> MonopoleSolution:
    """Fields, analytic degree, near-field fits, Bogomolny residual and metric normalization.

    When B is given, its alpha must match the twist and its c is the target
    of the metric normalization; the degree always uses the c fixed by
    base_degree on the initial slice.
    """

    settings = settings or LabSettings(workers=runtime_threads())
    charges = tuple(charges)
    alpha = -1j * complex(rho.rho0)
    if B is not None and abs(complex(B.alpha) - alpha) > 1e-12 * max(1.0, abs(alpha)):
        raise InvariantViolation('b_field_twist', f"B has alpha={B.alpha} but the twist requires {alpha}")

    radius = settings.mask_cells * grid.spacing
    check_mask_separation(grid, charges, radius)
    plane = initial_plane(grid, charges)

    logger.info(f"Assembling monopole on {grid.shape} grid with {len(charges)} charges")
    ewald = EwaldGreenFunction(grid, settings.ewald_accuracy, settings.workers)
    chi, grad = ewald.evaluate(charges)

    star_chi = star_d(grid, grad)
    chi_flux = plane_flux(grid, star_chi)
    c = topological_c(grid, float(chi_flux[plane]), base_degree, alpha)
    harmonic = HarmonicBField(c=c, alpha=alpha)
    B_form = harmonic.as_form(grid)
    omega = star_chi + B_form

    fd_grad = fd_gradient(grid, chi)
    G = -0.5 * omega.xy + 0.5 * fd_grad[0]

    # residual region: beyond a fixed fraction of the shortest period, never inside the mask
    far_radius = max(radius, settings.residual_radius * shortest_period(grid))
    mask = np.zeros(grid.shape, dtype=bool)
    near = np.zeros(grid.shape, dtype=bool)
    for charge in charges:
        r, _ = distance_to_charge(grid, charge)
        mask |= r < radius
        near |= r < far_radius

    cap = (-0.5 * c) * (4.0 / 3.0) * math.pi * radius ** 3
    deg_an = float(np.sum(G[~mask]) * grid.cell_volume + cap * len(charges))

    residual_form = bogomolny_residual(grid, omega, chi, B_form)
    residual = _max_abs(residual_form, ~near)

    target = harmonic.mean_curvature if B is None else B.mean_curvature
    G0 = np.where(mask, -0.5 * c, G)
    normalization = poisson_normalize(
        grid, ScalarField3(grid, G0), target, settings.solvability_tolerance, settings.workers
    )
    if normalization.residual > settings.poisson_residual:
        logger.warning(
            f"Normalization residual {normalization.residual:.3e} above {settings.poisson_residual:.1e}"
        )

    fits = near_field_fit(grid, chi, charges, settings.shell_cells)
    slice_c1 = -plane_flux(grid, omega) / (2.0 * math.pi)

    logger.info(f"deg_an={deg_an:.8f} (c={c:.6f}, Bogomolny residual {residual:.3e})")
    return MonopoleSolution(
        grid=grid,
        charges=charges,
        chi=ScalarField3(grid, chi),
        chi_gradient=grad,
        omega=omega,
        B=harmonic,
        G_field=ScalarField3(grid, G),
        deg_an=deg_an,
        mask=mask,
        near_field_fit=fits,
        slice_fluxes=slice_c1,
        initial_plane=plane,
        bogomolny_residual=residual,
        normalization=normalization,
        base_degree=int(base_degree),
        rho0=complex(rho.rho0),
    )


def gauge_shift_check(grid: TorusGrid, solution: MonopoleSolution, A: OneFormField, f: ScalarField3) -> float:
    """Max change of the Bogomolny residual under (A, f); B is updated spectrally"""

    B_form = solution.B.as_form(grid)
    base = bogomolny_residual(grid, solution.omega, solution.chi.samples, B_form)

    dA = exterior_derivative(grid, A, fd_gradient)
    omega = solution.omega + dA
    chi = solution.chi.samples + f.samples
    exact = spectral(runtime_threads())
    B_shifted = B_form + exterior_derivative(grid, A, exact) - star_d(grid, exact(grid, f.samples))
    shifted = bogomolny_residual(grid, omega, chi, B_shifted)

    deviation = _max_abs(shifted - base, ~solution.mask)
    logger.debug(f"Gauge shift deviation {deviation:.3e}")
    return deviation


def nu_shift_check(grid: TorusGrid, solution: MonopoleSolution, nu: NuShift) -> float:
    """Recompute G after the nu-shift and compare with -(2 Re d_w nu_wbar + Re d_t nu_t / 2)"""

    nu_t = np.broadcast_to(np.asarray(nu.nu_t, dtype=complex), grid.shape)
    nu_wbar = np.broadcast_to(np.asarray(nu.nu_wbar, dtype=complex), grid.shape)

    shift_form = OneFormField(grid, t=nu_t.imag, x=2.0 * nu_wbar.imag, y=-2.0 * nu_wbar.real)
    omega = solution.omega - exterior_derivative(grid, shift_form, fd_gradient)
    chi = solution.chi.samples - nu_t.real

    before = -0.5 * np.broadcast_to(solution.omega.xy, grid.shape) + 0.5 * fd_gradient(grid, solution.chi.samples)[0]
    after = -0.5 * np.broadcast_to(omega.xy, grid.shape) + 0.5 * fd_gradient(grid, chi)[0]

    workers = runtime_threads()
    d_w = 0.5 * (spectral_partial(grid, np.ascontiguousarray(nu_wbar), 1, workers)
                 - 1j * spectral_partial(grid, np.ascontiguousarray(nu_wbar), 2, workers))
    d_t = spectral_partial(grid, np.ascontiguousarray(nu_t), 0, workers)
    predicted = -(2.0 * np.real(d_w) + 0.5 * np.real(d_t))

    deviation = float(np.max(np.abs((after - before) - predicted)))
    logger.debug(f"nu shift deviation {deviation:.3e}")
    return deviation


def refine_ratio(coarse: float, fine: float, ratio: float = 3.0, floor: float = 1e-8) -> Tuple[bool, Optional[float]]:
    """Doubled-resolution gate: the deviation must shrink by the ratio unless both sit below the floor"""

    coarse, fine = abs(coarse), abs(fine)
    observed = coarse / fine if fine > 0.0 else None
    if fine <= floor:
        return True, observed
    return observed >= ratio, observed


def _max_modulus(solution: MonopoleSolution, component) -> float:
    values = np.broadcast_to(component, solution.grid.shape)[~solution.mask]
    return float(np.max(np.abs(values))) if values.size else 0.0


def solution_summary(solution: MonopoleSolution) -> Dict[str, Any]:
    normalization = solution.normalization
    return {
        'resolution': list(solution.grid.shape),
        'offset': list(solution.grid.offset),
        'deg_an': solution.deg_an,
        'c': solution.B.c,
        'alpha': [solution.B.alpha.real, solution.B.alpha.imag],
        'near_field': [
            {'k': fit.k, 'fit': fit.fit, 'residual': fit.residual, 'relative_error': fit.relative_error}
            for fit in solution.near_field_fit
        ],
        'bogomolny_residual': solution.bogomolny_residual,
        'curvature_max': {
            name: _max_modulus(solution, getattr(solution, name)) for name in ('F_wwbar', 'F_tw', 'F_twbar')
        },
        'normalization': None if normalization is None else {
            'residual': normalization.residual,
            'mean_defect': normalization.mean_defect,
            'amplitude': float(np.max(np.abs(normalization.f.samples))),
        },
        'initial_plane': solution.initial_plane,
        'slice_c1': [float(v) for v in solution.slice_fluxes],
    }


def field_rows(solution: MonopoleSolution):
    """One row per grid point: fractional coordinates, chi and G"""

    grid = solution.grid
    xi = grid.fractional.reshape(3, -1)
    chi = solution.chi.samples.reshape(-1)
    G = solution.G_field.samples.reshape(-1)
    for index in range(chi.size):
        yield (xi[0, index], xi[1, index], xi[2, index], chi[index], G[index])


class MonopoleLab:
    """Config-driven entry point: geometry plus singular points in, MonopoleSolution out"""

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        self.config = config or {}
        self.settings = LabSettings.from_config(self.config)
        self.default_resolution = int(self.config.get('lab', {}).get('default_resolution', 32))

    def solve(
        self,
        geom: TorusGeometry,
        points: Sequence[SingularPoint],
        rho: TwistForm,
        B: Optional[HarmonicBField] = None,
        base_degree: int = 0,
        resolution: Optional[Sequence[int]] = None,
    ) -> MonopoleSolution:
        resolution = tuple(resolution) if resolution else (self.default_resolution,) * 3
        charges = lab_charges(geom, points)
        grid = build_grid(geom, resolution, charges)
        if grid.offset != (0.0, 0.0, 0.0):
            logger.info("A charge sits on a grid node; using the half-cell offset grid")
        return assemble_and_degree(grid, charges, rho, B, base_degree, self.settings)
