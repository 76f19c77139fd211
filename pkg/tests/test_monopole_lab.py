"""Rank-one monopoles on the torus: degree, fits, gauge and nu checks"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest
import sympy

from models.fields import HarmonicBField, OneFormField, ScalarField3, TorusGrid
from models.geometry import SingularPoint
from models.mini import RankOneMiniData, TwistForm
from services.field_operators import fd_gradient
from services.mini_holomorphic import degree_comparison, upsilon_with_closure
from services.monopole_lab import (
    LabSettings,
    MonopoleLab,
    NuShift,
    assemble_and_degree,
    field_rows,
    gauge_shift_check,
    initial_plane,
    lab_charges,
    nu_shift_check,
    periodic_green_potential,
    refine_ratio,
    solution_summary,
)
from utils.errors import InvariantViolation, ResolutionError, SolvabilityError

R = sympy.Rational
CENTER = R(1, 2) + sympy.I * R(1, 2)
SETTINGS = LabSettings(workers=1)


def pair(t_plus, t_minus, w=CENTER):
    return [SingularPoint(t=t_plus, w=w, charge=1), SingularPoint(t=t_minus, w=w, charge=-1)]


def empty_solution(geom, n, base_degree=0):
    grid = TorusGrid(geom, (n, n, n))
    return grid, assemble_and_degree(grid, [], TwistForm(), None, base_degree, SETTINGS)


def test_no_charges(unit_cube):
    _, solution = empty_solution(unit_cube, 16)

    assert solution.deg_an == 0.0
    assert solution.B.c == 0.0
    assert solution.bogomolny_residual == 0.0
    assert solution.normalization.residual < 1e-14
    assert solution.near_field_fit == ()


def test_base_degree_sets_harmonic_flux(unit_cube):
    _, solution = empty_solution(unit_cube, 16, base_degree=1)

    assert solution.B.c == pytest.approx(-2.0 * math.pi)
    assert solution.deg_an == pytest.approx(math.pi)
    assert np.allclose(solution.slice_fluxes, 1.0)


def test_settings_from_config(lab_config):
    lab_config['lab']['poisson_residual'] = 1e-8

    settings = LabSettings.from_config(lab_config)

    assert settings.poisson_residual == 1e-8
    assert settings.shell_cells == (2.0, 6.0)
    assert settings.workers == 1


def test_green_potential_wrapper(unit_cube):
    grid = TorusGrid(unit_cube, (8, 8, 8))
    assert not periodic_green_potential(grid, [], SETTINGS).samples.any()


def test_lab_charges_merge_and_cancel(unit_cube):
    points = [
        SingularPoint(R(1, 4), CENTER, 1),
        SingularPoint(R(5, 4), CENTER + 1, 2),
        SingularPoint(R(3, 4), CENTER, 1),
        SingularPoint(R(3, 4), CENTER - sympy.I, -1),
    ]

    charges = lab_charges(unit_cube, points)

    assert len(charges) == 1
    assert charges[0].k == 3
    assert charges[0].fractional == pytest.approx((0.5, 0.5, 0.25))


def test_dipole_degree(lab_config, unit_cube, dipole_points):
    solution = MonopoleLab(lab_config).solve(unit_cube, dipole_points, TwistForm(), resolution=(32, 32, 32))

    assert solution.grid.offset == (0.5, 0.5, 0.5)
    assert solution.deg_an == pytest.approx(math.pi / 2, rel=1e-2)
    assert solution.normalization.residual < 1e-10


def test_single_charge_with_closure(lab_config, unit_cube):
    data = RankOneMiniData(unit_cube, (SingularPoint(R(1, 2), CENTER, 1),), TwistForm())
    result = upsilon_with_closure(data)
    points = [SingularPoint(R(1, 2), CENTER, 1), result.closure.point]

    solution = MonopoleLab(lab_config).solve(unit_cube, points, TwistForm(), resolution=(32, 32, 32))

    predicted = degree_comparison(result.module, unit_cube, TwistForm())
    assert predicted == pytest.approx(-math.pi / 2)
    assert solution.deg_an == pytest.approx(predicted, rel=1e-2)


def test_twist_shifts_degree(lab_config, sheared, dipole_points):
    lab = MonopoleLab(lab_config)
    rho = TwistForm.over(sheared, 0.3 + 0.1j)

    plain = lab.solve(sheared, dipole_points, TwistForm(), resolution=(32, 32, 32))
    twisted = lab.solve(sheared, dipole_points, rho, resolution=(32, 32, 32))

    assert twisted.B.alpha == pytest.approx(0.1 - 0.3j)
    assert twisted.deg_an - plain.deg_an == pytest.approx(-0.3, abs=1e-3)
    assert twisted.deg_an == pytest.approx(-math.pi / 2 - 0.3, rel=1e-2)


def test_translation_invariance(lab_config, unit_cube):
    lab = MonopoleLab(lab_config)
    shift_t, shift_w = R(2, 32), R(3, 32) + sympy.I * R(1, 32)

    base = lab.solve(unit_cube, pair(R(1, 4), R(3, 4)), TwistForm(), resolution=(32, 32, 32))
    moved = lab.solve(
        unit_cube, pair(R(1, 4) + shift_t, R(3, 4) + shift_t, CENTER + shift_w), TwistForm(), resolution=(32, 32, 32)
    )

    assert moved.deg_an == pytest.approx(base.deg_an, rel=1e-6)


def test_mask_overlap_needs_more_resolution(unit_cube):
    grid = TorusGrid(unit_cube, (16, 16, 16), (0.5, 0.5, 0.5))
    charges = lab_charges(unit_cube, pair(R(1, 2), R(1, 2) + R(1, 10)))

    with pytest.raises(ResolutionError, match='raise the resolution'):
        assemble_and_degree(grid, charges, TwistForm(), settings=SETTINGS)


def test_initial_plane_needs_a_gap(unit_cube):
    grid = TorusGrid(unit_cube, (8, 8, 8), (0.5, 0.5, 0.5))
    points = [SingularPoint(R(k, 8) + R(1, 32), CENTER, 1 if k % 2 else -1) for k in range(8)]
    charges = lab_charges(unit_cube, points)

    with pytest.raises(ResolutionError, match='initial-slice gap'):
        initial_plane(grid, charges)


def test_b_field_must_match_twist(unit_cube, dipole_points):
    grid = TorusGrid(unit_cube, (16, 16, 16), (0.5, 0.5, 0.5))
    charges = lab_charges(unit_cube, dipole_points)

    with pytest.raises(InvariantViolation) as excinfo:
        assemble_and_degree(grid, charges, TwistForm(rho0=0.2), HarmonicBField(c=0.0, alpha=0j), settings=SETTINGS)
    assert excinfo.value.invariant == 'b_field_twist'


def test_wrong_b_flux_breaks_solvability(unit_cube, dipole_points):
    grid = TorusGrid(unit_cube, (16, 16, 16), (0.5, 0.5, 0.5))
    charges = lab_charges(unit_cube, dipole_points)
    solution = assemble_and_degree(grid, charges, TwistForm(), settings=SETTINGS)

    with pytest.raises(SolvabilityError):
        assemble_and_degree(grid, charges, TwistForm(), HarmonicBField(c=solution.B.c + 1.0), settings=SETTINGS)


def test_gauge_shift_trivial_and_exact(unit_cube):
    grid, solution = empty_solution(unit_cube, 16, base_degree=1)
    zero = ScalarField3(grid, np.zeros(grid.shape))

    assert gauge_shift_check(grid, solution, OneFormField.zero(grid), zero) == 0.0

    potential = np.sin(2 * np.pi * grid.fractional[0]) * np.cos(2 * np.pi * grid.fractional[2])
    grad = fd_gradient(grid, potential)
    assert gauge_shift_check(grid, solution, OneFormField(grid, grad[0], grad[1], grad[2]), zero) < 1e-9


def test_gauge_shift_converges(unit_cube):
    deviations = []
    for n in (16, 32):
        grid, solution = empty_solution(unit_cube, n)
        xi = grid.fractional
        A = OneFormField(
            grid,
            0.2 * np.cos(2 * np.pi * xi[1]),
            0.1 * np.sin(2 * np.pi * (xi[0] + xi[2])),
            0.3 * np.cos(2 * np.pi * xi[2]),
        )
        f = ScalarField3(grid, 0.1 * np.sin(2 * np.pi * xi[0]) * np.cos(2 * np.pi * xi[1]))
        deviations.append(gauge_shift_check(grid, solution, A, f))

    assert deviations[0] < 0.2
    assert deviations[0] / deviations[1] >= 3.0


def test_constant_nu_leaves_g_unchanged(unit_cube, dipole_points):
    grid = TorusGrid(unit_cube, (16, 16, 16), (0.5, 0.5, 0.5))
    solution = assemble_and_degree(grid, lab_charges(unit_cube, dipole_points), TwistForm(), settings=SETTINGS)

    assert nu_shift_check(grid, solution, NuShift(nu_t=0.4 - 0.2j, nu_wbar=1.5 + 0.5j)) < 1e-10


def test_nu_wbar_shift_matches_prediction(unit_cube):
    """nu_wbar equal to w near the origin shifts G by -2 there"""

    deviations = []
    for n in (16, 32):
        grid, solution = empty_solution(unit_cube, n)
        x, y = grid.cartesian[1], grid.cartesian[2]
        nu_wbar = (np.sin(2 * np.pi * x) + 1j * np.sin(2 * np.pi * y)) / (2 * np.pi)
        deviations.append(nu_shift_check(grid, solution, NuShift(nu_wbar=nu_wbar)))

    assert deviations[1] < 0.05
    assert deviations[0] / deviations[1] >= 3.0


def test_nu_t_shift_matches_prediction(unit_cube):
    deviations = []
    for n in (16, 32):
        grid, solution = empty_solution(unit_cube, n)
        nu_t = (1 + 1j) * np.sin(2 * np.pi * grid.cartesian[0]) / (2 * np.pi)
        deviations.append(nu_shift_check(grid, solution, NuShift(nu_t=nu_t)))

    assert deviations[0] / deviations[1] >= 3.0


def test_bogomolny_residual_shrinks_under_refinement(unit_cube, dipole_points):
    residuals = []
    for n in (16, 32):
        grid = TorusGrid(unit_cube, (n, n, n), (0.5, 0.5, 0.5))
        solution = assemble_and_degree(grid, lab_charges(unit_cube, dipole_points), TwistForm(), settings=SETTINGS)
        residuals.append(solution.bogomolny_residual)

    assert residuals[1] > 0.0
    assert residuals[0] / residuals[1] >= 2.5


def test_gauge_deviation_below_base_residual(unit_cube, dipole_points):
    grid = TorusGrid(unit_cube, (16, 16, 16), (0.5, 0.5, 0.5))
    solution = assemble_and_degree(grid, lab_charges(unit_cube, dipole_points), TwistForm(), settings=SETTINGS)
    xi = grid.fractional
    A = OneFormField(
        grid,
        0.2 * np.cos(2 * np.pi * xi[1]),
        0.1 * np.sin(2 * np.pi * (xi[0] + xi[2])),
        0.3 * np.cos(2 * np.pi * xi[2]),
    )
    f = ScalarField3(grid, 0.1 * np.sin(2 * np.pi * xi[0]) * np.cos(2 * np.pi * xi[1]))

    assert gauge_shift_check(grid, solution, A, f) < 10.0 * solution.bogomolny_residual


@pytest.mark.parametrize('coarse, fine, passed', [
    (1e-3, 1e-4, True),
    (1e-3, 5e-4, False),
    (1e-9, 2e-9, True),
])
def test_refine_ratio(coarse, fine, passed):
    assert refine_ratio(coarse, fine, 3.0, 1e-8)[0] is passed


def test_summary_and_field_rows(unit_cube):
    grid, solution = empty_solution(unit_cube, 8, base_degree=1)

    summary = solution_summary(solution)
    rows = list(field_rows(solution))

    assert summary['resolution'] == [8, 8, 8]
    assert summary['deg_an'] == pytest.approx(math.pi)
    assert summary['near_field'] == []
    assert summary['curvature_max']['F_wwbar'] == pytest.approx(math.pi)
    assert summary['curvature_max']['F_tw'] == pytest.approx(0.0, abs=1e-12)
    assert len(rows) == 512
    assert rows[0][:3] == (0.0, 0.0, 0.0)


@pytest.mark.slow
def test_dipole_converges_under_refinement(lab_config, unit_cube, dipole_points):
    lab = MonopoleLab(lab_config)
    errors = [
        abs(lab.solve(unit_cube, dipole_points, TwistForm(), resolution=(n, n, n)).deg_an - math.pi / 2)
        for n in (32, 64)
    ]

    assert refine_ratio(errors[0], errors[1])[0]


@pytest.mark.slow
@pytest.mark.parametrize('k', [1, 2])
def test_near_field_coefficients(lab_config, unit_cube, k):
    points = [SingularPoint(R(1, 4), CENTER, k), SingularPoint(R(3, 4), CENTER, -k)]

    solution = MonopoleLab(lab_config).solve(unit_cube, points, TwistForm(), resolution=(64, 64, 64))

    fits = {fit.k: fit for fit in solution.near_field_fit}
    assert fits[k].fit == pytest.approx(k / 2, rel=0.02)
    assert fits[-k].fit == pytest.approx(-k / 2, rel=0.02)


@pytest.mark.slow
def test_dipole_degree_at_64_shrinks_at_128(lab_config, unit_cube, dipole_points):
    lab = MonopoleLab(lab_config)
    errors = [
        abs(lab.solve(unit_cube, dipole_points, TwistForm(), resolution=(n, n, n)).deg_an - math.pi / 2)
        for n in (64, 128)
    ]

    assert errors[0] < 0.01 * math.pi / 2
    assert errors[0] / errors[1] >= 3.0


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
