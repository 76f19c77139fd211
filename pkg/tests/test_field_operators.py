"""Spectral and finite-difference calculus on lattice grids"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np
import pytest

from models.fields import OneFormField, TorusGrid
from services.field_operators import (
    exterior_derivative,
    fd_gradient,
    fd_laplacian,
    spectral,
    spectral_gradient,
    spectral_laplacian,
    spectral_partial,
    star_d,
)
from utils.errors import InvariantViolation

TWO_PI = 2.0 * np.pi


def wave(grid, modes):
    """cos(2 pi m . xi) and its exact Cartesian wavevector"""
    phase = TWO_PI * np.einsum('i,i...->...', np.asarray(modes, dtype=float), grid.fractional)
    K = TWO_PI * grid.inverse_lattice.T @ np.asarray(modes, dtype=float)
    return np.cos(phase), np.sin(phase), K


def test_grid_rejects_odd_or_small_resolution(unit_cube):
    with pytest.raises(InvariantViolation):
        TorusGrid(unit_cube, (9, 16, 16))
    with pytest.raises(InvariantViolation):
        TorusGrid(unit_cube, (6, 6, 6))


def test_grid_shifts_off_nodes(unit_cube):
    assert TorusGrid.build(unit_cube, (16, 16, 16), [(0.3, 0.3, 0.3)]).offset == (0.0, 0.0, 0.0)
    assert TorusGrid.build(unit_cube, (16, 16, 16), [(0.5, 0.25, 0.0)]).offset == (0.5, 0.5, 0.5)


def test_grid_geometry(sheared):
    grid = TorusGrid(sheared, (8, 8, 16))

    assert grid.volume == pytest.approx(1.0)
    assert grid.cell_volume == pytest.approx(1.0 / 1024)
    assert grid.spacing == pytest.approx(np.sqrt(2) / 8)
    assert np.allclose(grid.cartesian[:, 1, 0, 0], grid.lattice[:, 0] / 8)


@pytest.mark.parametrize('modes', [(1, 0, 0), (0, 2, 1), (1, -1, 2)])
def test_spectral_calculus_exact_on_waves(sheared, modes):
    grid = TorusGrid(sheared, (16, 16, 16))
    f, g, K = wave(grid, modes)

    grad = spectral_gradient(grid, f, workers=1)
    for axis in range(3):
        assert np.allclose(grad[axis], -K[axis] * g, atol=1e-9)
    assert np.allclose(spectral_laplacian(grid, f, workers=1), -np.dot(K, K) * f, atol=1e-8)


def test_spectral_partial_keeps_complex(unit_cube):
    grid = TorusGrid(unit_cube, (8, 8, 8))
    f, g, K = wave(grid, (1, 0, 0))

    out = spectral_partial(grid, f + 1j * g, 1, workers=1)

    assert np.iscomplexobj(out)
    assert np.allclose(out, 1j * K[1] * (f + 1j * g), atol=1e-9)


def test_fd_gradient_second_order(sheared):
    errors = []
    for n in (16, 32):
        grid = TorusGrid(sheared, (n, n, n))
        f, g, K = wave(grid, (1, 1, 1))
        errors.append(np.max(np.abs(fd_gradient(grid, f) + K[:, None, None, None] * g)))

    assert errors[0] / errors[1] == pytest.approx(4.0, rel=0.1)


def test_fd_laplacian_second_order_with_mixed_metric(sheared):
    errors = []
    for n in (16, 32):
        grid = TorusGrid(sheared, (n, n, n))
        f, _, K = wave(grid, (1, 0, 1))
        errors.append(np.max(np.abs(fd_laplacian(grid, f) + np.dot(K, K) * f)))

    assert errors[0] / errors[1] == pytest.approx(4.0, rel=0.1)


def test_dd_vanishes(sheared):
    grid = TorusGrid(sheared, (16, 16, 16))
    f, _, _ = wave(grid, (1, 2, -1))
    h, _, _ = wave(grid, (0, 1, 1))
    grad = fd_gradient(grid, f * h)

    curvature = exterior_derivative(grid, OneFormField(grid, grad[0], grad[1], grad[2]))

    assert max(np.max(np.abs(c)) for c in curvature.components()) < 1e-9


def test_spectral_exterior_derivative(unit_cube):
    grid = TorusGrid(unit_cube, (16, 16, 16))
    f, g, K = wave(grid, (1, 0, 0))
    zero = np.zeros(grid.shape)

    # A = f dy: dA = d_t f dt^dy + d_x f dx^dy
    dA = exterior_derivative(grid, OneFormField(grid, zero, zero, f), spectral(1))

    assert np.allclose(dA.ty, -K[0] * g, atol=1e-9)
    assert np.allclose(dA.xy, -K[1] * g, atol=1e-9)
    assert np.allclose(dA.tx, 0.0, atol=1e-9)


def test_star_d_components(unit_cube):
    grid = TorusGrid(unit_cube, (8, 8, 8))
    grad = np.stack([np.full(grid.shape, v) for v in (1.0, 2.0, 3.0)])

    form = star_d(grid, grad)

    assert np.all(form.tx == 3.0) and np.all(form.ty == -2.0) and np.all(form.xy == 1.0)
    assert np.all(form.F_wwbar == -0.5)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
