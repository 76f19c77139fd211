import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest

from models.geometry import SingularPoint
from services.torus_geometry import basis_from_json, derive_geometry

PROBLEMS_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'problems')

UNIT_CUBE = [[0, [1, 0]], [0, [0, 1]], [1, [0, 0]]]
SHEARED = [[1, [1, 0]], [0, [0, 1]], [1, [0, 0]]]


@pytest.fixture
def unit_cube():
    return derive_geometry(basis_from_json(UNIT_CUBE))


@pytest.fixture
def sheared():
    """gamma = -1/2, frak_t = 1"""
    return derive_geometry(basis_from_json(SHEARED))


@pytest.fixture
def dipole_points():
    import sympy
    w = sympy.Rational(1, 2) + sympy.I * sympy.Rational(1, 2)
    return [
        SingularPoint(t=sympy.Rational(1, 4), w=w, charge=1),
        SingularPoint(t=sympy.Rational(3, 4), w=w, charge=-1),
    ]


@pytest.fixture
def lab_config(tmp_path):
    return {
        'runtime': {'threads': 1},
        'lab': {'default_resolution': 32, 'mask_cells': 3, 'shell_cells': [2, 6],
                'ewald_accuracy': 1e-16, 'solvability_tolerance': 1e-3},
        'acceptance': {'relative_tolerance': 0.01, 'near_field_tolerance': 0.02,
                       'convergence_ratio': 3.0, 'convergence_floor': 1e-8},
        'recording': {'enabled': True, 'directory': str(tmp_path / 'logs')},
        'data_dir': str(tmp_path),
    }


def problem_path(name: str) -> str:
    return os.path.join(PROBLEMS_DIR, f"{name}.json")
