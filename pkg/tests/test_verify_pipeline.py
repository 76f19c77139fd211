"""Staged verify runs: status, failing stage and exit codes"""

import json
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest

from models.problem import ProblemSpec
from pipelines.verify_pipeline import (
    INVARIANT_FAILED,
    PASS,
    STAGES,
    TOLERANCE_FAILED,
    VerifyPipeline,
    exit_code,
    run_verify,
)
from services.serialization import load_problem
from tests.conftest import SHEARED, UNIT_CUBE, problem_path


def problem(**fields):
    payload = {'basis': UNIT_CUBE, 'resolution': [16, 16, 16]}
    payload.update(fields)
    return ProblemSpec.model_validate(payload)


def dipole(t_plus='1/4', t_minus='3/4', **fields):
    singular = [
        {'t': t_plus, 'w': ['1/2', '1/2'], 'charge': 1},
        {'t': t_minus, 'w': ['1/2', '1/2'], 'charge': -1},
    ]
    return problem(singular=singular, **fields)


def test_empty_problem_passes(lab_config):
    report = run_verify(problem(name='empty'), lab_config)

    assert report['status'] == PASS
    assert list(report['stages']) == list(STAGES)
    assert report['stages']['comparison']['deg_an'] == 0.0
    assert report['stages']['degree']['predicted_mu_an'] == 0
    assert exit_code(report) == 0


def test_base_degree_passes(lab_config):
    report = run_verify(problem(base_degree=1), lab_config)

    assert report['status'] == PASS
    assert report['stages']['comparison']['deg_an'] == pytest.approx(math.pi)


def test_bundled_dipole(lab_config):
    report = run_verify(load_problem(problem_path('dipole')), lab_config)

    assert report['status'] == PASS
    assert report['resolution'] == [32, 32, 32]
    comparison = report['stages']['comparison']
    assert comparison['predicted_mu_an'] == pytest.approx(math.pi / 2)
    assert comparison['relative_error'] < 0.01
    assert comparison['near_field']['gated'] is False
    assert report['stages']['difference_modules']['stability']['verdict'] == 'stable'


def test_bundled_single_charge_adds_closure(lab_config):
    report = run_verify(load_problem(problem_path('single_charge')), lab_config)

    assert report['status'] == PASS
    assert report['stages']['upsilon']['closure']['degree'] == -1
    assert report['stages']['comparison']['predicted_mu_an'] == pytest.approx(-math.pi / 2)


def test_twisted_dipole(lab_config):
    report = run_verify(load_problem(problem_path('twisted_dipole')), lab_config)

    assert report['status'] == PASS
    comparison = report['stages']['comparison']
    assert comparison['predicted_mu_an'] == pytest.approx(-math.pi / 2 - 0.3)
    assert comparison['ks_degree']['c_w'] != [0.0, 0.0]


def test_tight_tolerance_fails_numerically(lab_config):
    report = run_verify(dipole(), lab_config, tolerance=1e-12)

    assert report['status'] == TOLERANCE_FAILED
    assert report['failure'] is None
    assert not report['stages']['comparison']['passed']
    assert exit_code(report) == 2


def test_corrupted_module_override(lab_config):
    override = {
        'rank': 1,
        'punctures': [{'P': [0, 0], 'tau': ['1/2'], 'chain': [{'r': 1, 'entries': [[0, 0, [[1, 1]]]]}]}],
    }

    report = run_verify(dipole(module=override), lab_config)

    assert report['status'] == INVARIANT_FAILED
    assert report['failure']['stage'] == 'difference_modules'
    assert report['failure']['invariant'] == 'telescoping'
    assert list(report['stages']) == ['geometry', 'upsilon']
    assert exit_code(report) == 3


def test_overlapping_masks_stop_the_monopole_stage(lab_config):
    report = run_verify(dipole('1/2', '3/5'), lab_config)

    assert report['status'] == TOLERANCE_FAILED
    assert report['failure']['stage'] == 'monopole'
    assert report['failure']['error'] == 'ResolutionError'


def test_colliding_punctures_stop_the_geometry_stage(lab_config):
    report = run_verify(dipole(0.25, 1.25), lab_config)

    assert report['status'] == INVARIANT_FAILED
    assert report['failure']['stage'] == 'geometry'
    assert report['failure']['error'] == 'CollisionError'
    assert report['stages'] == {}


def test_cancelling_lifts_leave_an_empty_problem(lab_config):
    report = run_verify(dipole('1/4', '5/4'), lab_config)

    assert report['status'] == PASS
    assert report['stages']['geometry']['punctures'] == []
    assert report['stages']['comparison']['deg_an'] == 0.0


def test_b_field_alpha_must_match_twist(lab_config):
    report = run_verify(dipole(basis=SHEARED, rho0=[0.3, 0.1], B={'alpha': [0.0, 0.0]}), lab_config)

    assert report['status'] == INVARIANT_FAILED
    assert report['failure']['stage'] == 'monopole'
    assert report['failure']['invariant'] == 'b_field_twist'


def test_refinement_records_the_doubled_run(lab_config):
    report = VerifyPipeline(lab_config).run(problem(base_degree=1), refine=True)

    refinement = report['stages']['comparison']['refinement']
    assert refinement['resolution'] == [32, 32, 32]
    assert refinement['converged']
    assert report['status'] == PASS


def test_reports_are_deterministic(lab_config):
    first = run_verify(dipole(), lab_config)
    second = run_verify(dipole(), lab_config)

    assert json.dumps(first, sort_keys=True) == json.dumps(second, sort_keys=True)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
