"""End-to-end consistency run: geometry -> Upsilon -> parabolic degree -> monopole -> comparison.

Every stage writes one entry into an ordered report. The first stage error
stops the run; the report then names that stage and the status tells
numeric failures (exit 2) apart from broken invariants (exit 3).
"""

import math
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

from pydantic import ValidationError

from models.fields import HarmonicBField, MonopoleSolution
from models.mini import RankOneMiniData
from models.problem import ProblemSpec
from services.difference_modules import (
    check_stability,
    degree_forms,
    module_summary,
    summand_candidates,
    verdict_summary,
)
from services.mini_holomorphic import (
    degree_comparison,
    ks_degree,
    upsilon_summary,
    upsilon_with_closure,
)
from services.monopole_lab import MonopoleLab, refine_ratio, solution_summary
from services.serialization import (
    basis_of,
    candidates_from_spec,
    module_from_spec,
    singular_points_of,
    twist_of,
    validation_message,
)
from services.torus_geometry import derive_geometry, geometry_summary, project_singular_set
from utils.errors import InvariantViolation, MonodromeError, ResolutionError, SolvabilityError, StageError
from utils.logger import get_logger
from utils.numbers import rational_json

logger = get_logger(__name__)

PASS = 'PASS'
TOLERANCE_FAILED = 'TOLERANCE_FAILED'
INVARIANT_FAILED = 'INVARIANT_FAILED'

EXIT_CODES = {PASS: 0, TOLERANCE_FAILED: 2, INVARIANT_FAILED: 3}

STAGES = ('geometry', 'upsilon', 'difference_modules', 'degree', 'monopole', 'comparison')

NUMERIC_ERRORS = (SolvabilityError, ResolutionError)


class VerifyPipeline:
    """Runs the staged verification of one problem"""

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        self.config = config or {}
        acceptance = self.config.get('acceptance', {})
        self.relative_tolerance = float(acceptance.get('relative_tolerance', 0.01))
        self.near_field_tolerance = float(acceptance.get('near_field_tolerance', 0.02))
        self.convergence_ratio = float(acceptance.get('convergence_ratio', 3.0))
        self.convergence_floor = float(acceptance.get('convergence_floor', 1e-8))
        self.lab = MonopoleLab(self.config)

    def run(
        self,
        problem: ProblemSpec,
        resolution: Optional[Sequence[int]] = None,
        tolerance: Optional[float] = None,
        refine: bool = False,
    ) -> Dict[str, Any]:
        resolution = tuple(resolution or problem.resolution or (self.lab.default_resolution,) * 3)
        tolerance = tolerance or problem.tolerance or self.relative_tolerance

        report: Dict[str, Any] = {
            'problem': problem.name,
            'status': PASS,
            'resolution': list(resolution),
            'tolerance': tolerance,
            'stages': {},
            'failure': None,
        }
        context: Dict[str, Any] = {}
        steps: Tuple[Tuple[str, Callable], ...] = (
            ('geometry', lambda: self._geometry(problem, context)),
            ('upsilon', lambda: self._upsilon(problem, context)),
            ('difference_modules', lambda: self._difference_modules(problem, context)),
            ('degree', lambda: self._degree(context)),
            ('monopole', lambda: self._monopole(problem, context, resolution)),
            ('comparison', lambda: self._comparison(problem, context, resolution, tolerance, refine)),
        )

        for stage, step in steps:
            logger.info(f"Stage {stage}")
            try:
                report['stages'][stage] = _run_stage(stage, step)
            except StageError as e:
                report['status'] = TOLERANCE_FAILED if isinstance(e.cause, NUMERIC_ERRORS) else INVARIANT_FAILED
                report['failure'] = {
                    'stage': e.stage,
                    'error': type(e.cause).__name__,
                    'invariant': getattr(e.cause, 'invariant', None),
                    'message': str(e.cause),
                }
                logger.error(f"{e}")
                return report

        if not report['stages']['comparison']['passed']:
            report['status'] = TOLERANCE_FAILED
        logger.info(f"Verify finished: {report['status']}")
        return report

    def _geometry(self, problem: ProblemSpec, context: Dict[str, Any]) -> Dict[str, Any]:
        geom = derive_geometry(basis_of(problem))
        points = singular_points_of(problem)
        tolerance = float(self.config.get('geometry', {}).get('collision_tolerance', 1e-9))
        tables = project_singular_set(geom, points, tolerance)
        context.update(geom=geom, points=points, rho=twist_of(problem, geom))
        return geometry_summary(geom, tables)

    def _upsilon(self, problem: ProblemSpec, context: Dict[str, Any]) -> Dict[str, Any]:
        data = RankOneMiniData(
            geometry=context['geom'],
            singularities=tuple(context['points']),
            rho=context['rho'],
            base_degree=problem.base_degree,
        )
        result = upsilon_with_closure(data)
        context['upsilon'] = result
        return upsilon_summary(result)

    def _difference_modules(self, problem: ProblemSpec, context: Dict[str, Any]) -> Dict[str, Any]:
        if problem.module is not None:
            logger.info("Using the module override instead of the Upsilon output")
            V = module_from_spec(problem.module)
        else:
            V = context['upsilon'].module
        context['module'] = V

        one_minus, minus = degree_forms(V)
        summary = module_summary(V)
        summary['degree_forms'] = {'one_minus_tau': rational_json(one_minus), 'minus_tau': rational_json(minus)}
        summary['override'] = problem.module is not None

        family = None
        if problem.candidates is not None:
            family = candidates_from_spec(problem.candidates)
        elif V.rank == 1 or V.is_split:
            family = summand_candidates(V)
        summary['stability'] = verdict_summary(check_stability(V, family)) if family is not None else None
        return summary

    def _degree(self, context: Dict[str, Any]) -> Dict[str, Any]:
        V = context['module']
        predicted = degree_comparison(V, context['geom'], context['rho'])
        context['predicted'] = predicted
        return {'predicted_mu_an': predicted, 'frak_t_pi': float(context['geom'].frak_t) * math.pi}

    def _monopole(self, problem: ProblemSpec, context: Dict[str, Any], resolution) -> Dict[str, Any]:
        solution = self._solve(problem, context, resolution)
        context['solution'] = solution
        return solution_summary(solution)

    def _solve(self, problem: ProblemSpec, context: Dict[str, Any], resolution) -> MonopoleSolution:
        points = list(context['points'])
        closure = context['upsilon'].closure
        if closure is not None:
            points.append(closure.point)
        return self.lab.solve(
            context['geom'], points, context['rho'], _b_field(problem, context), problem.base_degree, resolution
        )

    def _comparison(self, problem, context, resolution, tolerance: float, refine: bool) -> Dict[str, Any]:
        solution: MonopoleSolution = context['solution']
        predicted = context['predicted']
        discrepancy = abs(solution.deg_an - predicted)
        relative = discrepancy / max(abs(predicted), 1.0)

        ks = ks_degree(solution.deg_an, context['module'].rank, context['rho'])
        if problem.rho0_complex == 0 and not ks.is_pure_t:
            raise InvariantViolation('ks_pure_t', f"untwisted run gave c_w={ks.c_w}")

        near_field_gated = min(resolution) >= 64
        near_field_ok = all(fit.relative_error < self.near_field_tolerance for fit in solution.near_field_fit)

        comparison: Dict[str, Any] = {
            'deg_an': solution.deg_an,
            'predicted_mu_an': predicted,
            'discrepancy': discrepancy,
            'relative_error': relative,
            'ks_degree': {'c_t': ks.c_t, 'c_w': [ks.c_w.real, ks.c_w.imag], 'c_wbar': [ks.c_wbar.real, ks.c_wbar.imag]},
            'near_field': {'gated': near_field_gated, 'passed': near_field_ok},
            'refinement': None,
        }
        passed = relative < tolerance and (near_field_ok or not near_field_gated)

        if refine:
            fine_resolution = tuple(2 * n for n in resolution)
            fine = self._solve(problem, context, fine_resolution)
            fine_discrepancy = abs(fine.deg_an - predicted)
            converged, observed = refine_ratio(
                discrepancy, fine_discrepancy, self.convergence_ratio, self.convergence_floor
            )
            comparison['refinement'] = {
                'resolution': list(fine_resolution),
                'deg_an': fine.deg_an,
                'discrepancy': fine_discrepancy,
                'observed_ratio': observed,
                'converged': converged,
            }
            passed = passed and converged

        comparison['passed'] = passed
        return comparison


def run_verify(
    problem: ProblemSpec,
    config: Optional[Dict[str, Any]] = None,
    resolution: Optional[Sequence[int]] = None,
    tolerance: Optional[float] = None,
    refine: bool = False,
) -> Dict[str, Any]:
    return VerifyPipeline(config).run(problem, resolution, tolerance, refine)


def exit_code(report: Dict[str, Any]) -> int:
    return EXIT_CODES[report['status']]


def _run_stage(stage: str, step: Callable[[], Dict[str, Any]]) -> Dict[str, Any]:
    try:
        return step()
    except ValidationError as e:
        raise StageError(stage, ValueError(validation_message(e))) from e
    except (MonodromeError, ValueError, ZeroDivisionError) as e:
        raise StageError(stage, e) from e


def _b_field(problem: ProblemSpec, context: Dict[str, Any]) -> Optional[HarmonicBField]:
    if problem.B is None:
        return None
    alpha = complex(*problem.B.alpha)
    expected = -1j * context['rho'].rho0
    if abs(alpha - expected) > 1e-12 * max(1.0, abs(expected)):
        raise InvariantViolation('b_field_twist', f"B has alpha={alpha} but the twist requires {expected}")
    if problem.B.c is None:
        return None
    return HarmonicBField(c=problem.B.c, alpha=alpha)
