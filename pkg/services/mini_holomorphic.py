"""The rank-one dictionary from torus data with Dirac singularities to parabolic
difference modules, together with the scattering twist, the analytic-degree
prediction and the degree vector."""

import math
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

from models.fields import HarmonicBField
from models.geometry import PunctureWeightTable, SingularPoint, TorusGeometry
from models.lattices import Z, LatticeChain, LaurentMatrix
from models.mini import ClosureStep, KSDegreeVector, RankOneMiniData, TwistForm, UpsilonResult
from models.modules import ParabolicDifferenceModule, PunctureData, TwistLineBundle
from services.difference_modules import module_summary, slope
from services.torus_geometry import project_singular_set
from utils.errors import GeometryMismatchError, InvariantViolation
from utils.logger import get_logger
from utils.numbers import as_complex, rational_json, re_part, scalar_equal

logger = get_logger(__name__)


def scattering_twist(rho: TwistForm, b1: float, b2: float) -> complex:
    """Additive shift of the d-bar operator when scattering from slice b1 to b2"""

    if b1 > b2:
        raise ValueError(f"scattering interval must satisfy b1 <= b2, got ({b1}, {b2})")
    return rho.rho0 * (b2 - b1)


def harmonic_b_field(geom: TorusGeometry, rho: TwistForm, c: float) -> HarmonicBField:
    """Constant harmonic 2-form matching the twist: alpha = -sqrt(-1) rho0"""

    return HarmonicBField(c=float(c), alpha=-1j * complex(rho.rho0))


def upsilon_rank_one(data: RankOneMiniData) -> ParabolicDifferenceModule:
    return upsilon_with_closure(data).module


def upsilon_with_closure(data: RankOneMiniData) -> UpsilonResult:
    """Build the module and, when the net charge is nonzero, the compensating closure step.

    Crossing a Dirac point of charge k is the step [z^k]. The closure step of
    degree -(net charge) sits at s = 0 of the puncture carrying the largest
    absolute charge, so the chain closes.
    """

    geom = data.geometry
    tables = project_singular_set(geom, data.singularities)

    for table in tables:
        for s, charge in zip(table.s_values, table.charges or ()):
            if charge == 0:
                raise InvariantViolation(
                    'charge', f"singular point at P={table.P}, s={s} has charge 0; Dirac points need k != 0"
                )

    net = sum(sum(table.charges or ()) for table in tables)
    closure: Optional[ClosureStep] = None
    if net != 0:
        tables, closure = _close_chain(geom, tables, net)
        logger.info(f"Net charge {net}: closure step of degree {closure.degree} at P={closure.P}")

    punctures = []
    for table in tables:
        steps = tuple(LaurentMatrix.scalar(Z ** k) for k in table.charges)
        punctures.append(PunctureData(table=table, chain=LatticeChain(rank=1, steps=steps)))

    module = ParabolicDifferenceModule(
        rank=1,
        deg_V=int(data.base_degree),
        twist=TwistLineBundle(parameter=data.rho.rho0 * float(geom.frak_t), provenance='rho_constant'),
        frak_a=geom.frak_a,
        punctures=tuple(punctures),
    )
    return UpsilonResult(module=module, closure=closure)


def slice_degree_profile(V: ParabolicDifferenceModule) -> List[Tuple[Optional[Any], int]]:
    """Degree of the slice bundle on each s-interval: (None, deg V) is the initial slice"""

    jumps: Dict[Any, int] = {}
    for data in V.punctures:
        for tau, degree in zip(data.table.tau_values, data.chain.degrees()):
            jumps[tau] = jumps.get(tau, 0) + degree

    profile: List[Tuple[Optional[Any], int]] = [(None, V.deg_V)]
    current = V.deg_V
    for tau in sorted(jumps):
        current += jumps[tau]
        profile.append((tau, current))
    return profile


def ks_degree(deg_an: float, rank: int, rho: TwistForm) -> KSDegreeVector:
    if rank < 1:
        raise ValueError(f"rank must be at least 1, got {rank}")
    c_w = -(rank / math.pi) * complex(rho.integral_rho0)
    return KSDegreeVector(c_t=deg_an / math.pi, c_w=c_w, c_wbar=c_w.conjugate())


def degree_comparison(V: ParabolicDifferenceModule, geom: TorusGeometry, rho: TwistForm) -> float:
    """Predicted analytic slope: frak_t pi mu(V) + 2 vol Re(gamma rho0)"""

    if not scalar_equal(V.frak_a, geom.frak_a):
        raise GeometryMismatchError(f"module built for frak_a={V.frak_a}, geometry has {geom.frak_a}")
    if V.twist.provenance == 'rho_constant':
        expected = rho.rho0 * float(geom.frak_t)
        if abs(as_complex(V.twist.parameter) - expected) > 1e-9 * max(1.0, abs(expected)):
            raise GeometryMismatchError(
                f"module twist {V.twist.parameter} was not derived from rho0={rho.rho0} on this geometry"
            )

    shift = 2.0 * float(geom.volume) * (as_complex(geom.gamma) * rho.rho0).real
    return float(geom.frak_t) * math.pi * float(slope(V)) + shift


def upsilon_summary(result: UpsilonResult) -> Dict[str, Any]:
    summary = module_summary(result.module)
    summary['twist'] = {
        'parameter': [as_complex(result.module.twist.parameter).real, as_complex(result.module.twist.parameter).imag],
        'provenance': result.module.twist.provenance,
    }
    summary['slice_degrees'] = [
        {'from_tau': '-eps' if tau is None else rational_json(tau), 'degree': degree}
        for tau, degree in slice_degree_profile(result.module)
    ]
    if result.closure is not None:
        summary['closure'] = {
            'P': [as_complex(result.closure.P).real, as_complex(result.closure.P).imag],
            'degree': result.closure.degree,
            'merged': result.closure.merged,
        }
    else:
        summary['closure'] = None
    return summary


def _close_chain(geom: TorusGeometry, tables: List[PunctureWeightTable], net: int):
    target = max(range(len(tables)), key=lambda i: (abs(sum(tables[i].charges)), -i))
    table = tables[target]
    P = table.P
    point = SingularPoint(t=-2 * re_part(geom.gamma * P), w=P, charge=-net)

    taus, s_values, charges = list(table.tau_values), list(table.s_values), list(table.charges)
    merged = taus[0] == 0
    if merged:
        charges[0] -= net
    else:
        taus.insert(0, Fraction(0) if isinstance(taus[0], Fraction) else 0.0)
        s_values.insert(0, 0)
        charges.insert(0, -net)

    closed = PunctureWeightTable(P=P, s_values=tuple(s_values), tau_values=tuple(taus), charges=tuple(charges))
    tables = list(tables)
    tables[target] = closed
    return tables, ClosureStep(P=P, degree=-net, point=point, merged=merged)
