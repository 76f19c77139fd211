"""Lattice constants, the (t, w) -> (s, u) coordinate change and the projection
of the singular set to weighted punctures on the elliptic curve."""

from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy

from models.geometry import (
    LatticeBasis,
    LatticeVector,
    PunctureWeightTable,
    SingularPoint,
    TorusGeometry,
)
from utils.errors import CollisionError, InvariantViolation
from utils.logger import get_logger
from utils.numbers import (
    Real,
    Scalar,
    all_exact,
    as_complex,
    canon,
    complex_json,
    conj,
    exact_complex_json,
    floor_int,
    im_part,
    inexact,
    is_exact,
    parse_complex,
    parse_real,
    rational_json,
    re_part,
    round_int,
    to_tau,
)

logger = get_logger(__name__)

DEFAULT_COLLISION_TOLERANCE = 1e-9


def basis_from_json(rows: Sequence[Sequence[Any]]) -> LatticeBasis:
    """[[a1, [re, im]], [a2, ...], [a3, ...]] -> LatticeBasis"""

    if len(rows) != 3:
        raise ValueError(f"a lattice basis needs three generators, got {len(rows)}")
    vectors = []
    for row in rows:
        if len(row) != 2:
            raise ValueError(f"generator must be [a, [re, im]], got {row!r}")
        vectors.append(LatticeVector(a=parse_real(row[0]), alpha=parse_complex(row[1])))
    return LatticeBasis(*vectors)


def singular_from_json(entries: Sequence[Dict[str, Any]]) -> List[SingularPoint]:
    points = []
    for entry in entries:
        points.append(SingularPoint(
            t=parse_real(entry['t']),
            w=parse_complex(entry['w']),
            charge=int(entry.get('charge', 1)),
        ))
    return points


def derive_geometry(basis: LatticeBasis) -> TorusGeometry:
    """Compute gamma, frak_t and frak_a, rejecting unoriented or degenerate bases"""

    exact = all_exact([v.a for v in basis.vectors] + [v.alpha for v in basis.vectors])
    a1, a2, a3 = (_coerce(v.a, exact) for v in basis.vectors)
    alpha1, alpha2, alpha3 = (_coerce(v.alpha, exact) for v in basis.vectors)

    area = im_part(conj(alpha1) * alpha2)
    if _is_zero(area, exact):
        raise InvariantViolation(
            'alpha_independence',
            f"alpha1={alpha1} and alpha2={alpha2} are R-linearly dependent (Im(conj(a1) a2) = 0)",
        )
    if area < 0:
        raise InvariantViolation(
            'alpha_orientation',
            f"(alpha1, alpha2) is not an oriented base of C: Im(conj(a1) a2) = {area}",
        )

    det = _orientation_determinant(basis, exact)
    if not det > 0:
        raise InvariantViolation(
            'basis_orientation',
            f"rows (a_i, Re alpha_i, Im alpha_i) have determinant {det}, expected > 0",
        )

    numerator = a1 * conj(alpha2) - a2 * conj(alpha1)
    denominator = alpha1 * conj(alpha2) - alpha2 * conj(alpha1)
    gamma = _normal(-numerator / denominator, exact)
    frak_t = _normal(a3 + 2 * re_part(gamma * alpha3), exact)

    if not frak_t > 0:
        raise InvariantViolation('frak_t_positive', f"derived frak_t = {frak_t} is not positive")

    logger.debug(f"Derived geometry: gamma={gamma}, frak_t={frak_t}, frak_a={alpha3}")

    if not exact:
        basis = LatticeBasis(*(LatticeVector(a=float(v.a), alpha=as_complex(v.alpha)) for v in basis.vectors))

    return TorusGeometry(
        basis=basis,
        gamma=gamma,
        frak_t=frak_t,
        frak_a=alpha3,
        Gamma0=(alpha1, alpha2),
        exact=exact,
    )


def to_su_coordinates(geom: TorusGeometry, point: Tuple[Real, Scalar]) -> Tuple[Real, Scalar]:
    t, w = point
    exact = geom.exact and is_exact(t) and is_exact(w)
    gamma = _coerce(geom.gamma, exact)
    t, w = _coerce(t, exact), _coerce(w, exact)
    return _normal(t + 2 * re_part(gamma * w), exact), w


def lattice_action(basis: LatticeBasis, index: int, point: Tuple[Real, Scalar]) -> Tuple[Real, Scalar]:
    """Translate a (t, w) lift by the generator e_index (1-based)"""

    vector = basis.vectors[index - 1]
    t, w = point
    return t + vector.a, w + vector.alpha


def su_action(geom: TorusGeometry, index: int, point: Tuple[Real, Scalar]) -> Tuple[Real, Scalar]:
    """The generator action read in (s, u) coordinates"""

    s, u = point
    if index in (1, 2):
        return s, u + geom.Gamma0[index - 1]
    if index == 3:
        return s + geom.frak_t, u + geom.frak_a
    raise ValueError(f"generator index must be 1, 2 or 3, got {index}")


def reduced_basis(geom: TorusGeometry) -> Tuple[Scalar, Scalar]:
    """Gauss (Lagrange) reduction of Gamma0, returned as an oriented pair"""

    exact = geom.exact
    b1, b2 = (_coerce(v, exact) for v in geom.Gamma0)

    while True:
        if _norm(b2) < _norm(b1):
            b1, b2 = b2, b1
        mu = round_int(re_part(conj(b1) * b2) / _norm(b1))
        if mu == 0:
            break
        b2 = _normal(b2 - mu * b1, exact)

    if im_part(conj(b1) * b2) < 0:
        b2 = _normal(-b2, exact)
    return b1, b2


def reduce_u(geom: TorusGeometry, u: Scalar) -> Scalar:
    """Reduce u into the half-open parallelogram of the reduced Gamma0 basis"""

    exact = geom.exact and is_exact(u)
    b1, b2 = (_coerce(b, exact) for b in reduced_basis(geom))
    u = _coerce(u, exact)
    x, y = _lattice_coordinates(b1, b2, u)
    return _normal(u - floor_int(x) * b1 - floor_int(y) * b2, exact)


def canonicalize(geom: TorusGeometry, point: Tuple[Real, Scalar]) -> Tuple[Real, Scalar]:
    """Fundamental-domain representative (s, u) of a lift: s in [0, frak_t)"""

    s, u = to_su_coordinates(geom, point)
    exact = geom.exact and is_exact(s) and is_exact(u)
    frak_t, frak_a = _coerce(geom.frak_t, exact), _coerce(geom.frak_a, exact)

    n3 = floor_int(s / frak_t)
    s = _normal(s - n3 * frak_t, exact)
    u = _normal(u - n3 * frak_a, exact)
    if not exact and s >= frak_t:
        s, u = s - frak_t, u - frak_a
    return s, reduce_u(geom, u)


def same_puncture(geom: TorusGeometry, u: Scalar, v: Scalar,
                  tolerance: float = DEFAULT_COLLISION_TOLERANCE) -> bool:
    """u and v agree modulo Gamma0 (exactly, or within tolerance for floats)"""

    exact = geom.exact and is_exact(u) and is_exact(v)
    b1, b2 = (_coerce(b, exact) for b in reduced_basis(geom))
    difference = _normal(_coerce(u, exact) - _coerce(v, exact), exact)
    x, y = _lattice_coordinates(b1, b2, difference)

    if exact:
        return sympy.sympify(x).is_integer and sympy.sympify(y).is_integer

    nx, ny = round(x), round(y)
    best = min(
        abs(difference - (nx + i) * b1 - (ny + j) * b2)
        for i in (-1, 0, 1) for j in (-1, 0, 1)
    )
    return best < tolerance


def project_singular_set(geom: TorusGeometry,
                         Z: Sequence[SingularPoint],
                         tolerance: float = DEFAULT_COLLISION_TOLERANCE) -> List[PunctureWeightTable]:
    """Group the singular set by puncture P and tabulate the sorted s and tau values.

    Exact lifts of one Gamma-orbit are merged and their charges summed; a net
    charge of zero removes the point. Float points that meet within the
    tolerance raise CollisionError. An empty singular set yields no punctures.
    """

    groups: List[Dict[str, Any]] = []
    for point in Z:
        s, u = canonicalize(geom, (point.t, point.w))
        group = next((g for g in groups if same_puncture(geom, u, g['P'], tolerance)), None)
        if group is None:
            group = {'P': u, 'hits': []}
            groups.append(group)
        for index, (other_s, other) in enumerate(group['hits']):
            if not _same_slice(geom, s, other_s, tolerance):
                continue
            if not (geom.exact and all(is_exact(value) for value in (s, other_s, u, group['P']))):
                raise CollisionError(
                    f"singular points ({point.t}, {point.w}) and ({other.t}, {other.w}) "
                    f"represent the same orbit within tolerance {tolerance:.0e}"
                )
            charge = other.charge + point.charge
            logger.debug(f"Merged lift ({point.t}, {point.w}) into ({other.t}, {other.w}), net charge {charge}")
            if charge == 0:
                del group['hits'][index]
            else:
                group['hits'][index] = (other_s, SingularPoint(other.t, other.w, charge))
            break
        else:
            group['hits'].append((s, point))

    tables = []
    for group in groups:
        if not group['hits']:
            continue
        hits = sorted(group['hits'], key=lambda hit: float(hit[0]))
        s_values = tuple(s for s, _ in hits)
        tau_values = tuple(_tau_of(geom, s) for s in s_values)
        tables.append(PunctureWeightTable(
            P=group['P'],
            s_values=s_values,
            tau_values=tau_values,
            charges=tuple(point.charge for _, point in hits),
        ))

    tables.sort(key=lambda table: (as_complex(table.P).real, as_complex(table.P).imag))
    logger.info(f"Projected {len(Z)} singular points onto {len(tables)} punctures")
    return tables


def geometry_summary(geom: TorusGeometry, tables: Optional[Sequence[PunctureWeightTable]] = None) -> Dict[str, Any]:
    summary: Dict[str, Any] = {
        'gamma': exact_complex_json(geom.gamma),
        'frak_t': _real_json(geom.frak_t),
        'frak_a': exact_complex_json(geom.frak_a),
        'volume': _real_json(geom.volume),
        'exact': geom.exact,
    }
    if tables is not None:
        summary['punctures'] = [
            {
                'P': complex_json(table.P),
                's_values': [_real_json(s) for s in table.s_values],
                'tau_values': [rational_json(tau) for tau in table.tau_values],
                'charges': list(table.charges or ()),
            }
            for table in tables
        ]
    return summary


def _real_json(value: Real):
    if is_exact(value):
        return str(sympy.sympify(value))
    return float(value)


def _tau_of(geom: TorusGeometry, s: Real):
    exact = geom.exact and is_exact(s)
    return to_tau(_normal(s / _coerce(geom.frak_t, exact), exact))


def _same_slice(geom: TorusGeometry, s: Real, other: Real, tolerance: float) -> bool:
    if geom.exact and is_exact(s) and is_exact(other):
        return canon(s - other) == 0
    gap = abs(float(s) - float(other))
    return min(gap, float(geom.frak_t) - gap) < tolerance


def _lattice_coordinates(b1: Scalar, b2: Scalar, u: Scalar) -> Tuple[Real, Real]:
    """Real coordinates (x, y) with u = x b1 + y b2"""

    x = im_part(u * conj(b2)) / im_part(b1 * conj(b2))
    y = im_part(conj(b1) * u) / im_part(conj(b1) * b2)
    return x, y


def _orientation_determinant(basis: LatticeBasis, exact: bool) -> Real:
    if exact:
        rows = [[v.a, re_part(v.alpha), im_part(v.alpha)] for v in basis.vectors]
        return sympy.Matrix(rows).det()
    return float(np.linalg.det(basis.matrix().T))


def _norm(z: Scalar) -> Real:
    return re_part(z) ** 2 + im_part(z) ** 2


def _coerce(value: Scalar, exact: bool) -> Scalar:
    if exact:
        return sympy.sympify(value)
    return inexact(value) if isinstance(value, sympy.Basic) else value


def _normal(value: Scalar, exact: bool) -> Scalar:
    return canon(value) if exact else value


def _is_zero(value: Real, exact: bool) -> bool:
    if exact:
        return canon(value) == 0
    return abs(value) < 1e-15
