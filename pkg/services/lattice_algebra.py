"""Exact local algebra at a puncture: valuations, local Smith exponents and the
degree pairing between lattices."""

from functools import lru_cache
from typing import Any, Dict, List, Sequence, Tuple

import sympy
from sympy.polys.matrices import DomainMatrix

from models.lattices import Z, LatticeChain, LaurentMatrix, laurent_terms
from utils.errors import DegenerateLatticeStep
from utils.logger import get_logger
from utils.numbers import parse_real

logger = get_logger(__name__)


def valuation(expr: sympy.Expr) -> int:
    """z-adic valuation of a nonzero rational function of z"""

    expr = sympy.cancel(sympy.together(expr))
    if expr == 0:
        raise DegenerateLatticeStep("valuation of zero")
    numerator, denominator = sympy.fraction(expr)
    return _lowest_exponent(numerator) - _lowest_exponent(denominator)


def det_valuation(M: LaurentMatrix) -> int:
    """ord_z det M, exact; raises DegenerateLatticeStep when det vanishes"""
    return _det_valuation(M.matrix)


def lattice_pair_degree(M: LaurentMatrix) -> int:
    """deg(L_i, L_{i-1}) for the step M from L_{i-1} to L_i"""
    return det_valuation(M)


def local_smith_exponents(M: LaurentMatrix) -> Tuple[int, ...]:
    """Exponents d_1 <= ... <= d_r with M = U diag(z^d) V, U and V invertible over O.

    Pivot-on-minimal-valuation elimination: every multiplier is a ratio with
    non-negative valuation, so each row operation stays inside GL_r(O).
    """

    size = M.size
    work = [[sympy.expand(M.matrix[i, j]) for j in range(size)] for i in range(size)]
    rows, cols = list(range(size)), list(range(size))
    exponents: List[int] = []

    while rows:
        pivot = None
        for i in rows:
            for j in cols:
                if work[i][j] == 0:
                    continue
                v = valuation(work[i][j])
                if pivot is None or v < pivot[0]:
                    pivot = (v, i, j)
        if pivot is None:
            raise DegenerateLatticeStep(f"rank drops after {len(exponents)} pivots")

        v, pi, pj = pivot
        for i in rows:
            if i == pi or work[i][pj] == 0:
                continue
            factor = sympy.cancel(work[i][pj] / work[pi][pj])
            for j in cols:
                work[i][j] = sympy.cancel(work[i][j] - factor * work[pi][j])

        exponents.append(v)
        rows.remove(pi)
        cols.remove(pj)

    return tuple(sorted(exponents))


def lattice_lengths(M: LaurentMatrix) -> Tuple[int, int]:
    """(length(L_i / L_i ∩ L_{i-1}), length(L_{i-1} / L_i ∩ L_{i-1}))"""

    exponents = local_smith_exponents(M)
    return (sum(d for d in exponents if d > 0), sum(-d for d in exponents if d < 0))


def compose(second: LaurentMatrix, first: LaurentMatrix) -> LaurentMatrix:
    """Step L_0 -> L_2 from steps L_0 -> L_1 (first) and L_1 -> L_2 (second)"""
    return second @ first


def chain_total(chain: LatticeChain) -> int:
    return sum(lattice_pair_degree(step) for step in chain.steps)


def laurent_to_json(M: LaurentMatrix) -> Dict[str, Any]:
    entries = []
    for i in range(M.size):
        for j in range(M.size):
            terms = M.terms(i, j)
            if not terms:
                continue
            entries.append([i, j, [[exponent, _coefficient_json(coeff)] for exponent, coeff in sorted(terms.items())]])
    return {'r': M.size, 'entries': entries}


def laurent_from_json(payload: Dict[str, Any]) -> LaurentMatrix:
    size = int(payload['r'])
    entries: Dict[Tuple[int, int], Dict[int, sympy.Expr]] = {}
    for i, j, terms in payload.get('entries', []):
        if not (0 <= i < size and 0 <= j < size):
            raise ValueError(f"entry ({i}, {j}) outside a {size}x{size} matrix")
        bucket = entries.setdefault((int(i), int(j)), {})
        for exponent, coefficient in terms:
            bucket[int(exponent)] = bucket.get(int(exponent), 0) + _coefficient_from_json(coefficient)
    return LaurentMatrix.from_terms(size, entries)


def chain_to_json(chain: LatticeChain) -> List[Dict[str, Any]]:
    return [laurent_to_json(step) for step in chain.steps]


def chain_from_json(rank: int, steps: Sequence[Dict[str, Any]]) -> LatticeChain:
    return LatticeChain(rank=rank, steps=tuple(laurent_from_json(step) for step in steps))


@lru_cache(maxsize=8192)
def _det_valuation(matrix: sympy.ImmutableMatrix) -> int:
    det = _laurent_det(matrix)
    if det == 0:
        raise DegenerateLatticeStep(f"det vanishes identically for {matrix.tolist()}")
    value = min(laurent_terms(det))
    logger.debug(f"ord_z det = {value}")
    return value


def _laurent_det(matrix: sympy.ImmutableMatrix) -> sympy.Expr:
    """det of a Laurent matrix via a column-shifted polynomial matrix over QQ_I[z]"""

    size = matrix.rows
    shifts = []
    columns = []
    for j in range(size):
        column = [sympy.expand(matrix[i, j]) for i in range(size)]
        low = min((min(laurent_terms(entry)) for entry in column if entry != 0), default=0)
        shifts.append(low)
        columns.append([sympy.expand(entry * Z ** (-low)) for entry in column])

    polynomial = sympy.Matrix(size, size, lambda i, j: columns[j][i])
    if all(entry.is_number for entry in polynomial):
        det = polynomial.det(method='bareiss')
    else:
        domain_matrix = DomainMatrix.from_Matrix(polynomial)
        det = domain_matrix.domain.to_sympy(domain_matrix.det())
    return sympy.expand(det * Z ** sum(shifts))


def _lowest_exponent(polynomial: sympy.Expr) -> int:
    polynomial = sympy.expand(polynomial)
    if not polynomial.has(Z):
        return 0
    return min(monomial[0] for monomial in sympy.Poly(polynomial, Z).monoms())


def _coefficient_json(coeff: sympy.Expr) -> List[int]:
    re_value, im_value = sympy.Rational(sympy.re(coeff)), sympy.Rational(sympy.im(coeff))
    return [int(re_value.p), int(re_value.q), int(im_value.p), int(im_value.q)]


def _coefficient_from_json(value: Any) -> sympy.Expr:
    if isinstance(value, (list, tuple)) and len(value) == 4:
        re_num, re_den, im_num, im_den = (int(v) for v in value)
        return sympy.Rational(re_num, re_den) + sympy.I * sympy.Rational(im_num, im_den)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return parse_real(value[0]) + sympy.I * parse_real(value[1])
    return parse_real(value)
