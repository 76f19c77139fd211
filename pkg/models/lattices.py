"""Laurent-polynomial matrices in the local parameter z and lattice chains.

A chain step M relates two consecutive lattices L_{i-1}, L_i of the stalk of
meromorphic sections at a puncture: the columns of M are the basis vectors of
L_{i-1} written in the basis of L_i. With that reading the degree pairing
deg(L_i, L_{i-1}) is ord_z det M.
"""

from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Sequence, Tuple

import sympy

from utils.errors import InvariantViolation

Z = sympy.Symbol('z')


def laurent_terms(expr: sympy.Expr) -> Dict[int, sympy.Expr]:
    """exponent -> coefficient map of an expanded Laurent polynomial in z"""

    expr = sympy.expand(expr)
    if expr == 0:
        return {}
    terms: Dict[int, sympy.Expr] = {}
    for term in sympy.Add.make_args(expr):
        coeff, exponent = term.as_coeff_exponent(Z)
        if coeff.has(Z) or not exponent.is_integer:
            raise InvariantViolation('laurent_entry', f"{expr} is not a Laurent polynomial in z")
        key = int(exponent)
        terms[key] = terms.get(key, sympy.Integer(0)) + coeff
    return {k: sympy.expand_complex(v) for k, v in terms.items() if sympy.expand_complex(v) != 0}


def laurent_from_terms(terms: Mapping[int, sympy.Expr]) -> sympy.Expr:
    return sympy.expand(sum((sympy.sympify(c) * Z ** int(k) for k, c in terms.items()), sympy.Integer(0)))


@dataclass(frozen=True)
class LaurentMatrix:
    matrix: sympy.ImmutableMatrix

    def __post_init__(self):
        matrix = sympy.ImmutableMatrix(self.matrix)
        if matrix.rows != matrix.cols:
            raise InvariantViolation('square', f"Laurent matrix must be square, got {matrix.shape}")
        entries = [laurent_from_terms(laurent_terms(entry)) for entry in matrix]
        object.__setattr__(self, 'matrix', sympy.ImmutableMatrix(matrix.rows, matrix.cols, entries))

    @property
    def size(self) -> int:
        return self.matrix.rows

    def __getitem__(self, key):
        return self.matrix[key]

    def __matmul__(self, other: 'LaurentMatrix') -> 'LaurentMatrix':
        if self.size != other.size:
            raise ValueError(f"size mismatch: {self.size} vs {other.size}")
        return LaurentMatrix((self.matrix * other.matrix).applyfunc(sympy.expand))

    def terms(self, i: int, j: int) -> Dict[int, sympy.Expr]:
        return laurent_terms(self.matrix[i, j])

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> 'LaurentMatrix':
        return LaurentMatrix(self.matrix.extract(list(rows), list(cols)))

    def direct_sum(self, other: 'LaurentMatrix') -> 'LaurentMatrix':
        return LaurentMatrix(sympy.diag(self.matrix, other.matrix))

    def inverse(self) -> 'LaurentMatrix':
        """Inverse over Laurent polynomials; needs a monomial determinant"""

        det = sympy.expand(self.matrix.det(method='berkowitz'))
        terms = laurent_terms(det)
        if len(terms) != 1:
            raise ValueError(f"det {det} is not a unit of the Laurent ring; inverse is not a Laurent matrix")
        (exponent, coeff), = terms.items()
        inverse = self.matrix.adjugate(method='berkowitz') * (Z ** (-exponent) / coeff)
        return LaurentMatrix(inverse.applyfunc(sympy.expand))

    @classmethod
    def from_terms(cls, size: int, entries: Mapping[Tuple[int, int], Mapping[int, object]]) -> 'LaurentMatrix':
        matrix = sympy.zeros(size, size)
        for (i, j), terms in entries.items():
            matrix[i, j] = laurent_from_terms(terms)
        return cls(sympy.ImmutableMatrix(matrix))

    @classmethod
    def identity(cls, size: int) -> 'LaurentMatrix':
        return cls(sympy.ImmutableMatrix(sympy.eye(size)))

    @classmethod
    def monomial_diagonal(cls, exponents: Iterable[int]) -> 'LaurentMatrix':
        return cls(sympy.ImmutableMatrix(sympy.diag(*[Z ** int(k) for k in exponents])))

    @classmethod
    def elementary(cls, size: int, i: int, j: int, entry: sympy.Expr) -> 'LaurentMatrix':
        """Identity plus `entry` at (i, j), i != j: determinant 1"""
        if i == j:
            raise ValueError("elementary matrix needs an off-diagonal position")
        matrix = sympy.eye(size)
        matrix[i, j] = entry
        return cls(sympy.ImmutableMatrix(matrix))

    @classmethod
    def scalar(cls, entry: sympy.Expr) -> 'LaurentMatrix':
        return cls(sympy.ImmutableMatrix([[entry]]))


@dataclass(frozen=True)
class LatticeChain:
    rank: int
    steps: Tuple[LaurentMatrix, ...]

    def __post_init__(self):
        from services.lattice_algebra import det_valuation

        object.__setattr__(self, 'steps', tuple(self.steps))
        if self.rank < 1:
            raise InvariantViolation('chain_rank', f"chain rank must be positive, got {self.rank}")
        for index, step in enumerate(self.steps, start=1):
            if step.size != self.rank:
                raise InvariantViolation(
                    'chain_rank', f"step {index} is {step.size}x{step.size}, chain rank is {self.rank}"
                )
            det_valuation(step)

    def __len__(self) -> int:
        return len(self.steps)

    def degrees(self) -> Tuple[int, ...]:
        from services.lattice_algebra import lattice_pair_degree
        return tuple(lattice_pair_degree(step) for step in self.steps)

    def total_degree(self) -> int:
        return sum(self.degrees())
