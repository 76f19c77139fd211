"""Valuations, Smith exponents and the lattice degree pairing"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import pytest
import sympy
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from models.lattices import Z, LatticeChain, LaurentMatrix
from services.lattice_algebra import (
    chain_from_json,
    chain_total,
    compose,
    det_valuation,
    laurent_from_json,
    laurent_to_json,
    lattice_lengths,
    lattice_pair_degree,
    local_smith_exponents,
    valuation,
)
from tests.lattice_oracle import truncated_degree, truncated_lengths
from utils.errors import DegenerateLatticeStep, InvariantViolation

z = Z


def laurent(entries):
    return LaurentMatrix(sympy.ImmutableMatrix(entries))


@pytest.mark.parametrize('matrix, expected', [
    ([[1]], 0),
    ([[z ** -2]], -2),
    ([[z, 1], [0, z ** -1]], 0),
    ([[1 + z, 0], [0, z ** 3]], 3),
])
def test_det_valuation(matrix, expected):
    assert det_valuation(laurent(matrix)) == expected


@pytest.mark.parametrize('matrix, expected', [
    ([[1, z], [0, 1]], 0),
    ([[z ** -3]], -3),
    ([[z ** -1, 0], [0, z]], 0),
])
def test_lattice_pair_degree(matrix, expected):
    assert lattice_pair_degree(laurent(matrix)) == expected


def test_degenerate_step():
    with pytest.raises(DegenerateLatticeStep, match='degenerate lattice step'):
        det_valuation(laurent([[1, z], [1, z]]))


def test_non_laurent_entry_rejected():
    with pytest.raises(InvariantViolation):
        laurent([[1 / (1 - z)]])


def test_valuation_of_rational_function():
    assert valuation(z ** 2 / (1 + z)) == 2
    assert valuation((z + z ** 2) / z ** 4) == -3


@pytest.mark.parametrize('matrix, exponents, lengths', [
    ([[z ** 2, 0], [0, z ** -1]], (-1, 2), (2, 1)),
    ([[z, 1], [0, z ** -1]], (-1, 1), (1, 1)),
    ([[z ** -3]], (-3,), (0, 3)),
    ([[1, z], [0, 1]], (0, 0), (0, 0)),
])
def test_smith_exponents_and_lengths(matrix, exponents, lengths):
    M = laurent(matrix)

    assert local_smith_exponents(M) == exponents
    assert lattice_lengths(M) == lengths
    gained, lost = lengths
    assert gained - lost == lattice_pair_degree(M)


def test_length_formula_matches_rank_one_example():
    """O -> z^-3 O: three monomial cosets z^-1, z^-2, z^-3 are lost"""
    assert truncated_lengths(sympy.Matrix([[z ** -3]])) == (0, 3)


exponent = st.integers(-3, 3)
coefficient = st.integers(-2, 2)


@st.composite
def laurent_entries(draw):
    terms = draw(st.dictionaries(exponent, coefficient.filter(lambda c: c != 0), max_size=2))
    return sum((c * z ** e for e, c in terms.items()), sympy.Integer(0))


@st.composite
def unimodular_perturbed(draw, size):
    """diag(z^d) multiplied by an elementary matrix on each side"""

    D = LaurentMatrix.monomial_diagonal(draw(st.lists(exponent, min_size=size, max_size=size)))
    if size == 1:
        return D
    left = LaurentMatrix.elementary(size, 0, size - 1, draw(laurent_entries()))
    right = LaurentMatrix.elementary(size, size - 1, 0, draw(laurent_entries()))
    return left @ D @ right


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3).flatmap(unimodular_perturbed))
def test_antisymmetry(M):
    assert lattice_pair_degree(M.inverse()) == -lattice_pair_degree(M)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3).flatmap(lambda r: st.tuples(unimodular_perturbed(r), unimodular_perturbed(r))))
def test_additivity(pair):
    first, second = pair
    assert lattice_pair_degree(compose(second, first)) == lattice_pair_degree(first) + lattice_pair_degree(second)


@settings(max_examples=30, deadline=None)
@given(unimodular_perturbed(2), st.integers(-3, 3), st.integers(1, 3))
def test_basis_independence(M, shift, c):
    """Changing bases by valuation-0 determinants leaves the degree alone"""

    U = laurent([[1 + z, c * z ** shift], [0, 1]])
    V = laurent([[c, 0], [z, 1 - z]])
    assert lattice_pair_degree(U @ M @ V) == lattice_pair_degree(M)


@pytest.mark.oracle
@settings(max_examples=25, deadline=None)
@given(st.integers(1, 2).flatmap(
    lambda r: st.lists(laurent_entries(), min_size=r * r, max_size=r * r).map(lambda xs: (r, xs))
))
def test_matches_brute_force_lengths(data):
    size, entries = data
    matrix = sympy.Matrix(size, size, entries)
    assume(sympy.expand(matrix.det()) != 0)
    M = LaurentMatrix(sympy.ImmutableMatrix(matrix))

    assert lattice_pair_degree(M) == truncated_degree(matrix)
    assert lattice_lengths(M) == truncated_lengths(matrix)


def test_chain_degrees():
    chain = LatticeChain(rank=1, steps=(LaurentMatrix.scalar(z ** 2), LaurentMatrix.scalar(z ** -1)))

    assert chain.degrees() == (2, -1)
    assert chain.total_degree() == 1
    assert chain_total(chain) == 1


def test_chain_rejects_rank_mismatch():
    with pytest.raises(InvariantViolation):
        LatticeChain(rank=2, steps=(LaurentMatrix.scalar(z),))


def test_laurent_json_schema():
    M = laurent([[z ** -1 + sympy.Rational(1, 2) * sympy.I, 0], [0, 3 * z]])

    payload = laurent_to_json(M)

    assert payload['r'] == 2
    assert [0, 0, [[-1, [1, 1, 0, 1]], [0, [0, 1, 1, 2]]]] in payload['entries']
    assert [1, 1, [[1, [3, 1, 0, 1]]]] in payload['entries']
    assert laurent_from_json(payload) == M


def test_chain_from_json_accepts_short_coefficients():
    chain = chain_from_json(1, [{'r': 1, 'entries': [[0, 0, [[2, 1]]]]}, {'r': 1, 'entries': [[0, 0, [[-2, "1/3"]]]]}])

    assert chain.degrees() == (2, -2)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
