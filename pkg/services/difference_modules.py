"""Parabolic degree, slope, induced submodules, stability and the rank-one construction."""

import math
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple, Union

from models.geometry import PunctureWeightTable
from models.lattices import Z, LatticeChain, LaurentMatrix
from models.modules import (
    Block,
    CandidateFamily,
    Degree,
    ParabolicDifferenceModule,
    PunctureData,
    StabilityVerdict,
    SubmoduleDescriptor,
    TwistLineBundle,
)
from services.lattice_algebra import lattice_pair_degree
from utils.errors import GeometryMismatchError, InvariantViolation
from utils.logger import get_logger
from utils.numbers import Scalar, as_complex, parse_tau, rational_json, scalar_equal

logger = get_logger(__name__)

DEGREE_FLOAT_TOLERANCE = 1e-9


def degree_forms(V: ParabolicDifferenceModule) -> Tuple[Degree, Degree]:
    """(deg V + sum (1 - tau) deg, deg V - sum tau deg)"""

    one_minus_tau: Degree = Fraction(V.deg_V)
    minus_tau: Degree = Fraction(V.deg_V)
    for data in V.punctures:
        for tau, step in zip(data.table.tau_values, data.chain.steps):
            jump = lattice_pair_degree(step)
            one_minus_tau += (1 - tau) * jump
            minus_tau -= tau * jump
    return one_minus_tau, minus_tau


def parabolic_degree(V: ParabolicDifferenceModule) -> Degree:
    one_minus_tau, minus_tau = degree_forms(V)
    if not _degrees_agree(one_minus_tau, minus_tau):
        raise InvariantViolation(
            'degree_forms', f"(1-tau) form gives {one_minus_tau}, (-tau) form gives {minus_tau}"
        )
    return one_minus_tau


def slope(V: ParabolicDifferenceModule) -> Degree:
    return parabolic_degree(V) / V.rank


def induce_submodule(V: ParabolicDifferenceModule, S: SubmoduleDescriptor) -> ParabolicDifferenceModule:
    """Parabolic submodule with the lattices L ∩ V' and the inherited weight tables"""

    if S.rank > V.rank:
        raise InvariantViolation('candidate_rank', f"candidate rank {S.rank} exceeds module rank {V.rank}")

    if S.chains is not None:
        if len(S.chains) != len(V.punctures):
            raise InvariantViolation(
                'candidate_shape', f"{len(S.chains)} induced chains for {len(V.punctures)} punctures"
            )
        punctures = tuple(
            PunctureData(table=data.table, chain=chain) for data, chain in zip(V.punctures, S.chains)
        )
        return ParabolicDifferenceModule(
            rank=S.rank, deg_V=S.deg_V, twist=V.twist, frak_a=V.frak_a, punctures=punctures,
        )

    columns = S.frame_columns
    if any(c < 0 or c >= V.rank for c in columns):
        raise InvariantViolation('candidate_shape', f"frame columns {list(columns)} outside rank {V.rank}")
    if len(columns) == V.rank:
        return V

    others = [c for c in range(V.rank) if c not in columns]
    punctures = []
    for data in V.punctures:
        steps = []
        for index, step in enumerate(data.chain.steps, start=1):
            leak = step.matrix.extract(others, list(columns))
            if any(entry != 0 for entry in leak):
                raise InvariantViolation(
                    'difference_stable',
                    f"columns {list(columns)} are not a stable direction: step {index} at P={data.P} "
                    f"mixes them into columns {others}",
                )
            steps.append(step.submatrix(columns, columns))
        punctures.append(PunctureData(table=data.table, chain=LatticeChain(rank=len(columns), steps=tuple(steps))))

    blocks = _restrict_blocks(V.blocks, columns)
    return ParabolicDifferenceModule(
        rank=len(columns),
        deg_V=S.deg_V,
        twist=V.twist,
        frak_a=V.frak_a,
        punctures=tuple(punctures),
        blocks=blocks,
    )


def check_stability(V: ParabolicDifferenceModule,
                    candidates: Union[CandidateFamily, Sequence[SubmoduleDescriptor]]) -> StabilityVerdict:
    """Stability verdict relative to a candidate family"""

    family = candidates if isinstance(candidates, CandidateFamily) else CandidateFamily(tuple(candidates))
    mu = slope(V)

    if V.rank == 1:
        return StabilityVerdict(verdict='stable', module_slope=mu)
    if len(family) == 0:
        raise InvariantViolation('candidates', f"a rank-{V.rank} module needs a nonempty candidate family")

    slopes: List[Tuple[SubmoduleDescriptor, Degree]] = []
    for candidate in family.candidates:
        if candidate.rank >= V.rank:
            raise InvariantViolation(
                'candidate_rank', f"candidate {candidate.name} has rank {candidate.rank}, not < {V.rank}"
            )
        slopes.append((candidate, slope(induce_submodule(V, candidate))))

    table = tuple((candidate.name, value) for candidate, value in slopes)
    witness, top = max(slopes, key=lambda pair: pair[1])

    logger.info(f"Stability check: mu={mu}, max candidate slope={top} ({witness.name})")

    if _strictly_greater(top, mu):
        return StabilityVerdict('unstable', mu, witness, top, table)
    if not family.exhaustive:
        equal = _degrees_agree(top, mu)
        return StabilityVerdict('inconclusive', mu, witness if equal else None, top if equal else None, table)
    if not _degrees_agree(top, mu):
        return StabilityVerdict('stable', mu, None, None, table)

    equal_slope = [candidate for candidate, value in slopes if _degrees_agree(value, mu)]
    for candidate in equal_slope:
        if candidate.frame_columns is None:
            continue
        complement = tuple(c for c in range(V.rank) if c not in candidate.frame_columns)
        if any(other.frame_columns == complement for other in equal_slope):
            return StabilityVerdict('polystable', mu, candidate, mu, table)
    return StabilityVerdict('semistable', mu, equal_slope[0], mu, table)


def summand_candidates(V: ParabolicDifferenceModule) -> CandidateFamily:
    """All proper unions of the recorded direct summands; exhaustive only when every summand is a line"""

    blocks = _blocks_of(V)
    candidates = []
    for size in range(1, len(blocks)):
        for chosen in combinations(blocks, size):
            columns = tuple(sorted(c for block in chosen for c in block.columns))
            candidates.append(SubmoduleDescriptor(
                rank=len(columns),
                deg_V=sum(block.deg_V for block in chosen),
                frame_columns=columns,
            ))
    exhaustive = all(len(block.columns) == 1 for block in blocks)
    return CandidateFamily(tuple(candidates), exhaustive=exhaustive)


def direct_sum(V1: ParabolicDifferenceModule, V2: ParabolicDifferenceModule) -> ParabolicDifferenceModule:
    """Block direct sum; tau tables are merged and missing jumps become identity steps"""

    if not scalar_equal(V1.frak_a, V2.frak_a):
        raise GeometryMismatchError(f"summands have frak_a {V1.frak_a} and {V2.frak_a}")
    if not scalar_equal(V1.twist.parameter, V2.twist.parameter):
        raise GeometryMismatchError(
            f"summands are twisted by different line bundles ({V1.twist.parameter} vs {V2.twist.parameter})"
        )

    merged: List[Dict] = []
    for side, module in ((0, V1), (1, V2)):
        for data in module.punctures:
            slot = next((m for m in merged if scalar_equal(m['P'], data.P)), None)
            if slot is None:
                slot = {'P': data.P, 'data': [None, None]}
                merged.append(slot)
            slot['data'][side] = data

    punctures = []
    for slot in merged:
        first, second = slot['data']
        s_by_tau = {}
        for data in (first, second):
            if data is not None:
                s_by_tau.update(zip(data.table.tau_values, data.table.s_values))
        taus = sorted(s_by_tau)

        steps = []
        for tau in taus:
            left = _step_at(first, tau, V1.rank)
            right = _step_at(second, tau, V2.rank)
            steps.append(left.direct_sum(right))

        table = PunctureWeightTable(P=slot['P'], s_values=tuple(s_by_tau[t] for t in taus), tau_values=tuple(taus))
        punctures.append(PunctureData(table=table, chain=LatticeChain(rank=V1.rank + V2.rank, steps=tuple(steps))))

    blocks = _blocks_of(V1) + tuple(
        Block(tuple(c + V1.rank for c in block.columns), block.deg_V) for block in _blocks_of(V2)
    )
    return ParabolicDifferenceModule(
        rank=V1.rank + V2.rank,
        deg_V=V1.deg_V + V2.deg_V,
        twist=V1.twist,
        frak_a=V1.frak_a,
        punctures=tuple(punctures),
        blocks=blocks,
    )


def rank_one_construct(divisor: Sequence[Tuple[Scalar, int]],
                       P0: Scalar,
                       ell: int,
                       tau1,
                       tau2,
                       frak_a: Scalar = 0,
                       twist: Optional[TwistLineBundle] = None) -> ParabolicDifferenceModule:
    """Rank-one parabolic module on O_T with a two-step jump of size ell at P0.

    The twist is the degree-0 bundle O(-sum l_i P_i); at each P_i the single
    step lands in its stalk, and at P0 the lattice first widens to O(ell P0)
    and then returns to O.
    """

    tau1, tau2 = parse_tau(tau1), parse_tau(tau2)
    if not 0 <= tau1 < tau2 < 1:
        raise InvariantViolation('weights', f"need 0 <= tau1 < tau2 < 1, got {tau1}, {tau2}")
    if sum(l for _, l in divisor) != 0:
        raise InvariantViolation('divisor_degree', f"sum of l_i is {sum(l for _, l in divisor)}, expected 0")

    points = [P for P, _ in divisor]
    for index, P in enumerate(points):
        if scalar_equal(P, P0):
            raise InvariantViolation('distinct_points', f"P0={P0} coincides with P_{index + 1}")
        for other in points[index + 1:]:
            if scalar_equal(P, other):
                raise InvariantViolation('distinct_points', f"divisor point {P} is listed twice")

    zero = Fraction(0)
    punctures = [
        PunctureData(
            table=PunctureWeightTable.from_taus(P, (zero,)),
            chain=LatticeChain(rank=1, steps=(LaurentMatrix.scalar(Z ** (-l)),)),
        )
        for P, l in divisor
    ]
    punctures.append(PunctureData(
        table=PunctureWeightTable.from_taus(P0, (tau1, tau2)),
        chain=LatticeChain(rank=1, steps=(LaurentMatrix.scalar(Z ** ell), LaurentMatrix.scalar(Z ** (-ell)))),
    ))

    return ParabolicDifferenceModule(
        rank=1,
        deg_V=0,
        twist=twist or TwistLineBundle(parameter=0, provenance='explicit'),
        frak_a=frak_a,
        punctures=tuple(punctures),
    )


def rank_one_for_degree(d, P0: Scalar = 0, frak_a: Scalar = 0) -> ParabolicDifferenceModule:
    """Rank-one module of prescribed rational degree via ell = 2 ceil|d| sign(d)"""

    d = Fraction(d)
    if d == 0:
        return rank_one_construct([], P0, 0, Fraction(0), Fraction(1, 2), frak_a=frak_a)
    ell = 2 * math.ceil(abs(d)) * (1 if d > 0 else -1)
    return rank_one_construct([], P0, ell, Fraction(0), d / ell, frak_a=frak_a)


def module_summary(V: ParabolicDifferenceModule) -> Dict:
    degree = parabolic_degree(V)
    return {
        'rank': V.rank,
        'deg_V': V.deg_V,
        'degree': rational_json(degree),
        'slope': rational_json(degree / V.rank),
        'punctures': [
            {
                'P': [as_complex(data.P).real, as_complex(data.P).imag],
                'tau_values': [rational_json(t) for t in data.table.tau_values],
                'jumps': list(data.chain.degrees()),
            }
            for data in V.punctures
        ],
    }


def _step_at(data: Optional[PunctureData], tau, rank: int) -> LaurentMatrix:
    if data is not None:
        for value, step in zip(data.table.tau_values, data.chain.steps):
            if value == tau:
                return step
    return LaurentMatrix.identity(rank)


def _blocks_of(V: ParabolicDifferenceModule) -> Tuple[Block, ...]:
    return V.blocks or (Block(tuple(range(V.rank)), V.deg_V),)


def _restrict_blocks(blocks: Tuple[Block, ...], columns: Tuple[int, ...]) -> Tuple[Block, ...]:
    position = {c: i for i, c in enumerate(columns)}
    kept = [block for block in blocks if set(block.columns) <= set(columns)]
    if sum(len(block.columns) for block in kept) != len(columns) or len(kept) < 2:
        return ()
    return tuple(Block(tuple(position[c] for c in block.columns), block.deg_V) for block in kept)


def _degrees_agree(a: Degree, b: Degree) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b
    return abs(float(a) - float(b)) <= DEGREE_FLOAT_TOLERANCE * max(1.0, abs(float(a)), abs(float(b)))


def _strictly_greater(a: Degree, b: Degree) -> bool:
    return a > b and not _degrees_agree(a, b)


def verdict_summary(verdict: StabilityVerdict) -> Dict:
    return {
        'verdict': verdict.verdict,
        'slope': rational_json(verdict.module_slope),
        'witness': verdict.witness.name if verdict.witness is not None else None,
        'witness_slope': rational_json(verdict.witness_slope) if verdict.witness_slope is not None else None,
        'candidate_slopes': [{'candidate': name, 'slope': rational_json(value)} for name, value in verdict.slopes],
    }
