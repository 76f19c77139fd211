"""Parabolic twisted difference modules and the objects used to test their stability."""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Optional, Tuple, Union

from models.geometry import PunctureWeightTable
from models.lattices import LatticeChain
from utils.errors import InvariantViolation, TelescopingError
from utils.numbers import Scalar

Provenance = Literal['rho_constant', 'explicit']
Degree = Union[Fraction, float]


@dataclass(frozen=True)
class TwistLineBundle:
    """Degree-0 line bundle: the trivial bundle with d-bar minus parameter * d(u-bar)"""

    parameter: Scalar = 0
    provenance: Provenance = 'explicit'

    def __post_init__(self):
        if self.provenance not in ('rho_constant', 'explicit'):
            raise InvariantViolation('twist_provenance', f"unknown provenance {self.provenance!r}")


@dataclass(frozen=True)
class PunctureData:
    table: PunctureWeightTable
    chain: LatticeChain

    @property
    def P(self) -> Scalar:
        return self.table.P


@dataclass(frozen=True)
class Block:
    """A direct summand of a split module: frame columns and their own deg V"""

    columns: Tuple[int, ...]
    deg_V: int


@dataclass(frozen=True)
class ParabolicDifferenceModule:
    rank: int
    deg_V: int
    twist: TwistLineBundle
    frak_a: Scalar
    punctures: Tuple[PunctureData, ...] = ()
    blocks: Tuple[Block, ...] = ()

    def __post_init__(self):
        from services.lattice_algebra import lattice_pair_degree

        object.__setattr__(self, 'punctures', tuple(self.punctures))
        object.__setattr__(self, 'blocks', tuple(self.blocks))

        if self.rank < 1:
            raise InvariantViolation('module_rank', f"rank must be positive, got {self.rank}")

        total = 0
        for data in self.punctures:
            if data.chain.rank != self.rank:
                raise InvariantViolation(
                    'chain_rank', f"chain at P={data.P} has rank {data.chain.rank}, module rank is {self.rank}"
                )
            if len(data.chain) != data.table.m:
                raise InvariantViolation(
                    'chain_length',
                    f"chain at P={data.P} has {len(data.chain)} steps but m(P) = {data.table.m}",
                )
            total += sum(lattice_pair_degree(step) for step in data.chain.steps)

        if total != 0:
            raise TelescopingError(total)

        if self.blocks:
            columns = sorted(c for block in self.blocks for c in block.columns)
            if columns != list(range(self.rank)):
                raise InvariantViolation('blocks', f"blocks {self.blocks} do not partition the frame of rank {self.rank}")
            if sum(block.deg_V for block in self.blocks) != self.deg_V:
                raise InvariantViolation('blocks', "block degrees do not add up to deg V")

    @property
    def is_split(self) -> bool:
        return len(self.blocks) > 1


@dataclass(frozen=True)
class SubmoduleDescriptor:
    """A candidate submodule: either frame columns of a split direction or explicit induced chains"""

    rank: int
    deg_V: int
    frame_columns: Optional[Tuple[int, ...]] = None
    chains: Optional[Tuple[LatticeChain, ...]] = None
    label: str = ''

    def __post_init__(self):
        if self.rank < 1:
            raise InvariantViolation('candidate_rank', f"candidate rank must be positive, got {self.rank}")
        if (self.frame_columns is None) == (self.chains is None):
            raise InvariantViolation('candidate_shape', "give exactly one of frame_columns or chains")
        if self.frame_columns is not None:
            object.__setattr__(self, 'frame_columns', tuple(sorted(self.frame_columns)))
            if len(set(self.frame_columns)) != self.rank:
                raise InvariantViolation(
                    'candidate_shape', f"{len(self.frame_columns)} frame columns for a rank-{self.rank} candidate"
                )
        if self.chains is not None:
            object.__setattr__(self, 'chains', tuple(self.chains))
            for chain in self.chains:
                if chain.rank != self.rank:
                    raise InvariantViolation('candidate_shape', f"induced chain of rank {chain.rank} for a rank-{self.rank} candidate")

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        if self.frame_columns is not None:
            return f"columns{list(self.frame_columns)}"
        return f"rank{self.rank}-chains"


@dataclass(frozen=True)
class CandidateFamily:
    candidates: Tuple[SubmoduleDescriptor, ...]
    exhaustive: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'candidates', tuple(self.candidates))

    def __len__(self) -> int:
        return len(self.candidates)


@dataclass(frozen=True)
class StabilityVerdict:
    verdict: Literal['stable', 'semistable', 'polystable', 'unstable', 'inconclusive']
    module_slope: Degree
    witness: Optional[SubmoduleDescriptor] = None
    witness_slope: Optional[Degree] = None
    slopes: Tuple[Tuple[str, Degree], ...] = field(default=())
