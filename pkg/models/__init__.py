from .geometry import LatticeBasis, LatticeVector, PunctureWeightTable, SingularPoint, TorusGeometry
from .lattices import LatticeChain, LaurentMatrix
from .modules import (
    CandidateFamily,
    ParabolicDifferenceModule,
    StabilityVerdict,
    SubmoduleDescriptor,
    TwistLineBundle,
)
from .mini import KSDegreeVector, RankOneMiniData, TwistForm
from .fields import HarmonicBField, MonopoleSolution, TorusGrid
from .problem import ProblemSpec

__all__ = [
    'LatticeBasis',
    'LatticeVector',
    'PunctureWeightTable',
    'SingularPoint',
    'TorusGeometry',
    'LatticeChain',
    'LaurentMatrix',
    'CandidateFamily',
    'ParabolicDifferenceModule',
    'StabilityVerdict',
    'SubmoduleDescriptor',
    'TwistLineBundle',
    'KSDegreeVector',
    'RankOneMiniData',
    'TwistForm',
    'HarmonicBField',
    'MonopoleSolution',
    'TorusGrid',
    'ProblemSpec',
]
