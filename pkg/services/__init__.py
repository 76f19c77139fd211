from .torus_geometry import derive_geometry, project_singular_set
from .lattice_algebra import lattice_pair_degree, local_smith_exponents
from .difference_modules import check_stability, direct_sum, parabolic_degree, rank_one_construct
from .mini_holomorphic import degree_comparison, ks_degree, upsilon_rank_one
from .monopole_lab import MonopoleLab, assemble_and_degree, periodic_green_potential
from .poisson_solver import poisson_normalize
from .run_recorder import RunRecorder

__all__ = [
    'derive_geometry',
    'project_singular_set',
    'lattice_pair_degree',
    'local_smith_exponents',
    'check_stability',
    'direct_sum',
    'parabolic_degree',
    'rank_one_construct',
    'degree_comparison',
    'ks_degree',
    'upsilon_rank_one',
    'MonopoleLab',
    'assemble_and_degree',
    'periodic_green_potential',
    'poisson_normalize',
    'RunRecorder',
]
