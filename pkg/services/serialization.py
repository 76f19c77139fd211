"""Conversion between the JSON schemas and the domain types, plus report flattening."""

import json
from pathlib import Path
from typing import Any, Dict, Iterator, List, Tuple, Union

from pydantic import ValidationError

from models.geometry import LatticeBasis, PunctureWeightTable, SingularPoint
from models.lattices import LatticeChain
from models.mini import TwistForm
from models.modules import (
    Block,
    CandidateFamily,
    ParabolicDifferenceModule,
    PunctureData,
    SubmoduleDescriptor,
    TwistLineBundle,
)
from models.problem import CandidatesSpec, LaurentSpec, ModuleSpec, ProblemSpec
from services.lattice_algebra import chain_to_json, laurent_from_json
from services.torus_geometry import basis_from_json, singular_from_json
from utils.logger import get_logger
from utils.numbers import as_complex, exact_complex_json, is_exact, parse_complex, parse_tau

logger = get_logger(__name__)


def read_json(path: Union[str, Path]) -> Any:
    with open(path, 'r') as f:
        return json.load(f)


def load_problem(path: Union[str, Path]) -> ProblemSpec:
    problem = ProblemSpec.model_validate(read_json(path))
    logger.debug(f"Loaded problem '{problem.name or path}' with {len(problem.singular)} singular points")
    return problem


def load_module(path: Union[str, Path]) -> ParabolicDifferenceModule:
    return module_from_spec(ModuleSpec.model_validate(read_json(path)))


def load_candidates(path: Union[str, Path]) -> CandidateFamily:
    return candidates_from_spec(CandidatesSpec.model_validate(read_json(path)))


def basis_of(problem: ProblemSpec) -> LatticeBasis:
    return basis_from_json([[a, list(alpha)] for a, alpha in problem.basis])


def singular_points_of(problem: ProblemSpec) -> List[SingularPoint]:
    return singular_from_json([entry.model_dump() for entry in problem.singular])


def twist_of(problem: ProblemSpec, geom) -> TwistForm:
    return TwistForm.over(geom, problem.rho0_complex)


def chain_from_spec(rank: int, steps: List[LaurentSpec]) -> LatticeChain:
    return LatticeChain(rank=rank, steps=tuple(laurent_from_json(step.model_dump()) for step in steps))


def module_from_spec(spec: ModuleSpec) -> ParabolicDifferenceModule:
    punctures = []
    for entry in spec.punctures:
        taus = tuple(parse_tau(tau) for tau in entry.tau)
        s_values = tuple(parse_tau(s) for s in entry.s) if entry.s is not None else taus
        table = PunctureWeightTable(P=parse_complex(list(entry.P)), s_values=s_values, tau_values=taus)
        punctures.append(PunctureData(table=table, chain=chain_from_spec(spec.rank, entry.chain)))

    return ParabolicDifferenceModule(
        rank=spec.rank,
        deg_V=spec.deg_V,
        twist=TwistLineBundle(parameter=parse_complex(list(spec.twist)), provenance=spec.twist_provenance),
        frak_a=parse_complex(list(spec.frak_a)),
        punctures=tuple(punctures),
        blocks=tuple(Block(columns=tuple(block.columns), deg_V=block.deg_V) for block in spec.blocks),
    )


def module_to_json(V: ParabolicDifferenceModule) -> Dict[str, Any]:
    """Inverse of module_from_spec; exact values are written as rational strings"""

    return {
        'rank': V.rank,
        'deg_V': V.deg_V,
        'twist': _complex_out(V.twist.parameter),
        'twist_provenance': V.twist.provenance,
        'frak_a': _complex_out(V.frak_a),
        'punctures': [
            {
                'P': _complex_out(data.P),
                'tau': [_tau_out(tau) for tau in data.table.tau_values],
                's': [_tau_out(s) for s in data.table.s_values],
                'chain': chain_to_json(data.chain),
            }
            for data in V.punctures
        ],
        'blocks': [{'columns': list(block.columns), 'deg_V': block.deg_V} for block in V.blocks],
    }


def candidates_from_spec(spec: CandidatesSpec) -> CandidateFamily:
    candidates = []
    for entry in spec.candidates:
        chains = None
        if entry.chains is not None:
            chains = tuple(chain_from_spec(entry.rank, steps) for steps in entry.chains)
        candidates.append(SubmoduleDescriptor(
            rank=entry.rank,
            deg_V=entry.deg_V,
            frame_columns=tuple(entry.frame_columns) if entry.frame_columns is not None else None,
            chains=chains,
            label=entry.label,
        ))
    return CandidateFamily(candidates=tuple(candidates), exhaustive=spec.exhaustive)


def validation_message(error: ValidationError) -> str:
    problems = [f"{'.'.join(str(part) for part in item['loc'])}: {item['msg']}" for item in error.errors()]
    return "schema validation failed: " + "; ".join(problems)


def flatten(payload: Any, prefix: str = '') -> Iterator[Tuple[str, Any]]:
    """Dotted key/value pairs of a nested JSON value, list items keyed by index"""

    if isinstance(payload, dict):
        for key, value in payload.items():
            yield from flatten(value, f"{prefix}.{key}" if prefix else str(key))
    elif isinstance(payload, list) and any(isinstance(item, (dict, list)) for item in payload):
        for index, value in enumerate(payload):
            yield from flatten(value, f"{prefix}.{index}" if prefix else str(index))
    elif isinstance(payload, list):
        yield prefix, ' '.join(str(item) for item in payload)
    else:
        yield prefix, payload


def _complex_out(value) -> list:
    if is_exact(value):
        return exact_complex_json(value)
    z = as_complex(value)
    return [z.real, z.imag]


def _tau_out(value):
    if is_exact(value):
        return str(value)
    return float(value)
