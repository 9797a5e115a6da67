from .potential import RadialPotential, PotentialKind, ScaledRegime, parse_potential
from .scattering_solution import ScatteringSolution
from .neumann_solution import NeumannSolution, NormReport
from .lattice_result import (LatticeSumResult, BracketKind, BracketVariant, BornGeometry,
                             BornSeriesSpec, BornSeriesResult)
from .energy import (LatticeMode, EnergyRegime, RegimeTag, EnergySummary, CoefficientSequences,
                     ExcitationSpectrum)
from .vmc_models import (TorusGas, ParticleConfiguration, ChainResult, EnergyEstimate, DysonPoint,
                         ScalingReport)
from .run_spec import RunSpec, RunResult, GoldenRecord, OutputFormat

__all__ = [
    'RadialPotential',
    'PotentialKind',
    'ScaledRegime',
    'parse_potential',
    'ScatteringSolution',
    'NeumannSolution',
    'NormReport',
    'LatticeSumResult',
    'BracketKind',
    'BracketVariant',
    'BornGeometry',
    'BornSeriesSpec',
    'BornSeriesResult',
    'LatticeMode',
    'EnergyRegime',
    'RegimeTag',
    'EnergySummary',
    'CoefficientSequences',
    'ExcitationSpectrum',
    'TorusGas',
    'ParticleConfiguration',
    'ChainResult',
    'EnergyEstimate',
    'DysonPoint',
    'ScalingReport',
    'RunSpec',
    'RunResult',
    'GoldenRecord',
    'OutputFormat'
]
