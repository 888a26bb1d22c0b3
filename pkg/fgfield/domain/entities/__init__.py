from .field_spec import FieldSpec, Regime, exact_value
from .grids import BoundaryMode, FieldGrid, TestFunctionGrid, vanishing_moment_order
from .lattice import LatticeDomain
from .matrices import CovMatrix, DensityNormalization, PrecisionMatrix
from .results import (
    BallPointPair,
    ConvergenceReport,
    ConvergenceRow,
    EigenfunctionSample,
    RestrictionResult,
    SampleEnsemble,
    SphericalKernelQuery,
    SphericalKernelResult,
    SphericalProjectionStudy,
    SplitResult,
    StructureFunction,
    WalkEstimate,
)

__all__ = [
    'FieldSpec',
    'Regime',
    'exact_value',
    'BoundaryMode',
    'FieldGrid',
    'TestFunctionGrid',
    'vanishing_moment_order',
    'LatticeDomain',
    'CovMatrix',
    'DensityNormalization',
    'PrecisionMatrix',
    'BallPointPair',
    'ConvergenceReport',
    'ConvergenceRow',
    'EigenfunctionSample',
    'RestrictionResult',
    'SampleEnsemble',
    'SphericalKernelQuery',
    'SphericalKernelResult',
    'SphericalProjectionStudy',
    'SplitResult',
    'StructureFunction',
    'WalkEstimate',
]
