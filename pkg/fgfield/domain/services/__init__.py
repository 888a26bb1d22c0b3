from .kernel_service import KernelService
from .green_service import GreenConstant, GreenService
from .fractional_operator_service import FractionalOperatorService
from .sampler_service import ExactMode, SamplerService
from .discrete_field_service import DiscreteFieldService, StepLaw
from .decomposition_service import DecompositionService

__all__ = [
    'KernelService',
    'GreenConstant',
    'GreenService',
    'FractionalOperatorService',
    'ExactMode',
    'SamplerService',
    'DiscreteFieldService',
    'StepLaw',
    'DecompositionService',
]
