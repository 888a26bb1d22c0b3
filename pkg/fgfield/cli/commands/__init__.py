from .decomposition import run_decompose, run_spherical
from .discrete import run_converge, run_dfgf
from .evaluation import run_green, run_kernel
from .sampling import run_diagnose, run_sample

HANDLERS = {
    "sample": run_sample,
    "kernel": run_kernel,
    "green": run_green,
    "dfgf": run_dfgf,
    "converge": run_converge,
    "decompose": run_decompose,
    "spherical": run_spherical,
    "diagnose": run_diagnose,
}

__all__ = ['HANDLERS']
