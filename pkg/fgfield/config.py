import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


class Config:
    # Logging configuration
    LOG_LEVEL = os.getenv("FGF_LOG_LEVEL", "WARNING")
    LOG_FORMAT = os.getenv("FGF_LOG_FORMAT", "json")

    # Output configuration
    OUTPUT_DIR = os.getenv("FGF_OUTPUT_DIR", "fgf-output")

    # Numerical defaults (recorded in every manifest)
    QUAD_TOL = float(os.getenv("FGF_QUAD_TOL", "1e-10"))
    TAIL_TOL = float(os.getenv("FGF_TAIL_TOL", "1e-6"))
    PAD_FACTOR = int(os.getenv("FGF_PAD_FACTOR", "4"))
    MAX_WALK_STEPS = int(os.getenv("FGF_MAX_WALK_STEPS", str(10**6)))

    # Regime snapping tolerance for float-valued s
    SNAP_TOL = 1e-12
