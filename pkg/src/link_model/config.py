"""
Default physical and experiment parameters.

Values follow the evaluation setup of the misaligned-UCA link study:
wavelength 0.01 m, both array radii 4 wavelengths, unit antenna constant and
zero first-element phase offsets. The centre distance is not given there and
defaults to 1 m (well beyond both apertures).
"""
import math
import os
from typing import Optional

DEFAULT_WAVELENGTH_M = 0.01
DEFAULT_RADIUS_WAVELENGTHS = 4.0
DEFAULT_DISTANCE_M = 1.0
DEFAULT_BETA = complex(1.0, 0.0)
DEFAULT_ALPHA_RAD = 0.0

DEFAULT_SNR_DB = 20.0
DEFAULT_CONSTELLATION = "qpsk"
DEFAULT_POWER_POLICY = "waterfill"
DEFAULT_TRIALS = 0
DEFAULT_SEED = 2019

# Elements closer than this are treated as coincident
MIN_ELEMENT_DISTANCE_M = 1e-9

# Exhaustive joint-ML search is capped at this many hypotheses
MAX_JOINT_HYPOTHESES = 2 ** 20

# Monte-Carlo trials are drawn in fixed-size chunks, one RNG stream per chunk
SER_CHUNK_TRIALS = 4096

N_JOBS_ENV_VAR = "OAM_LINK_N_JOBS"

SNR_CONVENTION = "sigma2 = 10**(-snr_db/10) per receive element; unit transmit power per mode"
GAIN_SORT_ORDER = "descending singular values; mode column 1 (l=0) carries the largest gain"


def default_radius(wavelength: float) -> float:
    """Array radius used when none is configured."""
    return DEFAULT_RADIUS_WAVELENGTHS * wavelength


def deg_to_rad(value: float) -> float:
    """Convert degrees to radians (CLI boundary only)."""
    return math.radians(value)


def resolve_n_jobs(n_jobs: Optional[int] = None) -> int:
    """
    Worker count for sweeps and Monte-Carlo chunks.

    An explicit value wins; otherwise OAM_LINK_N_JOBS is read, defaulting to 1.
    """
    if n_jobs is not None:
        return int(n_jobs)
    return int(os.getenv(N_JOBS_ENV_VAR, "1"))
