"""RRAM memory compiler: elaboration, behavioral simulation and characterization."""
from .geometry import (
    MemoryGeometry, validate_geometry, worst_case_read_address, worst_case_write_address,
)
from .technology import (
    CornerProfile, TechnologyProfile, corner_apply, default_profile, load_profile, save_profile,
)

__version__ = "0.1.0"
