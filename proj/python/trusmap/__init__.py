"""3D TRUS tracking: rigid registration, biopsy mapping, targeting analytics."""

from ._trusmap import (
    DegenerateIntensityError,
    GimbalLockError,
    GroundTruth,
    InsufficientOverlapError,
    InvalidArgumentError,
    IoError,
    PhantomConfig,
    RegistrationConfig,
    RegistrationResult,
    RigidTransform,
    SectorGrid,
    Volume,
    __version__,
    build_pyramid,
    chi2_2x2,
    chi2_sf_df1,
    clip_length,
    fuse_apex,
    gaussian_downsample,
    generate_moving,
    generate_reference,
    is_hit,
    raw_target_codes,
    read_mha,
    register_volumes,
    set_threads,
    similarity,
    tre,
    write_mha,
)

__all__ = [
    "DegenerateIntensityError",
    "GimbalLockError",
    "GroundTruth",
    "InsufficientOverlapError",
    "InvalidArgumentError",
    "IoError",
    "PhantomConfig",
    "RegistrationConfig",
    "RegistrationResult",
    "RigidTransform",
    "SectorGrid",
    "Volume",
    "__version__",
    "build_pyramid",
    "chi2_2x2",
    "chi2_sf_df1",
    "clip_length",
    "fuse_apex",
    "gaussian_downsample",
    "generate_moving",
    "generate_reference",
    "is_hit",
    "raw_target_codes",
    "read_mha",
    "register_volumes",
    "set_threads",
    "similarity",
    "tre",
    "write_mha",
]
