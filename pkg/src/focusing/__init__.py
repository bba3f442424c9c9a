"""Multichannel acoustic focusing: plant-matrix analysis, closed-form
super-ideal designs and beamforming field maps."""

from .acoustics import AcousticModel, PlantMatrix, Wavenumber, build_plant, transfer_matrix
from .analysis import FocusingState, GramAnalysis, analyze_gram, ideal_singular_system, spatially_matched_ratio
from .conditions import (
    asymmetric_design,
    osd_design,
    ula_design,
    ula_symmetric_limits,
    upda_crosstalk,
    upda_zeros,
)
from .fields import export, sample_arc, sample_plane
from .geometry import build_geometry, geometry_from_dict, load_geometry
from .linalg import eig_hermitian, gram, gramian, hadamard_bound, pseudoinverse, svd_underdetermined

__all__ = [
    "AcousticModel", "PlantMatrix", "Wavenumber", "build_plant", "transfer_matrix",
    "FocusingState", "GramAnalysis", "analyze_gram", "ideal_singular_system", "spatially_matched_ratio",
    "asymmetric_design", "osd_design", "ula_design", "ula_symmetric_limits", "upda_crosstalk", "upda_zeros",
    "export", "sample_arc", "sample_plane",
    "build_geometry", "geometry_from_dict", "load_geometry",
    "eig_hermitian", "gram", "gramian", "hadamard_bound", "pseudoinverse", "svd_underdetermined",
]
