"""Layered 1-D Helmholtz media: exact forward model and fast inversion.

The forward model maps a piecewise-constant wave speed to single-receiver
frequency-domain data; the inversion recovers the staircase from one period
of band-limited data via orthogonal polynomials on the unit circle.
"""

__version__ = "0.1.0"

from .errors import (
    AliasingError,
    DegenerateMeasureError,
    DomainError,
    GeometryError,
    Helmholtz1DError,
    InsufficientBandError,
    InversionError,
    NoArrivalDetected,
    PoleError,
    ReflectivityRangeError,
    SingularFrequencyError,
    ValidationError,
)
from .forward import (
    add_noise,
    data_to_R,
    eval_f,
    field_amplitudes,
    field_at,
    reflection_response,
    reflection_to_data,
    schur_bound,
    synth_trace,
    transfer_matrix,
)
from .inversion import (
    InversionConfig,
    ReconstructionReport,
    ReconstructionWarning,
    detect_period,
    estimate_first_arrival,
    fourier_alpha,
    invert,
    layer_strip,
    moments_to_reflectivities,
)
from .medium import (
    AcquisitionGeometry,
    ComplexTrace,
    FrequencyBand,
    LayerSequence,
    WaveSpeedProfile,
    discretize_speed,
    layers_to_profile,
    minimal_layers,
    profile_to_layers,
    relative_l2_error,
)
from .opuc import alpha_to_moments, fourier_coefficient_product, psi_polynomial, szego_polynomials
