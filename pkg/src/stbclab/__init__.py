"""Full-rate space-time block codes for four transmit antennas.

Construction from anticommuting matrix products, exact ML decoding
(brute force, sphere, and structured conditional), and desk-scale
evaluation: minimum-determinant searches, ergodic capacity, and seeded
symbol-error-rate campaigns.
"""

from .analysis import (
    CapacityEstimate,
    DiversityReport,
    MinDetReport,
    diversity_search,
    ergodic_capacity,
    lossless_check,
    min_determinant,
)
from .channel import EquivalentChannel, equivalent_channel, sample_channel, transmit
from .clifford import AnticommutingSet, MatrixBasis, generators4, product_basis, verify_anticommuting
from .codes import (
    Constellation,
    LinearDispersionCode,
    ciod4,
    encode,
    generator_matrix,
    get_code,
    load_weights,
    rate_code,
    rotated_qam,
    save_weights,
)
from .decoders import (
    DecodeResult,
    ZeroPattern,
    brute_force_ml,
    conditional_decode,
    pattern_matches,
    pattern_template,
    slice_pam,
    sphere_decode,
    zero_pattern,
)
from .realify import (
    RankDeficiencyError,
    check_expand,
    complex_from_tilde,
    det4,
    kron,
    qr_thin,
    real_rank,
    tilde,
    vec,
)
from .simkit import CampaignConfig, SERPoint, bpcu, run_ser, write_ser_csv

__version__ = "0.1.0"
