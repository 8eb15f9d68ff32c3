"""Generalized twirling of quantum states and operations."""
from .errors import TwirlkitError
from .groups import (
    FiniteGroup,
    FiniteGroupDensity,
    FiniteRep,
    U1Density,
    U1Rep,
    convolve,
    delta_density_finite,
    delta_density_u1,
    fejer_density,
    rep_unitary,
    sample_group,
    uniform_finite,
    uniform_u1,
    validate_u1_density,
)
from .matrix import (
    DensityMatrix,
    KrausOperation,
    apply_kraus,
    choi_matrix,
    compose_superops,
    diag_split,
    kraus_to_superop,
    purity,
    validate_density,
)
from .oracle import mc_compare, mc_twirl
from .representability import (
    brs_prescription,
    check_representable,
    check_representable_for_state,
    counterexample_report,
    operations_identified,
    twirled_operation,
)
from .twirl import (
    apply_twirl,
    build_twirl,
    coherence_projector,
    compose_twirls,
    partial_inverse,
    twirled_purity_prediction,
)

__version__ = "0.1.0"
