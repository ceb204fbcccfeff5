"""Shadows, tomography and classicality certificates for finite GPT fragments."""

from .classify import Case, FourCaseReport, classify_fragment
from .constructions import (
    ZOO_NAMES,
    HolevoBundle,
    HyperdecBundle,
    bloch_z_fragment,
    classical_bit,
    gbit,
    holevo,
    holevo_gbit,
    hyperdecohere,
    random_fragment,
    rebit_polygon,
    simplex,
    stabilizer_qubit,
    two_disk,
    zoo,
)
from .embedding import (
    MapPair,
    SimplexCertificate,
    Verdict,
    check_equivalence,
    fragment_simplex_embed,
    iter_equivalences,
    simplex_embed,
    verify_embedding,
    verify_simplex_embedding,
)
from .errors import *  # noqa: F401,F403
from .fragment import (
    DataTable,
    Fragment,
    GptSystem,
    Strictness,
    ValidationReport,
    data_table,
    is_tomographic,
    prune_extremal,
    validate,
)
from .numerics import (
    LpOutcome,
    LpProblem,
    Tolerance,
    in_conv_hull,
    kernel_basis,
    lp_solve,
    numerical_rank,
    rank_factorize,
    right_inverse,
)
from .shadow import (
    ShadowResult,
    TomographyResult,
    quotient_shadow,
    shadow_of_table_equals_quotient,
    tomography,
    verify_shadow_maps,
)

__version__ = "0.1.0"
