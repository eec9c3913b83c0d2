"""Laplace-Stieltjes transforms via the Carson identity.

Evaluation of transforms by independent routes (including distributions
with singular parts), inversion back to densities and CDFs, constructive
Muntz approximation, and fingerprinting of distributions by countably many
transform values.
"""

from .dist_model import (
    BlmJoint,
    BlmSpec,
    Distribution1D,
    JointDist,
    ProductJoint,
    blm_survival,
    exponential,
    gamma_dist,
    inclusion_exclusion_survival,
    make_catalog,
    mixture,
    point_mass,
    positive_stable,
    positive_stable_density,
)
from .fingerprint import (
    Fingerprint,
    collision_experiment,
    compare,
    compute_fingerprint,
)
from .inversion import (
    TransformOracle,
    feller_cdf,
    oracle_from_distribution,
    post_widder_density,
    synthesize_derivatives,
    watson_check,
)
from .muntz import (
    MuntzApproximant,
    MuntzSequence,
    divergence_certificate,
    golitschek_coeffs,
    qn_eval,
    sup_norm_estimate,
)
from .transforms import (
    TransformRequest,
    TransformValue,
    closed_form_ls,
    evaluate,
    ls_carson,
    ls_direct,
    ls_survival_route,
    transform_value,
    verify_identity,
)

__version__ = "0.1.0"

__all__ = [
    "BlmJoint",
    "BlmSpec",
    "Distribution1D",
    "Fingerprint",
    "JointDist",
    "MuntzApproximant",
    "MuntzSequence",
    "ProductJoint",
    "TransformOracle",
    "TransformRequest",
    "TransformValue",
    "blm_survival",
    "closed_form_ls",
    "collision_experiment",
    "compare",
    "compute_fingerprint",
    "divergence_certificate",
    "evaluate",
    "exponential",
    "feller_cdf",
    "gamma_dist",
    "golitschek_coeffs",
    "inclusion_exclusion_survival",
    "ls_carson",
    "ls_direct",
    "ls_survival_route",
    "make_catalog",
    "mixture",
    "oracle_from_distribution",
    "point_mass",
    "positive_stable",
    "positive_stable_density",
    "post_widder_density",
    "qn_eval",
    "sup_norm_estimate",
    "synthesize_derivatives",
    "transform_value",
    "verify_identity",
    "watson_check",
]
