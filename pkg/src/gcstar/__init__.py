"""Verified convolution algebras of finite weighted groupoids.

Groupoids are finite multiplication tables, measures are positive
weight families over source or range fibers, and every structural
statement in the library ships with an executable check that reports
a defect and a witness instead of silently trusting the algebra.
"""

from .report import Check, Report, VerificationError
from .fingroupoid import (
    FiniteGroupoid,
    Nerve,
    FIXTURE_NAMES,
    arrow_weights,
    build_preset,
    counting_weights,
    cyclic_group_groupoid,
    disjoint_union,
    fixture,
    groupoid_from_dict,
    groupoid_to_dict,
    object_weights,
    pair_groupoid,
    space_groupoid,
    transformation_groupoid,
    transitive_groupoid,
    validate_groupoid,
    validate_haar,
)
from .measures import (
    Correspondence,
    GroupoidFamilies,
    MeasureFamily,
    arrow_correspondence,
    check_corr_isomorphism,
    check_family_identities,
    check_iterated_integrals,
    compare_integrals,
    compose_families,
    corr_ratio,
    family_correspondence,
    fibre_product,
    groupoid_families,
    haar_system,
)
from .hilbmod import (
    GradedSpace,
    ModuleMap,
    check_gamma,
    check_module_map,
    creation,
    dump_module_map,
    gamma_compose,
    gamma_fibre,
    identity_map,
    induced_unitary,
    is_intertwiner,
    is_isometry,
    is_unitary,
    l2,
    l2_family,
    module_from_dims,
    regroup,
    tensor,
    tensor_map,
    tensor_map_left,
)
from .convalg import (
    check_convolution,
    convolve,
    cstar_norm,
    delta_function,
    fiber_sups,
    i_norm,
    identity_element,
    jacobi_eigenvalues,
    operator_norm,
    regular_matrix,
    regular_module,
    star,
)
from .sampling import (
    SplitMix64,
    haar_unitary,
    mutate_groupoid,
    random_cocycle,
    random_function,
    random_groupoid,
    random_vector,
)
from .reps import (
    CocycleFamily,
    Representation,
    blockwise,
    check_cocycle,
    check_intertwiner,
    check_representation,
    face_transfer,
    from_cocycle,
    induce,
    invariant_support,
    regular_representation,
)
from .intdis import (
    ConvRep,
    PreRepresentation,
    check_integration,
    check_conv_rep,
    check_pair_exchange,
    conv_rep_of,
    disintegrate,
    extend_prerep,
    integrate_rep,
    integration_bound,
    oracle_integrate,
    roundtrip_conv,
    roundtrip_rep,
    upsilon,
)
from .crossed import (
    CovariantRep,
    CrossedProductAlgebra,
    InverseSemigroup,
    PartialBijection,
    all_bisections,
    bisection_from_arrows,
    bisection_semigroup,
    canonical_iso_cstar,
    check_covariant_rep,
    check_crossed_rep,
    compose_bisections,
    covariant_to_groupoid_rep,
    crossed_product,
    etale_battery,
    germ_groupoid,
    germ_reconstruction,
    groupoid_rep_to_covariant,
    integrate_covariant,
    invert_bisection,
    is_wide,
    partial_isometry_form,
    rep_of_crossed_to_covariant,
    semigroup_from_bisections,
    semigroup_from_maps,
    transformation_theorem,
)

__version__ = "0.1.0"
