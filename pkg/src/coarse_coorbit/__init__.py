"""Coarse geometry of decomposition-space coverings and coorbit equivalence
of shearlet dilation groups."""

from .coarse import (
    QIReport,
    SampledMetricSpace,
    chain_distances,
    chain_metric,
    chain_pair_distances,
    chain_space,
    closeness,
    large_scale_geodesic_check,
    qi_probe,
    word_metric,
    word_space,
)
from .covering import (
    AlphaModulationFamily,
    Covering,
    DyadicFamily,
    ExplicitFamily,
    InducedFamily,
    OracleBudget,
    UniformFamily,
    admissibility_constant,
    alpha_modulation_covering,
    chain_distance,
    closed_form_alpha_metric,
    induced_covering,
    intrinsic_weight,
    is_moderate,
    neighbor_hop_function,
    neighbors,
    remark_covering,
    subordination_count,
    weak_equivalence_verdict,
)
from .equivalence import (
    algebra_invariants,
    builtin_group,
    commuting_check,
    coorbit_equivalent,
    dual_orbit,
    find_conjugator,
    general_group_orbit_gate,
    nonequivalence_witness,
    orbits_equal,
    transfer_map,
)
from .geometry import AffineImage, BaseSet, CoveringSet, Pullback, Tri, intersects
from .groups import (
    GroupElement,
    ShearletGroupSpec,
    conjugated_group,
    custom_group,
    d4_family,
    group_from_json,
    standard_group,
    toeplitz_group,
)
from .lattice import TruncatedLattice, WordMetricLattice, build_lattice

__version__ = "0.1.0"
