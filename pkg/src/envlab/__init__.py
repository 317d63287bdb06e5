"""Numerical laboratory for constrained convex envelopes, partial Bergman
measures, and equilibrium energies on radial and toric model geometries."""

from .profiles import (
    ConvexProfile,
    SlopeWindow,
    WeightedSet,
    base_profile,
    lelong,
    mix_profiles,
    max_profile,
    sup_difference,
)
from .envelopes import (
    i_model_envelope,
    window_envelope,
    weighted_envelope,
    rooftop,
    p_shift,
    divergence,
    kahler_current_minorant,
    restricted_biconjugate,
    contact_leakage,
)
from .measures import (
    RadialMeasure,
    ma_measure,
    fs_measure,
    annulus_area_measure,
    circle_atom,
    kolmogorov_distance,
    measure_integral,
)
from .sections import (
    TwistData,
    SectionBasisData,
    BergmanResult,
    admissible_indices,
    admissible_set,
    h0,
    limit_mass,
    l2_norm,
    sup_norm,
    section_basis,
    reference_basis,
    bergman,
    gram,
    donaldson,
    donaldson_functional,
    bm_rate,
    bergman_approximant,
    approximant_lower_bound_constant,
)
from .energy import (
    EnergyValue,
    ma_energy,
    equilibrium_energy,
    energy_derivative_check,
    cocycle_difference,
)
from .toric import (
    TorusProfile2,
    RationalPolygon,
    singularity_body,
    np_mass2,
    h0_toric,
    mix_toric,
    minkowski_mix,
)

__version__ = "0.1.0"
