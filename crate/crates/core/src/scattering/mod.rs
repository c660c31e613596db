//! Exponent validation, decay, localized Gagliardo–Nirenberg ratio and scattering.

pub mod decay;
pub mod exponents;
pub mod gn;
pub mod scatter;

pub use decay::{decay_series, tail_slope, DecayMonitor, DecaySeries};
pub use exponents::{
    admissible_pair, check_exponents, p_star, pair_from_p, rational_from_f64, Exponent,
    ExponentCheck, Rational,
};
pub use gn::{cube_sums, gn_localized_ratio, max_cube_mass, UNIT_CUBE};
pub use scatter::{
    extract_scattering_state, spacetime_norm, w2r_norm, wave_operator, wave_operator_round_trip,
    RoundTrip, ScatterReport, SpacetimeNorm, CAUCHY_FLOOR,
};
