//! Closed-form references: the constant field on `ℝ²`, the invariant field
//! on `S²` through its embedding in `ℂ³`, and the zero-section linearization.

mod flat;
mod sphere;
mod zero_section;

pub use flat::{
    flat_complex_coordinates, flat_f_sigma, flat_flow_oracle, flat_kappa2, flat_pushforward, flat_two_i_f_minus_i,
    FlatParams,
};
pub use sphere::{
    chart_to_embedding, embedding_to_chart, im_a_modulus, ima_display, sphere_embedding_map, sphere_flow_oracle,
    sphere_moment_map, stereographic, stereographic_inverse, SphereState, V3,
};
pub use zero_section::{
    zero_section_frame, zero_section_linearization, zero_section_linearization_metric, zero_section_positivity,
};
