//! Admissible graphs, their multidifferential operators for linear Poisson
//! structures, weight tables and Monte-Carlo weight estimates.

mod kgraph;
mod mc;
mod operator;
mod weights;

pub use kgraph::{
    bernoulli_graph, bernoulli_wheel_graph, enumerate_admissible, KGraph, BERNOULLI_FUNCTION_SLOT,
    BERNOULLI_OUTPUT_SLOT, MAX_CANON_AERIAL,
};
pub use mc::{estimate_form_integral, estimate_weight_mc, McEstimate};
pub use operator::{graph_operator, linear_bivector, wedge_skew};
pub use weights::*;
