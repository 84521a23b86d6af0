//! Generalized linear models from the exponential dispersion family:
//! IRLS fitting, expected information and its analytic derivatives,
//! first-order bias, reduced-bias fits, separation detection and the signed
//! likelihood-ratio root.

mod adapter;
mod bias;
mod family;
mod fit;
mod info;
mod lr;
mod separation;

pub use adapter::{BiasMethod, DispersionPlugin, GlmAdapter, GlmOptions};
pub use bias::{coxsnell_bias, simulated_bias};
pub use family::{Family, LinkPoint};
pub use fit::{
    fit_ml, fit_rb, ml_dispersion, pearson_dispersion, DispersionEstimate, DispersionKind, GlmFit, GlmSpec,
    FIT_MAX_ITERATIONS,
};
pub use info::{expected_info, info_derivatives, Observation};
pub use lr::signed_lr_root;
pub use separation::{detect_separation, Separation};
