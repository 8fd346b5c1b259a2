//! Spectral data of the angular operator L = (−i∇_S + A)² + a on S^{n−1}.

pub mod checks;
pub mod field;
pub mod galerkin;
pub mod model;
pub mod sphere;

pub use checks::{gram_deviation, verify_form_bounds, verify_sup_norm_bound, verify_weyl_growth};
pub use field::{FieldSpec, FieldVariant, TrigPoly};
pub use model::{build_model, gain_exponent, AngularModel, EigenPair, Eigenfunction, ModeLabel, SolverInfo};
pub use sphere::{SpherePoint, SphereRule};
