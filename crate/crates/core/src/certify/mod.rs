//! Explicit constants, comparison functions, Grönwall and stability bounds,
//! Coulomb field inequalities and pass/fail certificates.

mod audit;
mod certificate;
mod constants;
mod coulomb;
mod gronwall;

pub use audit::diff_ineq_audit;
pub use certificate::{worst_status, Certificate, InputDigest, Status};
pub use constants::{constants, constants_with, ell, phi, psi, BoundConstants};
pub use coulomb::{coulomb_elementary, loglip2_integral_certificate, loglip_field_certificate, Blob, Density3d, FieldRoute, Profile};
pub use gronwall::{
    classical_bound, comparison_flow, gronwall_bound, gronwall_bound_corrected, gronwall_parts, hbar_rate_constant, main_theorem_bound,
    main_theorem_parts, CInfTrajectory, ClassicalBound, GronwallParts, Interpolation, TheoremBound,
};
