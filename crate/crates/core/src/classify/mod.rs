//! Vector-field taxonomy and manifold classification.

pub mod grw;
pub mod ricci;
pub mod vector;

pub use grw::{grw_detect, grw_identity_suite, nonvanishing_margin, GrwDetection};
pub use ricci::{
    classify_quasi_einstein, einstein_residual, einstein_type, einstein_type_data, fit_quasi_einstein,
    grw_constant_scalar, perfect_fluid_kind, qe_form, qe_kind_equivalence, Equivalence, FitStatus,
    PerfectFluidFit, QuasiEinsteinFit, RicciData, RicciDataError, Verdict,
};
pub use vector::{
    classify_at, classify_vector, eta_exterior_derivative, fit_torse_forming, Flag, TorseFit, VectorTaxonomy, ETA_FD_STEP,
    FLAG_NAMES,
};
