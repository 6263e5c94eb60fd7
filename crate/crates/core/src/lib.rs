//! Piecewise-linear model of an attractor made of two saddle-foci joined by
//! a one-dimensional and a two-dimensional connection: exact hitting times,
//! the limits they satisfy, historic time averages and the conjugacy
//! between systems with equal invariants.

pub mod adjusted;
pub mod birkhoff;
pub mod conjugacy;
pub mod dd;
pub mod diagnostics;
pub mod error;
pub mod flow;
pub mod hitting;
pub mod oracle;
pub mod params;

pub use adjusted::{
    adjusted_sequence, backward_t0_family, shift_invariance_check, AdjustedTimes, ShiftCheck,
};
pub use birkhoff::{
    birkhoff_average, historic_certificate, predicted_limits, AverageEntry, AverageSeries,
    Certificate, Observable, ObservableKind,
};
pub use conjugacy::{
    map_h, recover_point, recover_point_at, verify_conjugacy, ConjugacyReport, RecoveredPoint,
};
pub use dd::DoubleDouble;
pub use diagnostics::{corollary_ratios, estimate_invariants, lemma_diagnostics, DiagnosticSeries};
pub use error::{BykovError, Result};
pub use flow::{
    flow_at, phi1, phi2, poincare, psi12, psi21, Chart, Cylinder, FlowState, Passage, Return,
    SectionPoint,
};
pub use hitting::{generate_hitting_sequence, sojourn_fractions, HittingSequence};
pub use params::{
    derive_constants, invariant_tuple, matching_params, DerivedConstants, InvariantTuple,
    PerturbationSpec, SystemParams,
};
