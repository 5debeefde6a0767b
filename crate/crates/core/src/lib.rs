//! Exact invariants of primitive cyclic covering fibrations.
//!
//! A fibered surface of genus `g` obtained as the relatively minimal model
//! of an `n`-cyclic cover of a genus-`h` fibration (`h` is 0 or 1 here)
//! concentrates its relative invariants on finitely many fiber germs. This
//! crate models those germs — a fiber descriptor, the branch-curve
//! components on it and the forest of infinitely-near singular points of
//! the branch curve — derives all singularity indices by simulating the
//! blow-up tower, evaluates the local invariants `K^2`, `chi`, `e`, `Ind`,
//! `sigma` in exact rational arithmetic, and audits the inequalities that
//! drive the slope bounds.
//!
//! Everything is exact: no floating point anywhere.

pub mod blowup;
pub mod bounds;
pub mod canonical;
pub mod diagrams;
pub mod enumerate;
pub mod fiber;
pub mod germ;
pub mod invariants;
pub mod params;
pub mod rat;
mod resolve;

pub use blowup::{
    curve_ledger, derive_indices, derive_indices_with, AlphaCount, Analysis, BlowupError,
    CurveLedger, CurveRecord, DeriveOptions, FamilySummary, IndexRecord, PairSplit,
};
pub use bounds::{
    audit_lemmas, bound_audit, extremal_germ, extremality_classifier, AuditConstants, AuditEntry,
    ExtremalFamily, LemmaAuditReport,
};
pub use canonical::{canonical_form, canonical_key};
pub use diagrams::{
    chain_sequences, diagram_of_curve, enumerate_diagrams, validate_diagram, DiagramSequence,
    SingularityDiagram,
};
pub use enumerate::{enumerate_germs, EnumCaps, EnumError};
pub use fiber::{FiberComponent, FiberDescriptor, FiberEdge, KodairaKind};
pub use germ::{validate_germ, ForestNode, GermSpec, HorizontalData, ValidationReport, Violation};
pub use invariants::{
    aggregate, chi_phi, default_base_gonality, fibration_gonality, local_invariants,
    local_invariants_h0, local_invariants_h1, nu, sigma_printed_display, signature,
    slope_equality_check, Gonality, GlobalInvariants, LocalInvariants,
};
pub use params::{
    classify_multiplicity, compute_params, lambda_slope, mu_threshold, upper_bound_slope,
    ClassifiedMult, CoreError, FibrationParams, MultClass,
};
pub use rat::Rat;
