//! Perturbation quantities, weights and lemma-level property checks.

pub mod decay;
pub mod envelope;
pub mod heat;
pub mod perturbation;
pub mod report;
pub mod suite;
pub mod weights;
pub mod zones;

pub use decay::{contact_decay, dyadic_times, ContactDecay};
pub use envelope::{fit_envelope, validate_envelope, EnvelopeGrid, ErrorEnvelope};
pub use heat::{heat_g, heat_report, HeatKernelG};
pub use perturbation::{perturbation, PerturbationState};
pub use report::{energy_report, DiagnosticsReport, VerdictOptions};
pub use suite::{run_checks, CheckInputs, CheckReport};
pub use weights::{WeightSet, Weights};
pub use zones::{zone_partition, ZonePartition};
