//! Evaluation toolkit for seismic fault delineation.
//!
//! The crate covers the evaluation half of a fault-segmentation benchmark:
//! volume ingestion ([`volume_io`]), normalization and sliding-window tiling
//! ([`preprocess`]), annotation thickness standardization ([`morph`]),
//! region and distance metrics ([`metrics`]), reference training losses
//! ([`loss`]), ODS threshold selection ([`threshold`]), synthetic
//! metric-sensitivity experiments ([`faultlab`]) and report generation
//! ([`bench`]).
//!
//! Interchangeable algorithms (normalizers, losses, metrics, report formats)
//! sit behind small traits and are looked up by name through a [`Registry`],
//! which is how the command-line front end selects them.

pub mod bench;
pub mod error;
pub mod faultlab;
pub mod loss;
pub mod metrics;
pub mod morph;
pub mod preprocess;
pub mod registry;
pub mod threshold;
pub mod types;
pub mod volume_io;

pub use error::{Error, Result};
pub use registry::Registry;
pub use types::{FaultMask, ProbabilityMap, SeismicVolume, SourceFormat};

/// Toolkit version, shared by every front end.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
