//! Theta hypergeometric series: evaluation of elliptic shifted factorials and
//! theta series, classification, ellipticity and modularity checks, and
//! verifiers for the terminating summation and transformation identities.

pub mod ellipticity;
pub mod error;
pub mod factorial;
pub mod identities;
pub mod numeric;
pub mod report;
pub mod sampling;
pub mod series;
pub mod theta;

pub use error::{Error, Result};
pub use factorial::FactorialValue;
pub use numeric::C64;
pub use report::{BatchReport, BatchSummary, VerificationReport};
pub use series::{SeriesKind, SeriesValue, ThetaSeriesSpec, VwpSpec};
pub use theta::{ModularPair, Nome, PrecisionPolicy};
