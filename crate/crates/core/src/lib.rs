#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod counterexamples;
pub mod error;
pub mod exec;
pub mod integrability;
pub mod julia;
pub mod measure;
pub mod nevanlinna;
pub mod quad;
pub mod rate;
pub mod regularity;
pub mod report;
pub mod scan;
pub mod special;

pub use error::{Error, Result};
pub use exec::Exec;
pub use measure::Measure;
pub use nevanlinna::NevanlinnaRep;
pub use rate::RateFunction;
