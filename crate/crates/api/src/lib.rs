//! Shared request and result types for the quadratik CLI and HTTP service.
//!
//! Both front ends parse their inputs into [`Inputs`], build an
//! [`Operation`] and call [`run`]; the resulting [`Envelope`] serializes
//! identically whichever path produced it.

pub mod engine;
pub mod error;
pub mod http;
pub mod request;
pub mod response;
pub mod series;
pub mod table;

pub use engine::{execute, run, Inputs, DEFAULT_SEED};
pub use error::{ApiError, Result};
pub use request::*;
pub use response::*;
pub use table::{CsvOptions, Delimiter, Table};
