pub mod approx;
pub mod error;
pub mod exact;
pub mod models;
pub mod patterns;
pub mod query;
pub mod rankings;
pub mod workbench;

pub use error::{Error, Result};
