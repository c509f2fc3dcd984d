pub mod airy;
pub mod asymptotics;
pub mod error;
pub mod gap_model;
pub mod ode;
pub mod quad;
pub mod roots;
pub mod sturm;
pub mod theorem;

pub use error::{Error, Result};
