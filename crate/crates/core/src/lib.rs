pub mod anyons;
pub mod cli;
pub mod code;
pub mod error;
pub mod gf2;
pub mod identity;
pub mod pauli;
pub mod strings;
pub mod thermal;

pub use error::{Error, Result};
