pub mod dynamics;
pub mod error;
pub mod integrate;
pub mod params;

pub use error::{Error, Result};
pub mod walk;
pub mod forces;
pub mod ensemble;
pub mod langevin;
pub mod comb;
pub mod config;
pub mod run;
