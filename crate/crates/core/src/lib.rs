//! Context-aware max-information Q-learning for a search-and-rescue
//! gridworld with shifting collection priorities.

pub mod adaptation;
pub mod agent;
pub mod cli;
pub mod critics;
pub mod env;
pub mod error;
pub mod harness;
pub mod oracle;
pub mod policy;

pub use error::{Error, Result};
