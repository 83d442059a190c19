//! Finite model theory toolkit: rank-k types, order-invariance, commutative
//! regular languages, unranked tree automata and composition of types.

pub mod commutative;
pub mod config;
pub mod error;
pub mod fv;
pub mod invariance;
pub mod logic;
pub mod structures;
pub mod tree_automata;
pub mod types;

pub use config::Guards;
pub use error::{Error, Result};
