//! Exact computations with ℓ-adic partition towers.
//!
//! Everything is arithmetic in Z/ℓᵐZ: truncated q-series, level-one
//! modular form bases, the Atkin and Hecke operators, the partition and
//! smallest-parts towers, and the stabilized spans they generate.
//!
//! Modules:
//! - [`ring`], [`series`], [`ntt`], [`precision`], [`record`]: residue and series arithmetic
//! - [`linalg`]: echelon and Howell forms over Z/ℓᵐZ
//! - [`forms`]: eta products, Eisenstein series, bases of M_k
//! - [`operators`]: U(ℓ), D_r, X_r, Y_r and Hecke operators
//! - [`partitions`]: p_r, spt, towers and extracted P-series
//! - [`lspaces`]: spans, stabilization, invariants and verification reports

pub mod error;
pub mod forms;
pub mod linalg;
pub mod lspaces;
pub mod ntt;
pub mod operators;
pub mod partitions;
pub mod precision;
pub mod record;
pub mod ring;
pub mod series;

pub use error::{Error, Result};
pub use ring::RingSpec;
pub use series::ResidueSeries;
