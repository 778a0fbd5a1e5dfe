//! Combinatorics and numerics of pared deformation spaces of critically fixed
//! anti-rational maps: plane graphs and enrichments, invariant laminations of
//! `m_{-d}`, anti-Blaschke products, degenerations along quasi-fixed trees,
//! and monodromy along parameter paths.

pub mod blaschke;
pub mod degeneration;
pub mod error;
pub mod hypdisk;
pub mod lamination;
pub mod monodromy;
pub mod mp;
pub mod planegraph;
pub mod ribbontree;
pub mod tischler;

pub use error::{Error, Result};
