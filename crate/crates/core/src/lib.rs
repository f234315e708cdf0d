//! L_pi Sobolev exterior calculus on finite metric simplicial complexes.

pub mod cochain;
pub mod derham;
pub mod complex;
pub mod contract;
pub mod error;
pub mod io;
pub mod mollify;
pub mod nontrivial;
pub mod polyform;
pub mod quadrature;

pub use complex::{MetricComplex, PiSequence, Simplex};
pub use error::{Error, Result};
