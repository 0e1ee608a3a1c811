//! Computational toolkit for power substitution `f(x) = g(x^k)` in Carleman
//! classes: weight sequences and their regularizations, Taylor jets,
//! chain-rule coefficient tables, and grid certification of derivative bounds.

pub mod jet;
pub mod numeric;
pub mod sequence;
pub mod substitution;
pub mod harness;
pub mod io;

pub use jet::{Jet, NamedFunction};
pub use numeric::{Number, NumericMode, Scalar};
pub use sequence::{Family, WeightSequence};
