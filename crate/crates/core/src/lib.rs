//! Weighted 1x1 cut-and-project sets over real quadratic fields, their
//! conversion to bounded remainder sets for continuous toral rotations, and
//! empirical/exact tests of bounded-distance equivalence to scaled Lebesgue
//! measure.
//!
//! All membership and comparison decisions inside the library are exact
//! (arbitrary-precision rationals over a fixed quadratic field); floating
//! point appears only in reports and CLI output.

pub mod bdlab;
pub mod cfrac;
pub mod exactnum;
pub mod rotation;
pub mod scheme;
pub mod weights;

pub use exactnum::{QuadNum, Rational};
