//! Exact counting kernels and structure extraction for products of differences
//! over finite fields of small order.

pub mod bsg;
pub mod convolution;
pub mod error;
pub mod field;
pub mod moments;
pub mod pivot;
pub mod plunnecke;
pub mod rational;
pub mod sets;
pub mod spectral;
pub mod structured;

pub use error::{LabError, Result};
pub use field::{build_field, Elem, FieldTower, SubfieldHandle, TowerDescriptor};
pub use rational::Rational;
pub use sets::{combine, diffset, productset, rep_function, sumset, FqSet, RepFn, SetOp};
