//! Finite-stage Salem-set and fractal constructions with exact-rational
//! geometry, closed-form Fourier transforms and dimension estimators.

pub mod bits;
pub mod constructions;
pub mod dimension;
pub mod geometry;
pub mod measures;
pub mod numberfield;
pub mod parse;
pub mod rational;

pub use geometry::{BoxUnion, HausdorffDistance, Interval, IntervalUnion, OpenInterval};
pub use rational::Rational;
