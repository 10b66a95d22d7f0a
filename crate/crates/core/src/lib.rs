// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod model;
pub mod series;
pub mod picard;
pub mod integrator;
pub mod interp;
pub mod asymptotics;
pub mod geometry;
pub mod cli;
