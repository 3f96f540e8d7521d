// Tensor kernels index several arrays with one loop variable.
#![allow(clippy::needless_range_loop)]

pub mod algebra;
pub mod chart;
pub mod derdzinski;
pub mod geometry;
pub mod identities;
pub mod jet;
pub mod report;
pub mod tensor;
