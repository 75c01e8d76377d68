//! File formats, metrics and the experiment harness around `tspts-core`.

// `!(x > 0.0)` guards reject NaN; the positive comparison is the invariant
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod experiment;
pub mod json;
pub mod metrics;
pub mod report;

pub use tspts_core as core;
