//! Problem files, the construction pipeline, verification suites and reports
//! behind the `dq` binary.

#![allow(clippy::needless_range_loop, clippy::manual_is_multiple_of)]

pub mod checks;
pub mod pipeline;
pub mod problem;
pub mod report;
