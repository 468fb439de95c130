//! File formats, analysis driver and demonstrations behind the `proxilift`
//! command-line tool.

pub mod analyze;
pub mod demo;
pub mod report;
pub mod spec;
