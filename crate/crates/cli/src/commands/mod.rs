pub mod analyze;
pub mod convert;
pub mod eval;
pub mod preview;
pub mod report;
