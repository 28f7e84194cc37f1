//! Front end for `hmfree`: instance files, commands and their reports.

pub mod commands;
pub mod expr;
pub mod instance;
pub mod report;
