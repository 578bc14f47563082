//! Execute small concurrent programs and record each run as a history-net diagram.

pub mod check;
pub mod exec;
pub mod io;
pub mod lang;
pub mod net;
pub mod query;
