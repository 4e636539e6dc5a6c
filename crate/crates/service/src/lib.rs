//! Command-line tool and HTTP service around `dragwarp-core`.

pub mod api;
pub mod cli;
pub mod store;

pub use api::{router, SharedStore};
pub use cli::run_cli;
