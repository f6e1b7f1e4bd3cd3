//! Command line front end for `maxeig-core`: matrix files, run records and
//! table reproductions.

pub mod format;
pub mod record;
pub mod reproduce;
pub mod solve;

use std::sync::OnceLock;
use std::time::Instant;

static START: OnceLock<Instant> = OnceLock::new();

/// Seconds since the first call; passed to the library as its clock.
pub fn wall_clock() -> f64 {
    START.get_or_init(Instant::now).elapsed().as_secs_f64()
}
