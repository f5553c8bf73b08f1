//! Command-line interface.

/// Entry point for the `fips` binary; returns the process exit code.
pub fn run() -> i32 {
    0 // replaced by the real dispatcher below
}
