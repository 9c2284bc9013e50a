//! Switch for the per-level structural assertions.
//!
//! They run in debug builds, and in release builds when
//! `GEODESIC_DEBUG_ASSERT=1` is set in the environment.

use std::sync::OnceLock;

pub const ENV_VAR: &str = "GEODESIC_DEBUG_ASSERT";

pub fn enabled() -> bool {
    static FLAG: OnceLock<bool> = OnceLock::new();
    *FLAG.get_or_init(|| {
        cfg!(debug_assertions) || std::env::var(ENV_VAR).is_ok_and(|v| v == "1")
    })
}
