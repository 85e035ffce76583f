//! Thread-count control for the parallel search routines.

use crate::error::{Result, SblsError};

/// Environment variable that caps the worker count.
pub const THREADS_ENV: &str = "SBLS_THREADS";

/// Runs `f` inside a rayon pool sized by `SBLS_THREADS`, or the global pool when unset.
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v.trim().parse().map_err(|_| {
                SblsError::InvalidArgument(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))
            })?;
            if n == 0 {
                return Err(SblsError::InvalidArgument(format!("{THREADS_ENV} must be positive")));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| SblsError::Internal(e.to_string()))?;
            Ok(pool.install(f))
        }
        Err(_) => Ok(f()),
    }
}
