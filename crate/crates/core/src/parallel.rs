//! Deterministic data-parallel helpers.
//!
//! Work items are evaluated independently and collected in index order, so
//! any reduction done by the caller afterwards sees the same sequence
//! whether or not rayon was used. Setting `DECOHERE_NO_PARALLEL=1` forces
//! serial evaluation.

use rayon::prelude::*;

pub const NO_PARALLEL_ENV: &str = "DECOHERE_NO_PARALLEL";

pub fn enabled() -> bool {
    !matches!(std::env::var(NO_PARALLEL_ENV).as_deref(), Ok("1") | Ok("true"))
}

/// Maps `f` over `items`, preserving order.
pub fn map_ordered<I, O, F>(items: &[I], f: F) -> Vec<O>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    if enabled() && items.len() > 1 {
        items.par_iter().map(f).collect()
    } else {
        items.iter().map(f).collect()
    }
}
