//! Order-preserving parallel map.

use rayon::prelude::*;

use crate::error::Result;

/// Map `f` over `items` in parallel. Results keep the input order, and on
/// failure the error of the first failing item (in input order) is returned,
/// so the outcome does not depend on the thread count.
pub fn try_map<T: Sync, U: Send>(
    items: &[T],
    f: impl Fn(&T) -> Result<U> + Sync + Send,
) -> Result<Vec<U>> {
    let results: Vec<Result<U>> = items.par_iter().map(f).collect();
    results.into_iter().collect()
}
