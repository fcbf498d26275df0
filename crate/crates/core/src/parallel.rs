//! Order-preserving parallel map over slices.

use std::thread;

/// Applies `f` to every item on scoped threads. Items are split into
/// contiguous chunks and results are concatenated in input order, so the
/// output does not depend on scheduling.
pub fn parallel_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    if items.len() < 2 {
        return items.iter().map(&f).collect();
    }
    let workers = thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(items.len());
    let chunk = items.len().div_ceil(workers);
    let f = &f;
    thread::scope(|scope| {
        let handles: Vec<_> =
            items.chunks(chunk).map(|part| scope.spawn(move || part.iter().map(f).collect::<Vec<R>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}
