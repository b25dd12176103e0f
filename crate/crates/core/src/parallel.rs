use rayon::prelude::*;

/// Runs `f` inside a rayon pool with `threads` workers. A thread count of
/// zero uses the global pool; one runs on the calling thread.
pub(crate) fn install<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        0 => f(),
        1 => f(),
        n => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("failed to build thread pool")
            .install(f),
    }
}

/// Calls `f(i)` for every `i` in `0..n`: in order when `threads == 1`,
/// otherwise across the pool.
pub(crate) fn for_each_index(threads: usize, n: usize, f: impl Fn(usize) + Sync + Send) {
    if threads == 1 {
        (0..n).for_each(f);
    } else {
        install(threads, || (0..n).into_par_iter().for_each(f));
    }
}

/// Like [`for_each_index`] with per-worker scratch state.
pub(crate) fn for_each_index_init<S>(
    threads: usize,
    n: usize,
    init: impl Fn() -> S + Sync + Send,
    f: impl Fn(&mut S, usize) + Sync + Send,
) {
    if threads == 1 {
        let mut scratch = init();
        (0..n).for_each(|i| f(&mut scratch, i));
    } else {
        install(threads, || {
            (0..n).into_par_iter().for_each_init(&init, |s, i| f(s, i))
        });
    }
}

/// Ordered map over `0..n` with per-worker scratch state.
pub(crate) fn map_indexed<S, T: Send>(
    threads: usize,
    n: usize,
    init: impl Fn() -> S + Sync + Send,
    f: impl Fn(&mut S, usize) -> T + Sync + Send,
) -> Vec<T> {
    if threads == 1 {
        let mut scratch = init();
        (0..n).map(|i| f(&mut scratch, i)).collect()
    } else {
        install(threads, || {
            (0..n)
                .into_par_iter()
                .map_init(&init, |s, i| f(s, i))
                .collect()
        })
    }
}
