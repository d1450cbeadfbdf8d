//! Execution policy for the data-parallel loops (betweenness sources, sweep
//! targets, search queries).
//!
//! Work is split into a fixed number of chunks whose results are combined in
//! chunk order, so both policies produce bit-identical output. Without the
//! `parallel` feature, `Execution::Parallel` runs sequentially.

use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// `Sequential` for one thread, `Parallel` otherwise.
    pub fn from_threads(threads: usize) -> Self {
        if threads <= 1 {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

/// Upper bound on the number of partial results kept alive at once.
pub(crate) const MAX_CHUNKS: usize = 64;

pub(crate) fn chunk_ranges(len: usize, max_chunks: usize) -> Vec<Range<usize>> {
    if len == 0 {
        return Vec::new();
    }
    let chunks = max_chunks.clamp(1, len);
    let base = len / chunks;
    let extra = len % chunks;
    let mut out = Vec::with_capacity(chunks);
    let mut start = 0;
    for c in 0..chunks {
        let size = base + usize::from(c < extra);
        out.push(start..start + size);
        start += size;
    }
    out
}

/// Applies `f` to each chunk of `0..len`, returning results in chunk order.
pub(crate) fn map_chunks<T, F>(exec: Execution, len: usize, max_chunks: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync + Send,
{
    let ranges = chunk_ranges(len, max_chunks);
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            ranges.into_par_iter().map(f).collect()
        }
        _ => ranges.into_iter().map(f).collect(),
    }
}

/// Applies `f` to every index of `0..len`, returning results in index order.
pub(crate) fn map_indexed<T, F>(exec: Execution, len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..len).into_par_iter().map(f).collect()
        }
        _ => (0..len).map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_range_exactly() {
        for len in [0, 1, 5, 64, 65, 1000] {
            let r = chunk_ranges(len, MAX_CHUNKS);
            assert_eq!(r.iter().map(|x| x.len()).sum::<usize>(), len);
            assert!(r.windows(2).all(|w| w[0].end == w[1].start));
            assert!(r.len() <= MAX_CHUNKS);
        }
    }

    #[test]
    fn policies_agree() {
        let f = |r: Range<usize>| r.map(|x| x * x).sum::<usize>();
        assert_eq!(
            map_chunks(Execution::Sequential, 1000, 7, f),
            map_chunks(Execution::Parallel, 1000, 7, f)
        );
        assert_eq!(
            map_indexed(Execution::Sequential, 50, |i| i + 1),
            map_indexed(Execution::Parallel, 50, |i| i + 1)
        );
    }
}
