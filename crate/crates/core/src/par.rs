//! Chunked data parallelism over disjoint output slices.

#[cfg(feature = "std")]
use alloc::vec::Vec;

/// Splits `out` into at most `threads` contiguous chunks and runs
/// `fill(offset, chunk)` on each, where `offset` is the index of the chunk's
/// first element in `out`.
///
/// Each element must depend only on its own index, so the chunking never
/// changes the result. On failure the error of the lowest chunk is returned.
pub(crate) fn fill_chunks<T, E, F>(out: &mut [T], threads: usize, fill: F) -> Result<(), E>
where
    T: Send,
    E: Send,
    F: Fn(usize, &mut [T]) -> Result<(), E> + Sync,
{
    let len = out.len();
    let workers = threads.max(1).min(len.max(1));
    if workers == 1 {
        return fill(0, out);
    }
    let chunk = len.div_ceil(workers);

    #[cfg(feature = "std")]
    {
        let fill = &fill;
        let results: Vec<Result<(), E>> = std::thread::scope(|scope| {
            let handles: Vec<_> = out
                .chunks_mut(chunk)
                .enumerate()
                .map(|(k, part)| scope.spawn(move || fill(k * chunk, part)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|p| std::panic::resume_unwind(p)))
                .collect()
        });
        results.into_iter().collect()
    }

    #[cfg(not(feature = "std"))]
    {
        for (k, part) in out.chunks_mut(chunk).enumerate() {
            fill(k * chunk, part)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn chunking_does_not_change_output() {
        for threads in [1, 2, 3, 7, 64] {
            let mut out = vec![0usize; 23];
            fill_chunks::<_, (), _>(&mut out, threads, |off, part| {
                for (k, v) in part.iter_mut().enumerate() {
                    *v = (off + k) * 3;
                }
                Ok(())
            })
            .unwrap();
            assert!(out.iter().enumerate().all(|(i, &v)| v == i * 3));
        }
    }

    #[test]
    fn lowest_chunk_error_wins() {
        let mut out = vec![0u8; 40];
        let err = fill_chunks(&mut out, 4, |off, part| {
            for k in 0..part.len() {
                if (off + k) % 13 == 12 {
                    return Err(off + k);
                }
            }
            Ok(())
        });
        assert_eq!(err, Err(12));
    }

    #[test]
    fn empty_output_is_fine() {
        let mut out: [u8; 0] = [];
        assert_eq!(fill_chunks::<_, (), _>(&mut out, 8, |_, _| Ok(())), Ok(()));
    }
}
