//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) [`Exec::Parallel`] dispatches to
//! rayon; without it every call runs sequentially. Output order and
//! floating-point reduction order never depend on the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution strategy for the data-parallel kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

/// Fixed chunk length for reductions, so results are bit-identical
/// between sequential and parallel runs.
pub const CHUNK: usize = 4096;

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_range<R, F>(exec: Exec, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
        _ => (0..n).map(f).collect(),
    }
}

/// Fills `out[i] = f(i)`.
pub fn fill<F>(exec: Exec, out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
            for (k, o) in chunk.iter_mut().enumerate() {
                *o = f(c * CHUNK + k);
            }
        }),
        _ => out.iter_mut().enumerate().for_each(|(i, o)| *o = f(i)),
    }
}

/// Deterministic chunked dot product.
pub fn dot(exec: Exec, a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let partial = |(x, y): (&[f64], &[f64])| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let parts: Vec<f64> = match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => a.par_chunks(CHUNK).zip(b.par_chunks(CHUNK)).map(partial).collect(),
        _ => a.chunks(CHUNK).zip(b.chunks(CHUNK)).map(partial).collect(),
    };
    parts.iter().sum()
}

/// `y += alpha * x`.
pub fn axpy(exec: Exec, alpha: f64, x: &[f64], y: &mut [f64]) {
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => y
            .par_chunks_mut(CHUNK)
            .zip(x.par_chunks(CHUNK))
            .for_each(|(yc, xc)| yc.iter_mut().zip(xc).for_each(|(q, p)| *q += alpha * p)),
        _ => y.iter_mut().zip(x).for_each(|(q, p)| *q += alpha * p),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let v: Vec<usize> = (0..1000).collect();
        let a = map(Exec::Sequential, &v, |x| x * x);
        let b = map(Exec::Parallel, &v, |x| x * x);
        assert_eq!(a, b);
        assert_eq!(a[999], 999 * 999);
    }

    #[test]
    fn dot_is_bit_identical() {
        let a: Vec<f64> = (0..20000).map(|i| (i as f64 * 0.37).sin()).collect();
        let b: Vec<f64> = (0..20000).map(|i| (i as f64 * 0.11).cos()).collect();
        assert_eq!(dot(Exec::Sequential, &a, &b).to_bits(), dot(Exec::Parallel, &a, &b).to_bits());
    }

    #[test]
    fn fill_and_axpy() {
        let mut out = vec![0.0; 9000];
        fill(Exec::Parallel, &mut out, |i| i as f64);
        let mut y = vec![1.0; 9000];
        axpy(Exec::Parallel, 2.0, &out, &mut y);
        assert_eq!(y[8999], 1.0 + 2.0 * 8999.0);
    }
}
