//! Data-parallel helpers. With the `parallel` feature the [`Exec::Parallel`]
//! mode fans work out over rayon; without it every mode runs sequentially.

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

/// Maps `op` over `items`, preserving order.
pub fn map_collect<T, R, F>(exec: Exec, items: &[T], op: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(op).collect()
        }
        _ => items.iter().map(op).collect(),
    }
}

/// Like [`map_collect`] but stops at the first error (in input order).
pub fn try_map_collect<T, R, E, F>(exec: Exec, items: &[T], op: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(&T) -> Result<R, E> + Sync + Send,
{
    map_collect(exec, items, op).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = map_collect(Exec::Sequential, &xs, |x| x * x);
        let b = map_collect(Exec::Parallel, &xs, |x| x * x);
        assert_eq!(a, b);
        let e: Result<Vec<u64>, u64> = try_map_collect(Exec::Parallel, &xs, |&x| if x == 500 { Err(x) } else { Ok(x) });
        assert_eq!(e, Err(500));
    }
}
