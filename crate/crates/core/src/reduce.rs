//! Reductions whose result does not depend on the number of worker threads.
//!
//! Parallel kernels produce one partial per fixed-size block (blocks are
//! defined by index, never by thread), and the partials are combined here
//! by a pairwise tree in index order.

/// Pairwise sum in index order. The association is fixed by the slice
/// length alone.
pub fn tree_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        len => {
            let mid = len / 2;
            tree_sum(&values[..mid]) + tree_sum(&values[mid..])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_small() {
        assert_eq!(tree_sum(&[]), 0.0);
        assert_eq!(tree_sum(&[3.0]), 3.0);
        assert_eq!(tree_sum(&[1.0, 2.0, 3.0]), 6.0);
    }

    #[test]
    fn association_is_fixed() {
        let xs: Vec<f64> = (0..1000).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let a = tree_sum(&xs);
        let b = tree_sum(&xs.clone());
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
