//! Owen-scrambled Sobol points on the unit cube.

use crate::error::{Error, Result};

/// Largest supported dimension of the underlying direction-number table.
pub const MAX_DIMENSION: usize = sobol_burley::NUM_DIMENSIONS as usize;

/// The `index`-th point of a `dim`-dimensional scrambled Sobol sequence. The seed
/// selects the scramble, so equal seeds reproduce equal sequences.
pub fn point(index: u32, dim: usize, seed: u64) -> Result<Vec<f64>> {
    if dim == 0 || dim > MAX_DIMENSION {
        return Err(Error::invalid(format!(
            "sobol dimension must be in 1..={MAX_DIMENSION}, got {dim}"
        )));
    }
    let seed = fold_seed(seed);
    Ok((0..dim as u32)
        .map(|j| sobol_burley::sample(index, j, seed) as f64)
        .collect())
}

/// The first `count` points.
pub fn points(count: usize, dim: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    (0..count as u32).map(|i| point(i, dim, seed)).collect()
}

fn fold_seed(seed: u64) -> u32 {
    (seed ^ (seed >> 32)) as u32
}
