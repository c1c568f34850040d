use rand::seq::SliceRandom;

use super::manifest::{Manifest, Split};
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed};

pub const DEFAULT_SPLIT_RATIOS: [f64; 3] = [0.7, 0.2, 0.1];

/// Record counts for train/val/test: `floor(r_i * n)` each, remainder to train.
pub fn split_counts(n: usize, ratios: [f64; 3]) -> Result<[usize; 3]> {
    if ratios.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::param("ratios", format!("{ratios:?} must all be positive")));
    }
    let sum: f64 = ratios.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::param("ratios", format!("{ratios:?} sum to {sum}, not 1")));
    }
    if n < 3 {
        return Err(Error::Split(format!("need at least 3 records to split, got {n}")));
    }
    // the epsilon keeps 0.7 * 10 from flooring to 6
    let mut counts = ratios.map(|r| (r * n as f64 + 1e-9).floor() as usize);
    counts[0] += n - counts.iter().sum::<usize>();
    Ok(counts)
}

/// Seeded shuffle, then contiguous train/val/test assignment. Record order
/// in the returned manifest is unchanged; only the split tags are set.
pub fn split_dataset(manifest: &Manifest, ratios: [f64; 3], seed: u64) -> Result<Manifest> {
    let n = manifest.len();
    let counts = split_counts(n, ratios)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(derive_seed(seed, "split")));
    let mut out = manifest.clone();
    let mut pos = 0;
    for (split, count) in Split::ASSIGNED.into_iter().zip(counts) {
        for &i in &order[pos..pos + count] {
            out.records[i].split = split;
        }
        pos += count;
    }
    Ok(out)
}
