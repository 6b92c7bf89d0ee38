//! Donor selection by lexicographic pose priority: same orientation first,
//! then nearest quantized slope, then nearest quantized height. Whatever is
//! still tied after the three filters is broken by a uniform draw from a
//! seeded per-pedestrian stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pose::{Orientation, PoseDescriptor};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub pedestrian_index: usize,
    pub donor_index: usize,
    pub orientation_matched: bool,
    pub slope_residual_q: f64,
    pub height_residual_q: f64,
    /// 0 when an orientation-equal donor existed, 1 when every donor had to
    /// be considered.
    pub relaxation_level: u32,
}

/// Circular distance between two angles in degrees, in [0, 180].
pub fn slope_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs() % 360.0;
    d.min(360.0 - d)
}

/// Deterministic random stream for one pedestrian. Streams for different
/// indices are independent, so results do not depend on evaluation order.
pub fn pedestrian_rng(seed: u64, pedestrian_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(pedestrian_index as u64);
    rng
}

pub fn find_equal_orientation(donors: &[PoseDescriptor], t: Orientation) -> Vec<usize> {
    donors
        .iter()
        .enumerate()
        .filter(|(_, d)| d.orientation == t)
        .map(|(i, _)| i)
        .collect()
}

/// All members of `pool` minimizing `dist`, in ascending index order.
fn argmin_all(pool: &[usize], mut dist: impl FnMut(usize) -> f64) -> Result<Vec<usize>> {
    if pool.is_empty() {
        return Err(Error::Contract("nearest-neighbour search over an empty pool"));
    }
    let scored: Vec<(usize, f64)> = pool.iter().map(|&i| (i, dist(i))).collect();
    let best = scored.iter().map(|&(_, d)| d).fold(f64::INFINITY, f64::min);
    let tol = 1e-9 * (1.0 + best);
    let mut out: Vec<usize> = scored.into_iter().filter(|&(_, d)| d <= best + tol).map(|(i, _)| i).collect();
    out.sort_unstable();
    Ok(out)
}

pub fn find_nearest_slope(donors: &[PoseDescriptor], pool: &[usize], slope_q: f64) -> Result<Vec<usize>> {
    argmin_all(pool, |i| slope_distance(donors[i].slope_q, slope_q))
}

pub fn find_nearest_height(donors: &[PoseDescriptor], pool: &[usize], height_q: f64) -> Result<Vec<usize>> {
    argmin_all(pool, |i| (donors[i].height_q - height_q).abs())
}

/// Candidates surviving all three filters, and the relaxation level used.
pub fn candidates(p: &PoseDescriptor, donors: &[PoseDescriptor]) -> Result<(Vec<usize>, u32)> {
    if donors.is_empty() {
        return Err(Error::Config("donor set is empty".into()));
    }
    let mut pool = find_equal_orientation(donors, p.orientation);
    let mut relaxation = 0;
    if pool.is_empty() {
        pool = (0..donors.len()).collect();
        relaxation = 1;
    }
    let pool = find_nearest_slope(donors, &pool, p.slope_q)?;
    let pool = find_nearest_height(donors, &pool, p.height_q)?;
    Ok((pool, relaxation))
}

/// Selects a donor for one pedestrian. `pedestrian_index` is recorded in
/// the result only.
pub fn match_one<R: Rng + ?Sized>(
    pedestrian_index: usize,
    p: &PoseDescriptor,
    donors: &[PoseDescriptor],
    rng: &mut R,
) -> Result<MatchResult> {
    let (pool, relaxation_level) = candidates(p, donors)?;
    let donor_index = pool[rng.gen_range(0..pool.len())];
    let d = &donors[donor_index];
    Ok(MatchResult {
        pedestrian_index,
        donor_index,
        orientation_matched: d.orientation == p.orientation,
        slope_residual_q: slope_distance(d.slope_q, p.slope_q),
        height_residual_q: (d.height_q - p.height_q).abs(),
        relaxation_level,
    })
}

pub fn match_all(pedestrians: &[PoseDescriptor], donors: &[PoseDescriptor], seed: u64) -> Result<Vec<MatchResult>> {
    if donors.is_empty() {
        return Err(Error::Config("donor set is empty".into()));
    }
    pedestrians
        .par_iter()
        .enumerate()
        .map(|(i, p)| match_one(i, p, donors, &mut pedestrian_rng(seed, i)))
        .collect()
}
