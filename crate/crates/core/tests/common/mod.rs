//! Brute-force reference implementations and random instance generators
//! shared by the integration and acceptance tests. Nothing here calls the
//! library's matching or scoring code.
#![allow(dead_code)]

use posepaste::metrics::EvalSet;
use posepaste::pose::{Orientation, PoseDescriptor};
use posepaste::Point;
use rand::Rng;

pub const ORIENTATIONS: [Orientation; 4] = [Orientation::Up, Orientation::Down, Orientation::Left, Orientation::Right];

/// Random descriptor on the 15-unit lattice, kept small so ties are common.
pub fn random_descriptor<R: Rng>(rng: &mut R) -> PoseDescriptor {
    let slope_q = 15.0 * rng.gen_range(-12i32..=12) as f64;
    let height_q = 15.0 * rng.gen_range(1i32..=6) as f64;
    PoseDescriptor {
        orientation: ORIENTATIONS[rng.gen_range(0..4)],
        slope_raw: slope_q + rng.gen_range(-7.0..7.0),
        slope_q,
        height_raw: height_q + rng.gen_range(-7.0..7.0),
        height_q,
        mid_hip: Point::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)),
        neck: Point::default(),
    }
}

pub fn circular(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    if d > 180.0 {
        360.0 - d
    } else {
        d
    }
}

/// Every donor scored by the lexicographic key (orientation mismatch when
/// any donor shares the orientation, circular slope distance, height
/// distance); returns the minimal-key donors in index order and whether
/// orientation was relaxed.
pub fn oracle_candidates(p: &PoseDescriptor, donors: &[PoseDescriptor]) -> (Vec<usize>, u32) {
    let any_same = donors.iter().any(|d| d.orientation == p.orientation);
    let key = |d: &PoseDescriptor| {
        let mismatch = if any_same && d.orientation != p.orientation { 1u8 } else { 0 };
        (mismatch, circular(d.slope_q, p.slope_q), (d.height_q - p.height_q).abs())
    };
    let mut keys: Vec<(u8, f64, f64, usize)> = donors
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let (m, s, h) = key(d);
            (m, s, h, i)
        })
        .collect();
    keys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let best = (keys[0].0, keys[0].1, keys[0].2);
    let winners = keys.iter().filter(|k| (k.0, k.1, k.2) == best).map(|k| k.3).collect();
    (winners, if any_same { 0 } else { 1 })
}

/// Oracle choice with the same uniform draw the library documents.
pub fn oracle_choice<R: Rng>(p: &PoseDescriptor, donors: &[PoseDescriptor], rng: &mut R) -> (usize, u32) {
    let (winners, relaxed) = oracle_candidates(p, donors);
    (winners[rng.gen_range(0..winners.len())], relaxed)
}

pub struct RandomEval {
    pub set: EvalSet,
    pub distances: Vec<Vec<f64>>,
    pub query_ids: Vec<i64>,
    pub query_cams: Vec<u32>,
    pub gallery_ids: Vec<i64>,
    pub gallery_cams: Vec<u32>,
}

/// Random instance with junk ids, shared cameras and exactly tied distances.
pub fn random_eval<R: Rng>(rng: &mut R, max_q: usize, max_g: usize) -> RandomEval {
    let nq = rng.gen_range(1..=max_q);
    let ng = rng.gen_range(1..=max_g);
    let ids = rng.gen_range(2..12i64);
    let cams = rng.gen_range(1..4u32);
    let label = |rng: &mut R| rng.gen_range(0..ids);
    let query_ids: Vec<i64> = (0..nq).map(|_| label(rng)).collect();
    let query_cams: Vec<u32> = (0..nq).map(|_| rng.gen_range(0..cams)).collect();
    let gallery_ids: Vec<i64> = (0..ng).map(|_| if rng.gen_bool(0.1) { -1 } else { label(rng) }).collect();
    let gallery_cams: Vec<u32> = (0..ng).map(|_| rng.gen_range(0..cams)).collect();
    let coarse = rng.gen_bool(0.5);
    let distances: Vec<Vec<f64>> = (0..nq)
        .map(|_| {
            (0..ng)
                .map(|_| {
                    if coarse {
                        rng.gen_range(0..8) as f64 * 0.25
                    } else {
                        rng.gen_range(0.0..4.0)
                    }
                })
                .collect()
        })
        .collect();
    let set = EvalSet::new(
        distances.iter().flatten().copied().collect(),
        query_ids.clone(),
        query_cams.clone(),
        gallery_ids.clone(),
        gallery_cams.clone(),
    )
    .unwrap();
    RandomEval {
        set,
        distances,
        query_ids,
        query_cams,
        gallery_ids,
        gallery_cams,
    }
}

/// Per valid query: (1-based rank of first hit, AP). `None` when the query
/// has no correct match.
pub fn oracle_query(r: &RandomEval, q: usize) -> Option<(usize, f64)> {
    let mut ranked: Vec<(f64, usize)> = r.distances[q].iter().copied().zip(0..).collect();
    ranked.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let kept: Vec<bool> = ranked
        .into_iter()
        .filter(|&(_, g)| r.gallery_ids[g] >= 0 && !(r.gallery_ids[g] == r.query_ids[q] && r.gallery_cams[g] == r.query_cams[q]))
        .map(|(_, g)| r.gallery_ids[g] == r.query_ids[q])
        .collect();
    let relevant_ranks: Vec<usize> = kept.iter().enumerate().filter(|(_, &hit)| hit).map(|(i, _)| i + 1).collect();
    let first = *relevant_ranks.first()?;
    let precisions: Vec<f64> = relevant_ranks
        .iter()
        .map(|&rank| kept[..rank].iter().filter(|&&h| h).count() as f64 / rank as f64)
        .collect();
    Some((first, precisions.iter().sum::<f64>() / precisions.len() as f64))
}

/// (Rank-k for each k in 1..=G, mAP) over valid queries.
pub fn oracle_metrics(r: &RandomEval) -> Option<(Vec<f64>, f64)> {
    let outcomes: Vec<(usize, f64)> = (0..r.query_ids.len()).filter_map(|q| oracle_query(r, q)).collect();
    if outcomes.is_empty() {
        return None;
    }
    let n = outcomes.len() as f64;
    let ng = r.gallery_ids.len();
    let ranks = (1..=ng)
        .map(|k| outcomes.iter().filter(|(first, _)| *first <= k).count() as f64 / n)
        .collect();
    Some((ranks, outcomes.iter().map(|(_, ap)| ap).sum::<f64>() / n))
}
