mod common;

use common::{oracle_metrics, random_eval};
use posepaste::metrics::{evaluate, mean_average_precision, rank_k, EvalSet, Protocol};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn random_instances_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(50_200);
    let mut compared = 0;
    for _ in 0..100 {
        let r = random_eval(&mut rng, 50, 200);
        let Some((ranks, map)) = oracle_metrics(&r) else {
            assert!(evaluate(&r.set, Protocol::Market).is_err());
            continue;
        };
        let report = evaluate(&r.set, Protocol::Market).unwrap();
        for (k, want) in ranks.iter().enumerate() {
            assert!((report.rank(k + 1) - want).abs() <= 1e-9);
        }
        assert!((report.mean_ap - map).abs() <= 1e-9);
        assert!((rank_k(&r.set, 1).unwrap() - ranks[0]).abs() <= 1e-9);
        assert!((mean_average_precision(&r.set).unwrap() - map).abs() <= 1e-9);
        compared += 1;
    }
    assert!(compared > 50);
}

fn instance_with_matches(rng: &mut ChaCha8Rng) -> common::RandomEval {
    loop {
        let r = random_eval(rng, 20, 100);
        if oracle_metrics(&r).is_some() {
            return r;
        }
    }
}

#[test]
fn rank_is_monotone_and_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let r = instance_with_matches(&mut rng);
        let report = evaluate(&r.set, Protocol::Market).unwrap();
        assert!(report.cmc.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(*report.cmc.last().unwrap(), 1.0);
        assert!((0.0..=1.0).contains(&report.mean_ap));
        assert!(report.mean_ap <= report.rank(r.set.num_gallery()) + 1e-12);
    }
}

#[test]
fn strictly_increasing_remap_preserves_metrics() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let r = instance_with_matches(&mut rng);
        let before = evaluate(&r.set, Protocol::Market).unwrap();
        let remapped: Vec<f64> = r.distances.iter().flatten().map(|d| (3.0 * d).exp() + d * d).collect();
        let set = EvalSet::new(
            remapped,
            r.query_ids.clone(),
            r.query_cams.clone(),
            r.gallery_ids.clone(),
            r.gallery_cams.clone(),
        )
        .unwrap();
        let after = evaluate(&set, Protocol::Market).unwrap();
        assert_eq!(before, after);
    }
}

#[test]
fn gallery_permutation_is_harmless_without_ties() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let r = instance_with_matches(&mut rng);
        let (nq, ng) = (r.query_ids.len(), r.gallery_ids.len());
        // Continuous distances make exact ties vanishingly unlikely.
        let distances: Vec<Vec<f64>> = (0..nq).map(|_| (0..ng).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
        let mut perm: Vec<usize> = (0..ng).collect();
        for i in (1..ng).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let build = |order: &[usize]| {
            EvalSet::new(
                distances.iter().flat_map(|row| order.iter().map(|&g| row[g])).collect(),
                r.query_ids.clone(),
                r.query_cams.clone(),
                order.iter().map(|&g| r.gallery_ids[g]).collect(),
                order.iter().map(|&g| r.gallery_cams[g]).collect(),
            )
            .unwrap()
        };
        let identity: Vec<usize> = (0..ng).collect();
        let (a, b) = (build(&identity), build(&perm));
        match (evaluate(&a, Protocol::Market), evaluate(&b, Protocol::Market)) {
            (Ok(x), Ok(y)) => {
                assert!((x.mean_ap - y.mean_ap).abs() < 1e-12);
                assert_eq!(x.cmc, y.cmc);
            }
            (Err(_), Err(_)) => {}
            _ => panic!("permutation changed validity"),
        }
    }
}

#[test]
fn hand_case_average_precision() {
    let set = EvalSet::new(vec![1.0, 2.0, 3.0], vec![1], vec![0], vec![1, 2, 1], vec![1, 1, 1]).unwrap();
    let ap = mean_average_precision(&set).unwrap();
    assert!((ap - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-12);
    assert!((ap - 0.833_333_333_333_333_4).abs() < 1e-12);
}
