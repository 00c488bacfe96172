//! Production solvers against the exhaustive oracles on seeded random inputs.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use avdiar::clustering::pmedian_solve;
use avdiar::dialogue_patterns::extract_patterns;
use avdiar::evaluation::map_clusters;
use avdiar::features::DistanceMatrix;
use avdiar::fusion::{optimal_matching, MatchWeightMatrix};
use avdiar::ingest::ReferenceMap;
use avdiar::model::{Label, Modality, Partition, UttId};
use avdiar::synth::oracle::{oracle_mapping, oracle_matching, oracle_patterns, oracle_pmedian};

fn random_points(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect())
        .collect()
}

fn euclidean(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|a| {
            points
                .iter()
                .map(|b| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
                .collect()
        })
        .collect()
}

fn matrix(rows: &[Vec<f64>]) -> DistanceMatrix {
    DistanceMatrix::from_values((0..rows.len() as UttId).collect(), rows.concat())
}

#[test]
fn pmedian_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let n = rng.random_range(1..=11);
        let p = rng.random_range(1..=n.min(4));
        let rows = euclidean(&random_points(&mut rng, n, 3));
        let sol = pmedian_solve(&matrix(&rows), p).unwrap();
        assert_eq!(sol.objective, oracle_pmedian(&rows, p).unwrap(), "n={n} p={p}");
    }
}

#[test]
fn pmedian_matches_enumeration_on_asymmetric_costs() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let n = rng.random_range(2..=9);
        let p = rng.random_range(1..=3.min(n));
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { 0.0 } else { rng.random_range(0..20) as f64 })
                    .collect()
            })
            .collect();
        let sol = pmedian_solve(&matrix(&rows), p).unwrap();
        assert_eq!(sol.objective, oracle_pmedian(&rows, p).unwrap());
    }
}

#[test]
fn matching_matches_permutations() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..300 {
        let rows = rng.random_range(1..=6);
        let cols = rng.random_range(1..=6);
        let w: Vec<Vec<i64>> = (0..rows)
            .map(|_| (0..cols).map(|_| rng.random_range(0..5000)).collect())
            .collect();
        let m = optimal_matching(&MatchWeightMatrix::from_rows(&w)).unwrap();
        assert_eq!(m.total, oracle_matching(&w).unwrap());
        let recomputed: i64 = m.pairs.iter().map(|&(i, j)| w[i][j]).sum();
        assert_eq!(recomputed, m.total);
    }
}

#[test]
fn patterns_match_regex_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..1000 {
        let sigma = rng.random_range(1..=6);
        let len = rng.random_range(1..=60);
        let s: Vec<Label> = (0..len).map(|_| Label(rng.random_range(0..sigma))).collect();
        assert_eq!(extract_patterns(&s), oracle_patterns(&s).unwrap(), "{s:?}");
    }
}

#[test]
fn mapping_matches_injections() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..300 {
        let n = rng.random_range(1..=12);
        let k = rng.random_range(1..=4);
        let speakers = rng.random_range(1..=4);
        let mut clusters = vec![Vec::new(); k];
        let mut reference = ReferenceMap::new();
        let mut durs = BTreeMap::new();
        for id in 0..n as UttId {
            clusters[rng.random_range(0..k)].push(id);
            reference.insert(id, format!("spk{}", rng.random_range(0..speakers)));
            durs.insert(id, rng.random_range(100..3000));
        }
        let hyp = Partition::new(0, Modality::Audio, clusters);
        let mapped = map_clusters(&hyp, &reference, &durs).unwrap();
        assert_eq!(mapped.matched_ms, oracle_mapping(&hyp, &reference, &durs).unwrap());
        let used: BTreeSet<_> = mapped.speakers.iter().flatten().collect();
        assert_eq!(
            used.len(),
            mapped.speakers.iter().flatten().count(),
            "mapping is one-to-one"
        );
    }
}
