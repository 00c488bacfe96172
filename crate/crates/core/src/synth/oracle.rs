//! Exhaustive reference implementations for small inputs.
//!
//! These share no code with the production solvers and are only meant for
//! cross-checking them.

use std::collections::{BTreeMap, BTreeSet};

use regex::Regex;

use super::{Result, SynthError};
use crate::ingest::ReferenceMap;
use crate::model::{Label, Partition, UttId};

pub const MAX_PMEDIAN_POINTS: usize = 16;
pub const MAX_MATCHING_SIDE: usize = 8;
pub const MAX_SEQUENCE: usize = 200;

fn guard(what: &'static str, size: usize, limit: usize) -> Result<()> {
    if size > limit {
        Err(SynthError::SizeGuardExceeded { what, size, limit })
    } else {
        Ok(())
    }
}

/// Best p-median objective over every center subset, scanned as bitmasks.
/// Given the centers, each point's cheapest assignment is independent of the
/// others, so the minimum is taken point by point.
pub fn oracle_pmedian(d: &[Vec<f64>], p: usize) -> Result<f64> {
    let n = d.len();
    guard("p-median instance", n, MAX_PMEDIAN_POINTS)?;
    if p == 0 || p > n {
        return Err(SynthError::InvalidConfig(format!("p = {p} with {n} points")));
    }
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != p {
            continue;
        }
        let mut cost = 0.0;
        for row in d {
            let nearest = (0..n)
                .filter(|j| mask & (1 << j) != 0)
                .map(|j| row[j])
                .fold(f64::INFINITY, f64::min);
            cost += nearest;
        }
        best = best.min(cost);
    }
    Ok(best)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out
}

/// Largest total weight of a one-to-one row/column pairing, trying every
/// permutation of the zero-padded square matrix.
pub fn oracle_matching(w: &[Vec<i64>]) -> Result<i64> {
    let rows = w.len();
    let cols = w.iter().map(Vec::len).max().unwrap_or(0);
    let side = rows.max(cols);
    guard("matching side", side, MAX_MATCHING_SIDE)?;
    let at = |i: usize, j: usize| w.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0);
    Ok(permutations(side)
        .iter()
        .map(|perm| perm.iter().enumerate().map(|(i, &j)| at(i, j)).sum())
        .max()
        .unwrap_or(0))
}

/// Ordered label pairs `(a, b)` for which the sequence contains `a(ba)+`,
/// tested pair by pair with a regular expression.
pub fn oracle_patterns(labels: &[Label]) -> Result<BTreeSet<(Label, Label)>> {
    guard("label sequence", labels.len(), MAX_SEQUENCE)?;
    let glyph = |l: Label| char::from_u32(0x4E00 + l.0).expect("label fits the glyph range");
    let text: String = labels.iter().map(|&l| glyph(l)).collect();
    let alphabet: BTreeSet<Label> = labels.iter().copied().collect();
    let mut out = BTreeSet::new();
    for &a in &alphabet {
        for &b in &alphabet {
            if a == b {
                continue;
            }
            let (ga, gb) = (
                regex::escape(&glyph(a).to_string()),
                regex::escape(&glyph(b).to_string()),
            );
            let re = Regex::new(&format!("^.*{ga}(?:{gb}{ga})+.*$")).expect("valid pattern");
            if re.is_match(&text) {
                out.insert((a, b));
            }
        }
    }
    Ok(out)
}

/// Largest duration a one-to-one cluster-to-speaker mapping can get right,
/// trying every injection of clusters into speakers (or into nothing).
pub fn oracle_mapping(hyp: &Partition, reference: &ReferenceMap, durations: &BTreeMap<UttId, i64>) -> Result<i64> {
    let speakers: Vec<&String> = {
        let set: BTreeSet<&String> = hyp
            .clusters
            .iter()
            .flatten()
            .filter_map(|id| reference.get(id))
            .collect();
        set.into_iter().collect()
    };
    guard("clusters", hyp.clusters.len(), MAX_MATCHING_SIDE)?;
    guard("speakers", speakers.len(), MAX_MATCHING_SIDE)?;
    let gain = |k: usize, s: &String| -> i64 {
        hyp.clusters[k]
            .iter()
            .filter(|id| reference.get(id) == Some(s))
            .map(|id| durations.get(id).copied().unwrap_or(0))
            .sum()
    };
    fn search(k: usize, used: &mut Vec<bool>, n: usize, gain: &dyn Fn(usize, usize) -> i64) -> i64 {
        if k == n {
            return 0;
        }
        let mut best = search(k + 1, used, n, gain);
        for s in 0..used.len() {
            if !used[s] {
                used[s] = true;
                best = best.max(gain(k, s) + search(k + 1, used, n, gain));
                used[s] = false;
            }
        }
        best
    }
    let g = |k: usize, s: usize| gain(k, speakers[s]);
    Ok(search(0, &mut vec![false; speakers.len()], hyp.clusters.len(), &g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Modality;

    fn labels(s: &str) -> Vec<Label> {
        s.bytes().map(|b| Label((b - b'a') as u32)).collect()
    }

    #[test]
    fn matching_two_by_two() {
        assert_eq!(oracle_matching(&[vec![2, 1], vec![0, 1]]).unwrap(), 3);
        assert_eq!(oracle_matching(&[vec![5, 1, 0]]).unwrap(), 5);
        assert!(matches!(
            oracle_matching(&vec![vec![0; 9]; 9]),
            Err(SynthError::SizeGuardExceeded { .. })
        ));
    }

    #[test]
    fn patterns_unrolled() {
        let ab: BTreeSet<_> = [(Label(0), Label(1))].into();
        assert_eq!(oracle_patterns(&labels("ababa")).unwrap().len(), 2);
        assert_eq!(oracle_patterns(&labels("aba")).unwrap(), ab);
        assert!(oracle_patterns(&labels("aabb")).unwrap().is_empty());
    }

    #[test]
    fn pmedian_line() {
        let pts = [0.0, 1.0, 10.0, 11.0];
        let d: Vec<Vec<f64>> = pts
            .iter()
            .map(|a| pts.iter().map(|b| f64::abs(a - b)).collect())
            .collect();
        assert_eq!(oracle_pmedian(&d, 2).unwrap(), 2.0);
        assert_eq!(oracle_pmedian(&d, 4).unwrap(), 0.0);
        assert!(oracle_pmedian(&d, 0).is_err());
    }

    #[test]
    fn mapping_counts_best_injection() {
        let reference: ReferenceMap = [(0, "a"), (1, "a"), (2, "b")]
            .iter()
            .map(|(i, s)| (*i, s.to_string()))
            .collect();
        let durs: BTreeMap<UttId, i64> = [(0, 1000), (1, 1000), (2, 500)].into();
        let p = Partition::new(0, Modality::Audio, vec![vec![0, 2], vec![1]]);
        assert_eq!(oracle_mapping(&p, &reference, &durs).unwrap(), 1500);
    }
}
