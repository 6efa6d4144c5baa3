use std::collections::BTreeMap;

use num_integer::gcd;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constant `K` in the cluster size bound `|C| <= K / eps^5`.
pub const CLUSTER_SIZE_CONSTANT: f64 = 4.0;

/// Element counts of one set: `(local, global)`.
pub type TypedSet = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clustering {
    pub clusters: Vec<Vec<usize>>,
}

fn inverse_epsilon(epsilon: f64) -> Result<i64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::validation(format!("epsilon {epsilon} outside (0, 1)")));
    }
    let m = (1.0 / epsilon).round();
    if (m - 1.0 / epsilon).abs() > 1e-9 {
        return Err(Error::validation(format!("1/epsilon = {} is not an integer", 1.0 / epsilon)));
    }
    Ok(m as i64)
}

fn value(set: TypedSet, m: i64) -> i64 {
    set.0 as i64 - set.1 as i64 - m
}

/// Groups sets so that every group has at least `|C| / eps` more local than
/// global elements. Sets with zero value `l - g - 1/eps` stay alone,
/// opposite-signed values are batched so they cancel exactly, and one last
/// cluster collects the leftovers.
pub fn balanced_clustering(sets: &[TypedSet], epsilon: f64) -> Result<Clustering> {
    let m = inverse_epsilon(epsilon)?;
    let (lo, hi) = ((m * m) as f64 / 2.0, m * m);
    for (i, &(l, g)) in sets.iter().enumerate() {
        let size = (l + g) as i64;
        if (size as f64) < lo || size > hi {
            return Err(Error::validation(format!("set {i} has {size} elements, outside [{lo}, {hi}]")));
        }
    }
    let total_l: usize = sets.iter().map(|s| s.0).sum();
    let total_g: usize = sets.iter().map(|s| s.1).sum();
    if (total_l as f64) < (1.0 + 3.0 * epsilon) * total_g as f64 - 1e-9 {
        return Err(Error::validation(format!(
            "{total_l} local elements against {total_g} global ones"
        )));
    }
    let total_v: i64 = sets.iter().map(|&s| value(s, m)).sum();
    if total_v < 0 {
        return Err(Error::validation(format!(
            "local surplus {} is below {} sets times {m}",
            total_l as i64 - total_g as i64,
            sets.len()
        )));
    }

    let mut clusters = Vec::new();
    let mut positive: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    let mut negative: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (idx, &s) in sets.iter().enumerate() {
        let v = value(s, m);
        match v.signum() {
            0 => clusters.push(vec![idx]),
            1 => positive.entry(v).or_default().push(idx),
            _ => negative.entry(-v).or_default().push(idx),
        }
    }

    for (&j, negs) in negative.iter_mut() {
        for (&i, poss) in positive.iter_mut() {
            let d = gcd(i, j);
            let (take_pos, take_neg) = ((j / d) as usize, (i / d) as usize);
            while poss.len() >= take_pos && negs.len() >= take_neg {
                let mut batch: Vec<usize> = poss.split_off(poss.len() - take_pos);
                batch.extend(negs.split_off(negs.len() - take_neg));
                batch.sort_unstable();
                clusters.push(batch);
            }
        }
    }

    let mut rest: Vec<usize> = negative.into_values().flatten().collect();
    let mut sum: i64 = rest.iter().map(|&r| value(sets[r], m)).sum();
    let mut positives: Vec<usize> = positive.into_values().flatten().collect();
    positives.sort_by_key(|&r| (value(sets[r], m), std::cmp::Reverse(r)));
    while sum < 0 {
        let r = positives.pop().expect("total value is nonnegative");
        sum += value(sets[r], m);
        rest.push(r);
    }
    if !rest.is_empty() {
        rest.sort_unstable();
        clusters.push(rest);
    }
    clusters.extend(positives.into_iter().map(|r| vec![r]));
    clusters.sort();
    Ok(Clustering { clusters })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterViolation {
    pub cluster: usize,
    pub surplus: i64,
    pub size: usize,
}

/// Clusters whose local surplus is below `|C| / eps` or whose size exceeds
/// `K / eps^5`, plus an error if the clusters do not partition the sets.
pub fn check_clustering(sets: &[TypedSet], epsilon: f64, clustering: &Clustering) -> Result<Vec<ClusterViolation>> {
    let m = inverse_epsilon(epsilon)?;
    let mut seen = vec![false; sets.len()];
    for &r in clustering.clusters.iter().flatten() {
        if r >= sets.len() || std::mem::replace(&mut seen[r], true) {
            return Err(Error::validation(format!("set {r} missing or repeated")));
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::validation("clusters do not cover every set"));
    }
    let cap = CLUSTER_SIZE_CONSTANT * (m as f64).powi(5);
    Ok(clustering
        .clusters
        .iter()
        .enumerate()
        .filter_map(|(ci, c)| {
            let surplus: i64 = c.iter().map(|&r| sets[r].0 as i64 - sets[r].1 as i64).sum();
            let bad = c.is_empty() || surplus < c.len() as i64 * m || c.len() as f64 > cap;
            bad.then_some(ClusterViolation {
                cluster: ci,
                surplus,
                size: c.len(),
            })
        })
        .collect())
}
