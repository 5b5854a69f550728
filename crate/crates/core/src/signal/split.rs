use std::cmp::Ordering;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::record::{Dataset, SplitTag};
use crate::error::{Error, Result};

fn subject_key(seed: u64, subject: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(subject.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Subject counts per split by largest remainder, each split at least one.
///
/// Every count is within one subject of `fraction * n` whenever each target
/// is at least one subject.
pub fn split_quotas(n: usize, fractions: [f64; 3]) -> Result<[usize; 3]> {
    if fractions.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
        return Err(Error::InvalidInput(format!("split fractions must be positive: {fractions:?}")));
    }
    let total: f64 = fractions.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("split fractions sum to {total}, not 1")));
    }
    if n < fractions.len() {
        return Err(Error::InfeasibleSplit(format!(
            "{n} subjects cannot fill {} splits",
            fractions.len()
        )));
    }
    let targets = fractions.map(|f| f * n as f64);
    let mut quotas = targets.map(|t| t.floor() as usize);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        let ra = targets[a] - targets[a].floor();
        let rb = targets[b] - targets[b].floor();
        rb.partial_cmp(&ra).unwrap_or(Ordering::Equal).then(a.cmp(&b))
    });
    let assigned: usize = quotas.iter().sum();
    for &i in order.iter().take(n - assigned) {
        quotas[i] += 1;
    }
    while let Some(empty) = quotas.iter().position(|&q| q == 0) {
        let donor = (0..3).max_by_key(|&i| (quotas[i], std::cmp::Reverse(i))).expect("three splits");
        quotas[donor] -= 1;
        quotas[empty] += 1;
    }
    Ok(quotas)
}

/// Partitions `d` into train/val/test with every subject in exactly one split.
///
/// Subjects are ranked by a keyed SHA-256 of `(seed, subject_id)` within
/// their majority class, the classes are interleaved by relative rank, and
/// contiguous quota blocks of that order become train, val and test. The
/// result depends only on the subject set, their labels and `seed`, and
/// each split receives close to the overall class ratio.
pub fn split_by_subject(
    d: &Dataset,
    fractions: [f64; 3],
    seed: u64,
) -> Result<(Dataset, Dataset, Dataset)> {
    let labels = d.subject_labels();
    let quotas = split_quotas(labels.len(), fractions)?;

    let mut by_class: [Vec<(u64, &str)>; 2] = [Vec::new(), Vec::new()];
    for (&id, &label) in &labels {
        by_class[label as usize].push((subject_key(seed, id), id));
    }
    let mut order: Vec<(f64, u8, u64, &str)> = Vec::with_capacity(labels.len());
    for (class, members) in by_class.iter_mut().enumerate() {
        members.sort_unstable();
        let n = members.len() as f64;
        for (rank, &(key, id)) in members.iter().enumerate() {
            order.push(((rank as f64 + 0.5) / n, class as u8, key, id));
        }
    }
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut assignment = std::collections::HashMap::with_capacity(order.len());
    let mut cursor = 0;
    for (split, &q) in quotas.iter().enumerate() {
        for &(_, _, _, id) in &order[cursor..cursor + q] {
            assignment.insert(id, split);
        }
        cursor += q;
    }

    let mut idx: [Vec<usize>; 3] = Default::default();
    for (i, r) in d.records().iter().enumerate() {
        idx[assignment[r.subject_id()]].push(i);
    }
    Ok((
        d.select(&idx[0], SplitTag::Train),
        d.select(&idx[1], SplitTag::Val),
        d.select(&idx[2], SplitTag::Test),
    ))
}

/// Keeps `ceil(fraction * N)` records drawn uniformly without replacement,
/// in their original order. Subjects are ignored.
pub fn subsample_training(d: &Dataset, fraction: f64, seed: u64) -> Result<Dataset> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidInput(format!("fraction must be in (0, 1], got {fraction}")));
    }
    if d.is_empty() {
        return Err(Error::InvalidInput("cannot subsample an empty dataset".into()));
    }
    let n = d.len();
    // absorb representation error such as 0.1 * 30 = 3.0000000000000004
    let k = ((fraction * n as f64) - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    if k == n {
        return Ok(d.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, n, k).into_vec();
    picked.sort_unstable();
    Ok(d.select(&picked, d.split()))
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::signal::PpgRecord;

    fn corpus(subjects: usize, windows: usize) -> Dataset {
        let mut recs = Vec::new();
        for s in 0..subjects {
            for w in 0..windows {
                let label = u8::from(s % 5 == 0);
                recs.push(
                    PpgRecord::new(format!("p{s:03}"), vec![w as f64; 20], 125.0, None, None, Some(label))
                        .unwrap(),
                );
            }
        }
        Dataset::new(recs, SplitTag::Unsplit)
    }

    fn subject_set(d: &Dataset) -> BTreeSet<String> {
        d.subjects().into_iter().map(String::from).collect()
    }

    #[test]
    fn ten_subjects_partition() {
        let d = corpus(10, 3);
        let (tr, va, te) = split_by_subject(&d, [0.8, 0.1, 0.1], 7).unwrap();
        let (a, b, c) = (subject_set(&tr), subject_set(&va), subject_set(&te));
        assert!(a.is_disjoint(&b) && a.is_disjoint(&c) && b.is_disjoint(&c));
        let all: BTreeSet<_> = a.union(&b).chain(c.iter()).cloned().collect();
        assert_eq!(all, subject_set(&d));
        assert_eq!((a.len(), b.len(), c.len()), (8, 1, 1));
        assert_eq!(tr.len() + va.len() + te.len(), d.len());
    }

    #[test]
    fn split_is_deterministic() {
        let d = corpus(10, 2);
        let first = split_by_subject(&d, [0.8, 0.1, 0.1], 7).unwrap();
        let second = split_by_subject(&d, [0.8, 0.1, 0.1], 7).unwrap();
        assert_eq!(first, second);
        let other = split_by_subject(&d, [0.5, 0.25, 0.25], 8).unwrap();
        assert_eq!(other.0.subjects().len(), 5);
    }

    #[test]
    fn too_few_subjects() {
        let d = corpus(2, 4);
        assert!(matches!(
            split_by_subject(&d, [0.4, 0.3, 0.3], 1),
            Err(Error::InfeasibleSplit(_))
        ));
    }

    #[test]
    fn fraction_validation() {
        assert!(split_quotas(10, [0.5, 0.5, 0.0]).is_err());
        assert!(split_quotas(10, [0.5, 0.3, 0.3]).is_err());
        assert_eq!(split_quotas(3, [0.98, 0.01, 0.01]).unwrap(), [1, 1, 1]);
    }

    #[test]
    fn splits_are_stratified() {
        let d = corpus(100, 1);
        let (tr, va, te) = split_by_subject(&d, [0.7, 0.15, 0.15], 3).unwrap();
        for (part, n) in [(&tr, 70), (&va, 15), (&te, 15)] {
            let pos = part.labels().iter().filter(|&&l| l == 1).count();
            assert_eq!(part.len(), n);
            assert!((pos as f64 - 0.2 * n as f64).abs() <= 1.0, "{pos} of {n}");
        }
    }

    #[test]
    fn subsample_counts() {
        let d = corpus(1000, 1);
        assert_eq!(subsample_training(&d, 0.25, 1).unwrap().len(), 250);
        assert_eq!(subsample_training(&d, 0.0625, 1).unwrap().len(), 63);
        let d30 = corpus(30, 1);
        assert_eq!(subsample_training(&d30, 0.1, 1).unwrap().len(), 3);
    }

    #[test]
    fn subsample_identity_at_one() {
        let d = corpus(17, 2);
        assert_eq!(subsample_training(&d, 1.0, 99).unwrap(), d);
    }

    #[test]
    fn subsample_rejects_bad_fraction() {
        let d = corpus(5, 1);
        for f in [0.0, -0.1, 1.01, f64::NAN] {
            assert!(subsample_training(&d, f, 1).is_err());
        }
        let empty = Dataset::new(vec![], SplitTag::Train);
        assert!(subsample_training(&empty, 0.5, 1).is_err());
    }

    #[test]
    fn subsample_small_is_uniform_over_pairs() {
        // N=10, fraction 1/8 -> 2 records; tally every seed's pick over the 45 possible pairs.
        let d = corpus(10, 1);
        let ids = |x: &Dataset| -> Vec<String> { x.subjects().into_iter().map(String::from).collect() };
        let mut counts = std::collections::BTreeMap::new();
        let trials = 9000;
        for seed in 0..trials {
            let s = subsample_training(&d, 0.125, seed).unwrap();
            assert_eq!(s.len(), 2);
            *counts.entry(ids(&s)).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 45);
        let expected = trials as f64 / 45.0;
        let chi2: f64 =
            counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 44 degrees of freedom, 99.9th percentile ~ 78.7
        assert!(chi2 < 78.7, "chi2 = {chi2}");
        let a = ids(&subsample_training(&d, 0.125, 1).unwrap());
        let b = ids(&subsample_training(&d, 0.125, 2).unwrap());
        assert_ne!(a, b);
    }
}
