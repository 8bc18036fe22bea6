//! Seeded stratified k-fold partitioning.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::ingest::Label;

use super::EvalError;

/// Partition `0..labels.len()` into `k` folds whose per-class counts differ
/// by at most one. Shuffling is driven entirely by `seed`.
pub fn stratified_kfold(
    labels: &[Label],
    k: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>, EvalError> {
    if k < 2 {
        return Err(EvalError::BadFolds(format!("k must be at least 2, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (class, name) in [(Label::Case, "case"), (Label::Control, "control")] {
        let mut indices: Vec<usize> =
            (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if indices.len() < k {
            return Err(EvalError::BadFolds(format!(
                "{k} folds need at least {k} {name} samples, found {}",
                indices.len()
            )));
        }
        indices.shuffle(&mut rng);
        // First `len % k` folds take the extra element.
        let base = indices.len() / k;
        let extra = indices.len() % k;
        let mut cursor = 0;
        for (i, fold) in folds.iter_mut().enumerate() {
            let take = base + usize::from(i < extra);
            fold.extend(&indices[cursor..cursor + take]);
            cursor += take;
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn mixed(cases: usize, controls: usize) -> Vec<Label> {
        // Interleave so index order carries no class structure.
        let mut labels = Vec::new();
        let (mut c, mut k) = (cases, controls);
        while c > 0 || k > 0 {
            if c > 0 {
                labels.push(Label::Case);
                c -= 1;
            }
            if k > 0 {
                labels.push(Label::Control);
                k -= 1;
            }
        }
        labels
    }

    #[test]
    fn divisible_classes_split_evenly() {
        let labels = mixed(10, 10);
        let folds = stratified_kfold(&labels, 5, 1).unwrap();
        for fold in &folds {
            assert_eq!(fold.len(), 4);
            let cases = fold.iter().filter(|&&i| labels[i] == Label::Case).count();
            assert_eq!(cases, 2);
        }
    }

    #[test]
    fn uneven_classes_differ_by_at_most_one() {
        let labels = mixed(7, 5);
        let folds = stratified_kfold(&labels, 3, 9).unwrap();
        // Counting oracle over the produced partition.
        let mut case_counts = Vec::new();
        let mut control_counts = Vec::new();
        for fold in &folds {
            case_counts.push(fold.iter().filter(|&&i| labels[i] == Label::Case).count());
            control_counts.push(fold.iter().filter(|&&i| labels[i] == Label::Control).count());
        }
        assert_eq!(case_counts.iter().sum::<usize>(), 7);
        assert_eq!(control_counts.iter().sum::<usize>(), 5);
        for counts in [&case_counts, &control_counts] {
            let min = counts.iter().min().unwrap();
            let max = counts.iter().max().unwrap();
            assert!(max - min <= 1, "{counts:?}");
        }
        // Folds partition all indices.
        let union: HashSet<usize> = folds.iter().flatten().copied().collect();
        assert_eq!(union.len(), labels.len());
        assert_eq!(folds.iter().map(Vec::len).sum::<usize>(), labels.len());
    }

    #[test]
    fn same_seed_means_same_partition() {
        let labels = mixed(9, 6);
        let a = stratified_kfold(&labels, 3, 42).unwrap();
        let b = stratified_kfold(&labels, 3, 42).unwrap();
        assert_eq!(a, b);
        let c = stratified_kfold(&labels, 3, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn class_smaller_than_k_is_rejected() {
        let labels = mixed(2, 8);
        assert!(matches!(stratified_kfold(&labels, 3, 0), Err(EvalError::BadFolds(_))));
        assert!(matches!(stratified_kfold(&labels, 1, 0), Err(EvalError::BadFolds(_))));
    }
}
