use crate::error::{Error, Result};
use crate::taxonomy::N_CLASSES;

/// Splits must beat this impurity decrease to count as positive; anything
/// smaller is rounding noise from partitions with unchanged proportions.
pub const MIN_DECREASE: f64 = 1e-12;

pub type ClassCounts = [u64; N_CLASSES];

/// Gini impurity `1 - sum(p_k^2)`.
pub fn gini(counts: &[u64]) -> Result<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::Argument("gini impurity of an empty node".into()));
    }
    Ok(gini_unchecked(counts, total))
}

#[inline]
pub(crate) fn gini_unchecked(counts: &[u64], total: u64) -> f64 {
    let t = total as f64;
    let mut sum_sq = 0.0;
    for &c in counts {
        let p = c as f64 / t;
        sum_sq += p * p;
    }
    1.0 - sum_sq
}

/// Weighted impurity decrease of splitting `parent` into `left` and the
/// remainder.
#[inline]
pub(crate) fn impurity_decrease(parent: &ClassCounts, parent_total: u64, parent_gini: f64, left: &ClassCounts, left_total: u64) -> f64 {
    let mut right = [0u64; N_CLASSES];
    for k in 0..N_CLASSES {
        right[k] = parent[k] - left[k];
    }
    let right_total = parent_total - left_total;
    let n = parent_total as f64;
    parent_gini
        - (left_total as f64 / n) * gini_unchecked(left, left_total)
        - (right_total as f64 / n) * gini_unchecked(&right, right_total)
}

/// Threshold between consecutive distinct values `lo < hi`: their midpoint
/// in f32, nudged back to `lo` if rounding lands it on `hi` so that `lo`
/// still routes left and `hi` right.
#[inline]
pub fn midpoint(lo: f32, hi: f32) -> f32 {
    let m = ((lo as f64 + hi as f64) * 0.5) as f32;
    if m >= hi {
        lo
    } else {
        m
    }
}

/// Row-major feature matrix with class labels.
#[derive(Debug, Clone, Copy)]
pub struct Samples<'a> {
    pub x: &'a [f32],
    pub y: &'a [u8],
    pub n_features: usize,
}

impl<'a> Samples<'a> {
    pub fn new(x: &'a [f32], y: &'a [u8], n_features: usize) -> Result<Self> {
        if n_features == 0 || x.len() != y.len() * n_features {
            return Err(Error::Argument(format!(
                "feature matrix of {} values does not fit {} samples x {} features",
                x.len(),
                y.len(),
                n_features
            )));
        }
        if let Some(bad) = y.iter().find(|&&c| c as usize >= N_CLASSES) {
            return Err(Error::Argument(format!("label {bad} is not a trainable class")));
        }
        Ok(Samples { x, y, n_features })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    #[inline]
    pub fn value(&self, sample: usize, feature: usize) -> f32 {
        self.x[sample * self.n_features + feature]
    }

    pub fn counts(&self, indices: &[usize]) -> ClassCounts {
        let mut c = [0u64; N_CLASSES];
        for &i in indices {
            c[self.y[i] as usize] += 1;
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f32,
    pub decrease: f64,
}

/// Exact Gini split search over `features` for the node holding `indices`
/// (which may repeat, as after bootstrapping).
///
/// Candidate thresholds are midpoints of consecutive distinct values. The
/// largest decrease wins; ties go to the lowest feature index, then the
/// lowest threshold. Returns `None` when no candidate beats
/// [`MIN_DECREASE`].
pub fn best_split(samples: &Samples<'_>, indices: &[usize], features: &[usize], parent: &ClassCounts) -> Option<SplitChoice> {
    let total: u64 = parent.iter().sum();
    if indices.len() < 2 || total < 2 {
        return None;
    }
    let parent_gini = gini_unchecked(parent, total);
    if parent_gini <= 0.0 {
        return None;
    }
    let mut order: Vec<usize> = features.to_vec();
    order.sort_unstable();
    order.dedup();

    let mut best: Option<SplitChoice> = None;
    let mut column: Vec<(f32, u8)> = Vec::with_capacity(indices.len());
    for &f in &order {
        column.clear();
        column.extend(indices.iter().map(|&i| (samples.value(i, f), samples.y[i])));
        column.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));

        let mut left = [0u64; N_CLASSES];
        for j in 0..column.len() - 1 {
            left[column[j].1 as usize] += 1;
            let (lo, hi) = (column[j].0, column[j + 1].0);
            if lo >= hi {
                continue;
            }
            let decrease = impurity_decrease(parent, total, parent_gini, &left, (j + 1) as u64);
            let beats = match best {
                None => decrease > MIN_DECREASE,
                Some(b) => decrease > b.decrease,
            };
            if beats {
                best = Some(SplitChoice {
                    feature: f,
                    threshold: midpoint(lo, hi),
                    decrease,
                });
            }
        }
    }
    best
}
