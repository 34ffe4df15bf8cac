//! Farthest-point sampling and the random baseline.
//!
//! Every greedy step picks the point whose squared distance to the already
//! selected set is largest, smallest index first on ties. Running the greedy
//! over the whole set yields a labeling order whose prefixes are the most
//! diverse subsets the greedy can find.

use std::collections::BTreeMap;

use crate::autoencoder::LatentSpace;
use crate::linalg::{column_mean, sq_dist};
use crate::{Error, Result, Rng};

/// Stands in for the infinite gap of the first selected point.
pub const FIRST_GAP: f32 = f32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StartRule {
    FixedIndex(usize),
    /// The point farthest from the dataset mean.
    #[default]
    FarthestFromCentroid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    /// Selected indices in selection order.
    pub order: Vec<usize>,
    /// `gaps[t]` is the squared distance from `order[t]` to its nearest
    /// predecessor; `gaps[0]` is [`FIRST_GAP`].
    pub gaps: Vec<f32>,
}

impl SelectionResult {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

fn check_budget(rows: usize, m: usize) -> Result<()> {
    if rows == 0 {
        return Err(Error::EmptyInput("no points to select from".into()));
    }
    if m == 0 || m > rows {
        return Err(Error::Config(format!("budget {m} outside 1..={rows}")));
    }
    Ok(())
}

/// Index of the largest value, smallest index on ties.
fn argmax(values: &[f32]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn centroid_start(latent: &LatentSpace) -> Result<usize> {
    let mean = column_mean(&latent.embeddings)?;
    let mut best = 0;
    let mut best_d = f64::NEG_INFINITY;
    for i in 0..latent.rows() {
        let d: f64 = latent
            .point(i)
            .iter()
            .zip(&mean)
            .map(|(&x, &mu)| (x as f64 - mu).powi(2))
            .sum();
        if d > best_d {
            best = i;
            best_d = d;
        }
    }
    Ok(best)
}

/// Greedy max-min selection of `m` points.
pub fn farthest_point_sample(latent: &LatentSpace, m: usize, start: StartRule) -> Result<SelectionResult> {
    let n = latent.rows();
    check_budget(n, m)?;
    let first = match start {
        StartRule::FixedIndex(i) if i >= n => {
            return Err(Error::Config(format!("start index {i} out of range for {n} points")))
        }
        StartRule::FixedIndex(i) => i,
        StartRule::FarthestFromCentroid => centroid_start(latent)?,
    };

    let mut order = Vec::with_capacity(m);
    let mut gaps = Vec::with_capacity(m);
    // Selected points hold -1 so they can never win the argmax again.
    let mut min_d = vec![f32::INFINITY; n];
    let mut next = first;
    let mut gap = FIRST_GAP;
    loop {
        order.push(next);
        gaps.push(gap);
        min_d[next] = -1.0;
        if order.len() == m {
            break;
        }
        let chosen = latent.point(next);
        for (i, d) in min_d.iter_mut().enumerate() {
            if *d >= 0.0 {
                *d = d.min(sq_dist(chosen, latent.point(i)));
            }
        }
        next = argmax(&min_d);
        gap = min_d[next];
    }
    Ok(SelectionResult { order, gaps })
}

/// First `m` entries of a partial Fisher–Yates shuffle of `0..rows`.
pub fn random_order(rows: usize, m: usize, seed: u64) -> Result<Vec<usize>> {
    check_budget(rows, m)?;
    let mut idx: Vec<usize> = (0..rows).collect();
    Rng::new(seed).partial_shuffle(&mut idx, m);
    idx.truncate(m);
    Ok(idx)
}

/// Seeded uniform selection, with gaps measured after the fact.
pub fn random_sample(latent: &LatentSpace, m: usize, seed: u64) -> Result<SelectionResult> {
    let order = random_order(latent.rows(), m, seed)?;
    let gaps = gap_sequence(latent, &order);
    Ok(SelectionResult { order, gaps })
}

/// Squared distance from each point of `order` to its nearest predecessor.
pub fn gap_sequence(latent: &LatentSpace, order: &[usize]) -> Vec<f32> {
    let mut gaps = Vec::with_capacity(order.len());
    for (t, &i) in order.iter().enumerate() {
        let gap = order[..t]
            .iter()
            .map(|&j| sq_dist(latent.point(i), latent.point(j)))
            .fold(FIRST_GAP, f32::min);
        gaps.push(gap);
    }
    gaps
}

/// Largest Euclidean distance from any point to its nearest member of `subset`.
pub fn covering_radius(latent: &LatentSpace, subset: &[usize]) -> Result<f32> {
    if subset.is_empty() {
        return Err(Error::EmptyInput("covering radius of an empty subset".into()));
    }
    if let Some(&bad) = subset.iter().find(|&&i| i >= latent.rows()) {
        return Err(Error::Config(format!(
            "subset index {bad} out of range for {} points",
            latent.rows()
        )));
    }
    let mut worst = 0.0f32;
    for i in 0..latent.rows() {
        let nearest = subset
            .iter()
            .map(|&j| sq_dist(latent.point(i), latent.point(j)))
            .fold(f32::INFINITY, f32::min);
        worst = worst.max(nearest);
    }
    Ok(worst.sqrt())
}

/// Four contiguous chunks of a selection order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchPartition {
    pub quarters: [Vec<usize>; 4],
}

impl BatchPartition {
    /// Quarter number (0..4) of every selected index, keyed by index.
    pub fn quarter_of(&self) -> BTreeMap<usize, usize> {
        self.quarters
            .iter()
            .enumerate()
            .flat_map(|(q, idx)| idx.iter().map(move |&i| (i, q)))
            .collect()
    }
}

/// Chunk sizes `⌊m/4⌋`, with the first `m mod 4` chunks one larger.
pub fn quarter_bounds(m: usize) -> [std::ops::Range<usize>; 4] {
    let (base, extra) = (m / 4, m % 4);
    let mut start = 0;
    std::array::from_fn(|q| {
        let len = base + usize::from(q < extra);
        let r = start..start + len;
        start += len;
        r
    })
}

pub fn partition_quarters(result: &SelectionResult) -> BatchPartition {
    let bounds = quarter_bounds(result.order.len());
    BatchPartition {
        quarters: bounds.map(|r| result.order[r].to_vec()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceReport<L> {
    /// Selected count for every label present in the full dataset.
    pub counts: BTreeMap<L, usize>,
    /// Entropy of the selected label distribution over `ln(#labels)`.
    pub normalized_entropy: f64,
}

/// Label histogram of a selection and how evenly it spreads over the
/// dataset's labels.
pub fn balance_report<L: Ord + Clone>(selection: &[usize], labels: &[L]) -> Result<BalanceReport<L>> {
    let mut counts: BTreeMap<L, usize> = labels.iter().map(|l| (l.clone(), 0)).collect();
    for &i in selection {
        let label = labels.get(i).ok_or_else(|| {
            Error::Dimension(format!(
                "selected index {i} has no label ({} labels)",
                labels.len()
            ))
        })?;
        *counts.get_mut(label).expect("every label is pre-seeded") += 1;
    }
    let total: usize = counts.values().sum();
    let distinct = counts.len();
    let normalized_entropy = if distinct < 2 || total == 0 {
        0.0
    } else {
        let h: f64 = counts
            .values()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / total as f64;
                -p * p.ln()
            })
            .sum();
        (h / (distinct as f64).ln()).clamp(0.0, 1.0)
    };
    Ok(BalanceReport {
        counts,
        normalized_entropy,
    })
}
