//! k-NN regression learning curves over growing labeled subsets.

use crate::autoencoder::LatentSpace;
use crate::linalg::sq_dist;
use crate::selection::{farthest_point_sample, random_order, StartRule};
use crate::{DataMatrix, Error, Result, Rng};

/// Share of rows held out for testing.
pub const TEST_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet {
    pub features: DataMatrix,
    pub targets: Vec<f32>,
}

impl LabeledSet {
    pub fn new(features: DataMatrix, targets: Vec<f32>) -> Result<Self> {
        if targets.len() != features.rows() {
            return Err(Error::Dimension(format!(
                "{} targets for {} rows",
                targets.len(),
                features.rows()
            )));
        }
        if targets.iter().any(|t| !t.is_finite()) {
            return Err(Error::Format("non-finite target".into()));
        }
        Ok(Self { features, targets })
    }

    pub fn rows(&self) -> usize {
        self.features.rows()
    }

    fn subset(&self, idx: &[usize]) -> Result<Self> {
        Ok(Self {
            features: self.features.select_rows(idx)?,
            targets: idx.iter().map(|&i| self.targets[i]).collect(),
        })
    }
}

/// Mean target of the `k` rows nearest to `query`; equal distances prefer
/// the earlier row.
pub fn knn_predict(train: &LabeledSet, query: &[f32], k: usize) -> Result<f64> {
    if train.rows() == 0 {
        return Err(Error::EmptyInput("k-NN over an empty training set".into()));
    }
    if k == 0 || k > train.rows() {
        return Err(Error::Config(format!(
            "k = {k} outside 1..={} training rows",
            train.rows()
        )));
    }
    if query.len() != train.features.cols() {
        return Err(Error::Dimension(format!(
            "query has {} features, training set {}",
            query.len(),
            train.features.cols()
        )));
    }
    let dists: Vec<f32> = train
        .features
        .iter_rows()
        .map(|row| sq_dist(row, query))
        .collect();
    let mut idx: Vec<usize> = (0..train.rows()).collect();
    // Stable, so ties stay in index order.
    idx.sort_by(|&a, &b| dists[a].total_cmp(&dists[b]));
    let sum: f64 = idx[..k].iter().map(|&i| train.targets[i] as f64).sum();
    Ok(sum / k as f64)
}

fn check_indices(idx: &[usize], rows: usize, what: &str) -> Result<()> {
    match idx.iter().find(|&&i| i >= rows) {
        Some(bad) => Err(Error::Config(format!(
            "{what} index {bad} out of range for {rows} rows"
        ))),
        None => Ok(()),
    }
}

/// Mean absolute error on `test_idx` of a k-NN model fitted on `train_idx`.
pub fn evaluate_subset(all: &LabeledSet, train_idx: &[usize], test_idx: &[usize], k: usize) -> Result<f64> {
    check_indices(train_idx, all.rows(), "training")?;
    check_indices(test_idx, all.rows(), "test")?;
    if test_idx.is_empty() {
        return Err(Error::EmptyInput("no test rows".into()));
    }
    let mut train_sorted = train_idx.to_vec();
    train_sorted.sort_unstable();
    train_sorted.dedup();
    if let Some(&i) = test_idx.iter().find(|i| train_sorted.binary_search(i).is_ok()) {
        return Err(Error::Config(format!("row {i} is in both training and test sets")));
    }
    // Sorting makes the model independent of selection order.
    let train = all.subset(&train_sorted)?;
    let mut total = 0.0f64;
    for &i in test_idx {
        let pred = knn_predict(&train, all.features.row(i), k)?;
        total += (pred - all.targets[i] as f64).abs();
    }
    Ok(total / test_idx.len() as f64)
}

/// Seeded Fisher–Yates split into `(pool, test)`, each sorted ascending.
pub fn train_test_split(rows: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let n_test = ((rows as f64 * TEST_FRACTION).round() as usize).max(1);
    if rows < 2 || n_test >= rows {
        return Err(Error::InsufficientData(format!(
            "cannot split {rows} rows into training pool and test set"
        )));
    }
    let mut idx: Vec<usize> = (0..rows).collect();
    Rng::new(seed).shuffle(&mut idx);
    let mut test = idx[..n_test].to_vec();
    let mut pool = idx[n_test..].to_vec();
    test.sort_unstable();
    pool.sort_unstable();
    Ok((pool, test))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Fps(StartRule),
    Random,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Fps(_) => "fps",
            Strategy::Random => "random",
        }
    }

    /// Orders every row of `latent` for labeling.
    pub fn rank(&self, latent: &LatentSpace, seed: u64) -> Result<Vec<usize>> {
        match *self {
            Strategy::Fps(start) => Ok(farthest_point_sample(latent, latent.rows(), start)?.order),
            Strategy::Random => random_order(latent.rows(), latent.rows(), seed),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    pub strategy: String,
    /// `(fraction, mae)`, fractions strictly increasing.
    pub points: Vec<(f64, f64)>,
}

pub fn validate_fractions(fractions: &[f64]) -> Result<()> {
    if fractions.is_empty() {
        return Err(Error::Config("no fractions given".into()));
    }
    if fractions.iter().any(|&f| !(f > 0.0 && f <= 1.0)) {
        return Err(Error::Config(format!("fractions {fractions:?} must lie in (0, 1]")));
    }
    if fractions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!("fractions {fractions:?} must be strictly increasing")));
    }
    Ok(())
}

/// `⌈f·pool⌉`, tolerant of representation error in `f`.
pub fn budget_for(fraction: f64, pool: usize) -> usize {
    let exact = fraction * pool as f64;
    ((exact - 1e-9).ceil() as usize).clamp(1, pool)
}

/// Learning curve of one strategy.
///
/// The split uses `SplitMix64(seed)`; the random strategy draws from
/// `seed + 1` so it does not replay the split permutation. The strategy
/// ranks the whole pool once and each fraction takes a prefix.
pub fn learning_curve(
    all: &LabeledSet,
    latent: &LatentSpace,
    strategy: Strategy,
    fractions: &[f64],
    seed: u64,
    k: usize,
) -> Result<LearningCurve> {
    validate_fractions(fractions)?;
    if latent.rows() != all.rows() {
        return Err(Error::Dimension(format!(
            "{} latent rows for {} labeled rows",
            latent.rows(),
            all.rows()
        )));
    }
    let (pool, test) = train_test_split(all.rows(), seed)?;
    let pool_latent = LatentSpace::new(latent.embeddings.select_rows(&pool)?, latent.encoder_fingerprint);
    let ranked: Vec<usize> = strategy
        .rank(&pool_latent, seed.wrapping_add(1))?
        .into_iter()
        .map(|p| pool[p])
        .collect();
    let points = fractions
        .iter()
        .map(|&f| {
            let take = budget_for(f, pool.len());
            Ok((f, evaluate_subset(all, &ranked[..take], &test, k)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LearningCurve {
        strategy: strategy.name().to_string(),
        points,
    })
}
