//! Dense row-major matrices and the few reductions the pipeline needs.
//!
//! Storage is `f32`; every sum is accumulated in `f64`.

use crate::{Error, Result};

/// Dense row-major `f32` matrix. Rows are samples, columns are features.
///
/// The constructor rejects non-finite entries, so every `DataMatrix` in
/// circulation is NaN/Inf free.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl DataMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows.saturating_mul(cols),
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Format(format!(
                "non-finite entry at row {}, column {}",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    /// Converts `f64` values to storage precision.
    pub fn from_f64(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&v| v as f32).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f32]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.data[row * self.cols + col]
    }

    /// Copies the given rows, in the given order, into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            if i >= self.rows {
                return Err(Error::Config(format!(
                    "row index {i} out of range for {} rows",
                    self.rows
                )));
            }
            data.extend_from_slice(self.row(i));
        }
        Ok(Self {
            rows: indices.len(),
            cols: self.cols,
            data,
        })
    }

    /// Multiplies every entry by `factor`.
    pub fn scaled(&self, factor: f32) -> Result<Self> {
        Self::new(
            self.rows,
            self.cols,
            self.data.iter().map(|v| v * factor).collect(),
        )
    }
}

/// Square `f64` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("matrix is not square".into()));
        }
        Ok(Self {
            n,
            data: rows.concat(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j).to_bits() == self.get(j, i).to_bits()))
    }
}

/// Squared Euclidean distance between two equally long vectors.
pub fn squared_distance(a: &[f32], b: &[f32]) -> Result<f32> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(sq_dist(a, b))
}

#[inline]
pub(crate) fn sq_dist(a: &[f32], b: &[f32]) -> f32 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum::<f64>() as f32
}

/// Per-column arithmetic mean.
pub fn column_mean(m: &DataMatrix) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Err(Error::EmptyInput("column mean of a matrix with no rows".into()));
    }
    let mut sums = vec![0.0f64; m.cols()];
    for row in m.iter_rows() {
        for (s, &v) in sums.iter_mut().zip(row) {
            *s += v as f64;
        }
    }
    let n = m.rows() as f64;
    Ok(sums.into_iter().map(|s| s / n).collect())
}

/// Sample covariance of the columns, `1/(rows - 1)` normalisation.
///
/// Only the upper triangle is accumulated; the lower one is mirrored so the
/// result is symmetric bit for bit.
pub fn covariance(m: &DataMatrix) -> Result<SquareMatrix> {
    if m.rows() < 2 {
        return Err(Error::InsufficientData(format!(
            "covariance needs at least 2 rows, got {}",
            m.rows()
        )));
    }
    let mean = column_mean(m)?;
    let d = m.cols();
    let mut cov = SquareMatrix::zeros(d);
    let mut centered = vec![0.0f64; d];
    for row in m.iter_rows() {
        for (c, (&v, &mu)) in centered.iter_mut().zip(row.iter().zip(&mean)) {
            *c = v as f64 - mu;
        }
        for i in 0..d {
            for j in i..d {
                cov.data[i * d + j] += centered[i] * centered[j];
            }
        }
    }
    let denom = (m.rows() - 1) as f64;
    for i in 0..d {
        for j in i..d {
            let v = cov.get(i, j) / denom;
            cov.set(i, j, v);
            cov.set(j, i, v);
        }
    }
    Ok(cov)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rng;
    use proptest::prelude::*;

    #[test]
    fn distance_examples() {
        assert_eq!(squared_distance(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 25.0);
        assert_eq!(squared_distance(&[1.0, 2.0, 3.0], &[4.0, 6.0, 3.0]).unwrap(), 25.0);
        assert_eq!(squared_distance(&[1.5, -2.0], &[1.5, -2.0]).unwrap(), 0.0);
        assert!(matches!(
            squared_distance(&[1.0], &[1.0, 2.0]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn rejects_bad_shapes_and_non_finite() {
        assert!(matches!(DataMatrix::new(2, 2, vec![0.0; 3]), Err(Error::Dimension(_))));
        assert!(matches!(
            DataMatrix::new(1, 2, vec![0.0, f32::NAN]),
            Err(Error::Format(_))
        ));
        assert!(DataMatrix::new(1, 1, vec![f32::INFINITY]).is_err());
    }

    #[test]
    fn column_mean_examples() {
        let m = DataMatrix::from_rows(&[[0.0, 0.0], [2.0, 4.0]]).unwrap();
        assert_eq!(column_mean(&m).unwrap(), vec![1.0, 2.0]);

        let single = DataMatrix::from_rows(&[[1.25f32, -3.5, 7.0]]).unwrap();
        assert_eq!(column_mean(&single).unwrap(), vec![1.25, -3.5, 7.0]);

        let c = 0.1f32;
        let constant = DataMatrix::new(100, 3, vec![c; 300]).unwrap();
        for mu in column_mean(&constant).unwrap() {
            assert!((mu - c as f64).abs() < 1e-6);
        }

        assert!(matches!(
            column_mean(&DataMatrix::zeros(0, 3)),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn covariance_examples() {
        let m = DataMatrix::from_rows(&[[-1.0, 0.0], [1.0, 0.0]]).unwrap();
        let c = covariance(&m).unwrap();
        assert_eq!(c, SquareMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 0.0]]).unwrap());

        let same = DataMatrix::from_rows(&[[1.0, 2.0, 3.0]; 4]).unwrap();
        assert!(covariance(&same).unwrap().data.iter().all(|&v| v == 0.0));

        let one = DataMatrix::from_rows(&[[1.0, 2.0]]).unwrap();
        assert!(matches!(covariance(&one), Err(Error::InsufficientData(_))));
    }

    // Straight double loop over column pairs, two passes.
    fn brute_covariance(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = rows.len();
        let d = rows[0].len();
        let mean: Vec<f64> = (0..d)
            .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64)
            .collect();
        let mut out = vec![vec![0.0; d]; d];
        for a in 0..d {
            for b in 0..d {
                let mut s = 0.0;
                for r in rows {
                    s += (r[a] - mean[a]) * (r[b] - mean[b]);
                }
                out[a][b] = s / (n - 1) as f64;
            }
        }
        out
    }

    #[test]
    fn covariance_matches_brute_force() {
        let mut rng = Rng::new(11);
        let rows: Vec<Vec<f32>> = (0..6)
            .map(|_| (0..3).map(|_| (rng.next_f64() * 4.0 - 2.0) as f32).collect())
            .collect();
        let m = DataMatrix::from_rows(&rows).unwrap();
        let wide: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| v as f64).collect())
            .collect();
        let expected = brute_covariance(&wide);
        let c = covariance(&m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((c.get(i, j) - expected[i][j]).abs() < 1e-6);
            }
        }
    }

    proptest! {
        #[test]
        fn distance_is_symmetric(pairs in prop::collection::vec((-1e3f32..1e3, -1e3f32..1e3), 0..16)) {
            let a: Vec<f32> = pairs.iter().map(|p| p.0).collect();
            let b: Vec<f32> = pairs.iter().map(|p| p.1).collect();
            prop_assert_eq!(
                squared_distance(&a, &b).unwrap().to_bits(),
                squared_distance(&b, &a).unwrap().to_bits()
            );
            prop_assert_eq!(squared_distance(&a, &a).unwrap(), 0.0);
        }

        #[test]
        fn covariance_is_bit_symmetric(
            vals in prop::collection::vec(-100f32..100.0, 12..=40)
        ) {
            let rows = vals.len() / 4;
            let m = DataMatrix::new(rows, 4, vals[..rows * 4].to_vec()).unwrap();
            prop_assert!(covariance(&m).unwrap().is_symmetric());
        }
    }
}
