//! Synthetic Gaussian mixtures with a built-in majority/minority imbalance.

use std::f64::consts::TAU;

use crate::{DataMatrix, Error, Result, Rng};

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSpec {
    pub center: Vec<f64>,
    pub stddev: f64,
    pub count: usize,
    pub label: u32,
}

/// How the regression target is derived from a sample's position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TargetRule {
    /// Angle of `(x0, x1)` around the origin, in `[0, 2π)`.
    #[default]
    PlanarAngle,
}

impl TargetRule {
    pub fn apply(self, row: &[f32]) -> f32 {
        match self {
            TargetRule::PlanarAngle => {
                let a = (row[1] as f64).atan2(row[0] as f64);
                let a = if a < 0.0 { a + TAU } else { a };
                // Rounding can push values just below 2π up to exactly 2π.
                let a = a as f32;
                if a >= TAU as f32 { 0.0 } else { a }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureConfig {
    pub clusters: Vec<ClusterSpec>,
    pub ambient_dim: usize,
    pub target_rule: TargetRule,
    pub seed: u64,
}

impl MixtureConfig {
    /// Two clusters `separation` apart along the first axis, both centred at
    /// height 3 on the second so the target angle stays far from its 0/2π
    /// seam. The first cluster is the majority (label 0).
    pub fn imbalanced_pair(
        majority: usize,
        minority: usize,
        ambient_dim: usize,
        stddev: f64,
        separation: f64,
        seed: u64,
    ) -> Self {
        let center = |x: f64| {
            let mut c = vec![0.0; ambient_dim];
            if let Some(v) = c.get_mut(0) {
                *v = x;
            }
            if let Some(v) = c.get_mut(1) {
                *v = 3.0;
            }
            c
        };
        let half = separation / 2.0;
        Self {
            clusters: vec![
                ClusterSpec {
                    center: center(-half),
                    stddev,
                    count: majority,
                    label: 0,
                },
                ClusterSpec {
                    center: center(half),
                    stddev,
                    count: minority,
                    label: 1,
                },
            ],
            ambient_dim,
            target_rule: TargetRule::PlanarAngle,
            seed,
        }
    }

    /// 180/20 split in 8 dimensions, stddev 0.5, centres 4 apart.
    pub fn demo(seed: u64) -> Self {
        Self::imbalanced_pair(180, 20, 8, 0.5, 4.0, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ambient_dim < 2 {
            return Err(Error::Config(format!(
                "ambient dimension must be at least 2, got {}",
                self.ambient_dim
            )));
        }
        if self.clusters.is_empty() {
            return Err(Error::Config("mixture has no clusters".into()));
        }
        for (i, c) in self.clusters.iter().enumerate() {
            if c.center.len() != self.ambient_dim {
                return Err(Error::Config(format!(
                    "cluster {i} centre has {} entries, expected {}",
                    c.center.len(),
                    self.ambient_dim
                )));
            }
            if c.count == 0 {
                return Err(Error::Config(format!("cluster {i} has count 0")));
            }
            if !(c.stddev >= 0.0 && c.stddev.is_finite()) || c.center.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("cluster {i} has a non-finite or negative parameter")));
            }
        }
        Ok(())
    }
}

/// Standard normals by the basic Box–Muller transform. Each pair of
/// uniforms yields two normals; the second is handed out on the next call.
#[derive(Debug, Clone)]
pub struct NormalStream {
    rng: Rng,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: Rng::new(seed),
            spare: None,
        }
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - u lies in (0, 1], keeping the logarithm finite.
        let u1 = 1.0 - self.rng.next_f64();
        let u2 = self.rng.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: DataMatrix,
    pub labels: Vec<u32>,
    pub targets: Vec<f32>,
}

/// Draws every cluster in config order, row by row, coordinate by
/// coordinate, from one normal stream.
pub fn generate(config: &MixtureConfig) -> Result<Dataset> {
    config.validate()?;
    let rows: usize = config.clusters.iter().map(|c| c.count).sum();
    let mut normals = NormalStream::new(config.seed);
    let mut data = Vec::with_capacity(rows * config.ambient_dim);
    let mut labels = Vec::with_capacity(rows);
    for cluster in &config.clusters {
        for _ in 0..cluster.count {
            for &mu in &cluster.center {
                data.push((mu + cluster.stddev * normals.sample()) as f32);
            }
            labels.push(cluster.label);
        }
    }
    let features = DataMatrix::new(rows, config.ambient_dim, data)?;
    let targets = features.iter_rows().map(|r| config.target_rule.apply(r)).collect();
    Ok(Dataset {
        features,
        labels,
        targets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_spread_reproduces_centres() {
        let mut cfg = MixtureConfig::imbalanced_pair(3, 2, 4, 0.0, 4.0, 1);
        cfg.clusters[1].center[3] = 0.25;
        let d = generate(&cfg).unwrap();
        for i in 0..3 {
            assert_eq!(d.features.row(i), &[-2.0, 3.0, 0.0, 0.0]);
        }
        for i in 3..5 {
            assert_eq!(d.features.row(i), &[2.0, 3.0, 0.0, 0.25]);
        }
    }

    #[test]
    fn label_histogram_is_exact() {
        let d = generate(&MixtureConfig::imbalanced_pair(90, 10, 3, 0.5, 4.0, 2)).unwrap();
        assert_eq!(d.labels.iter().filter(|&&l| l == 0).count(), 90);
        assert_eq!(d.labels.iter().filter(|&&l| l == 1).count(), 10);
        assert!(d.labels[..90].iter().all(|&l| l == 0));
        assert_eq!(d.targets.len(), 100);
    }

    #[test]
    fn large_cluster_mean_is_close_to_centre() {
        let cfg = MixtureConfig {
            clusters: vec![ClusterSpec {
                center: vec![1.0, -2.0, 0.5],
                stddev: 1.0,
                count: 10_000,
                label: 0,
            }],
            ambient_dim: 3,
            target_rule: TargetRule::PlanarAngle,
            seed: 7,
        };
        let d = generate(&cfg).unwrap();
        let mean = crate::linalg::column_mean(&d.features).unwrap();
        for (m, c) in mean.iter().zip(&cfg.clusters[0].center) {
            assert!((m - c).abs() < 0.05, "{m} vs {c}");
        }
    }

    #[test]
    fn normals_have_unit_variance() {
        let mut s = NormalStream::new(3);
        let xs: Vec<f64> = (0..20_000).map(|_| s.sample()).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        assert!(mean.abs() < 0.03);
        assert!((var - 1.0).abs() < 0.05);
    }

    #[test]
    fn deterministic_and_finite() {
        let a = generate(&MixtureConfig::demo(7)).unwrap();
        assert_eq!(a, generate(&MixtureConfig::demo(7)).unwrap());
        assert_ne!(a, generate(&MixtureConfig::demo(8)).unwrap());
        assert_eq!(a.features.rows(), 200);
        assert_eq!(a.features.cols(), 8);
        assert!(a.targets.iter().all(|t| (0.0..std::f32::consts::TAU).contains(t)));
    }

    #[test]
    fn angle_target() {
        let r = TargetRule::PlanarAngle;
        assert_eq!(r.apply(&[1.0, 0.0]), 0.0);
        assert!((r.apply(&[0.0, 1.0]) - std::f32::consts::FRAC_PI_2).abs() < 1e-7);
        assert!((r.apply(&[0.0, -1.0]) - 3.0 * std::f32::consts::FRAC_PI_2).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut cfg = MixtureConfig::demo(0);
        cfg.clusters[0].count = 0;
        assert!(generate(&cfg).is_err());
        let mut cfg = MixtureConfig::demo(0);
        cfg.clusters[1].center.pop();
        assert!(generate(&cfg).is_err());
        let mut cfg = MixtureConfig::demo(0);
        cfg.clusters[0].stddev = -1.0;
        assert!(generate(&cfg).is_err());
    }
}
