//! Estimators: streaming moments, empirical quantiles and tail means, and
//! Freedman–Diaconis histograms.

use serde::{Deserialize, Serialize};

use super::SimulationError;

/// Running count / mean / sum of squared deviations, merged with Chan's
/// pairwise update so that a fixed merge order gives a fixed result.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        let weight = other.count as f64 / n;
        self.mean += delta * weight;
        self.m2 += other.m2 + delta * delta * self.count as f64 * weight;
        self.count += other.count;
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

/// Order-statistic quantile with linear interpolation: position
/// `h = (n - 1) * level` (0-based), value `x[floor h] + frac(h) * (x[floor h + 1] - x[floor h])`.
pub fn empirical_quantile(sorted: &[f64], level: f64) -> Result<f64, SimulationError> {
    if sorted.is_empty() {
        return Err(SimulationError::EmptySample);
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(SimulationError::Level(level));
    }
    Ok(interpolate(sorted, (sorted.len() - 1) as f64 * level))
}

fn interpolate(sorted: &[f64], h: f64) -> f64 {
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 >= sorted.len() || frac == 0.0 {
        sorted[lo.min(sorted.len() - 1)]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Number of largest order statistics needed to evaluate the quantile and
/// the tail mean at `level` on a sample of size `n`.
pub fn tail_size(n: u64, level: f64) -> usize {
    let lo = ((n - 1) as f64 * level).floor() as u64;
    (n - lo).min(n) as usize
}

/// The `m` largest values of a sample of size `n`, ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct UpperTail {
    pub n_total: u64,
    pub values: Vec<f64>,
}

impl UpperTail {
    pub fn from_sample(sample: &[f64], level: f64) -> Self {
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        let m = tail_size(sorted.len() as u64, level);
        Self {
            n_total: sorted.len() as u64,
            values: sorted[sorted.len() - m..].to_vec(),
        }
    }

    /// Same interpolation rule as [`empirical_quantile`] on the full sample.
    pub fn quantile(&self, level: f64) -> Result<f64, SimulationError> {
        if self.values.is_empty() {
            return Err(SimulationError::EmptySample);
        }
        if !(level > 0.0 && level < 1.0) {
            return Err(SimulationError::Level(level));
        }
        let h = (self.n_total - 1) as f64 * level;
        let offset = (self.n_total - self.values.len() as u64) as f64;
        if h < offset {
            return Err(SimulationError::TailTooShort);
        }
        Ok(interpolate(&self.values, h - offset))
    }

    /// Mean of the values at or above the `level` quantile, with their count.
    pub fn expected_shortfall(&self, level: f64) -> Result<(f64, usize), SimulationError> {
        let var = self.quantile(level)?;
        let start = self.values.partition_point(|x| *x < var);
        let exceed = &self.values[start..];
        let mean = exceed.iter().sum::<f64>() / exceed.len() as f64;
        Ok((mean.max(var), exceed.len()))
    }
}

/// Keeps the `m` largest values of `values` (in arbitrary order).
pub fn retain_largest(values: &mut Vec<f64>, m: usize) {
    if m == 0 {
        values.clear();
    } else if values.len() > m {
        let cut = values.len() - m;
        values.select_nth_unstable_by(cut, f64::total_cmp);
        values.drain(..cut);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub label: String,
    /// `counts.len() + 1` edges.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

/// Upper bound on bins when heavy tails inflate the data range.
pub const MAX_BINS: usize = 10_000;

impl Histogram {
    /// Freedman–Diaconis bin width `2 IQR n^{-1/3}` over `[min, max]`.
    pub fn freedman_diaconis(label: impl Into<String>, values: &[f64]) -> Result<Self, SimulationError> {
        if values.is_empty() {
            return Err(SimulationError::EmptySample);
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
        let iqr = empirical_quantile(&sorted, 0.75)? - empirical_quantile(&sorted, 0.25)?;
        let width = 2.0 * iqr / (sorted.len() as f64).cbrt();
        let bins = if max > min && width > 0.0 {
            (((max - min) / width).ceil() as usize).clamp(1, MAX_BINS)
        } else {
            1
        };
        let span = if max > min { max - min } else { 1.0 };
        let edges: Vec<f64> = (0..=bins)
            .map(|b| if b == bins { min + span } else { min + span * b as f64 / bins as f64 })
            .collect();
        let mut counts = vec![0u64; bins];
        for x in &sorted {
            let b = (((x - min) / span) * bins as f64).floor() as usize;
            counts[b.min(bins - 1)] += 1;
        }
        Ok(Self {
            label: label.into(),
            edges,
            counts,
        })
    }
}
