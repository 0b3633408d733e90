//! Empirical distribution machinery: mid-distributions, mid-ranks, quantile
//! functions, and the informative quantile.
//!
//! A [`Sample`] aggregates ties into support points with probability masses;
//! nothing is ever jittered. The mid-distribution `Fmid(x) = F(x) - 0.5 p(x)`
//! places each atom at the middle of its CDF jump; for all-distinct data the
//! per-observation transform reduces to `(rank - 0.5)/n`. All empirical
//! expectations use divisor n.

use crate::error::{Error, Result};

/// One observed variable: raw values plus the aggregated support/mass view.
#[derive(Debug, Clone)]
pub struct Sample {
    values: Vec<f64>,
    support: Vec<f64>,
    masses: Vec<f64>,
    cumulative: Vec<f64>,
    obs_index: Vec<usize>,
}

impl Sample {
    /// Builds a sample from raw observations (ties allowed, order kept).
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        let n = values.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

        let mut support = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        let mut obs_index = vec![0usize; n];
        for &i in &order {
            let v = values[i];
            if support.last().is_some_and(|&last: &f64| last == v) {
                *counts.last_mut().unwrap() += 1;
            } else {
                support.push(v);
                counts.push(1);
            }
            obs_index[i] = support.len() - 1;
        }
        let masses: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        let mut running = 0usize;
        let cumulative: Vec<f64> = counts
            .iter()
            .map(|&c| {
                running += c;
                running as f64 / n as f64
            })
            .collect();
        Ok(Self {
            values,
            support,
            masses,
            cumulative,
            obs_index,
        })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Raw observations in their original order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Sorted distinct values.
    pub fn support(&self) -> &[f64] {
        &self.support
    }

    /// Probability mass p(x) per support point.
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Empirical CDF F(x) at each support point; the last entry is 1.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    /// Support index of each observation, in original order.
    pub fn obs_support_indices(&self) -> &[usize] {
        &self.obs_index
    }

    /// True when the sample has a single support point.
    pub fn is_degenerate(&self) -> bool {
        self.support.len() == 1
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.n() as f64
    }

    /// Population variance (divisor n), consistent with score orthonormality.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / self.n() as f64
    }

    /// Right-continuous empirical CDF at an arbitrary point.
    pub fn cdf(&self, x: f64) -> f64 {
        let idx = self.support.partition_point(|&s| s <= x);
        if idx == 0 {
            0.0
        } else {
            self.cumulative[idx - 1]
        }
    }

    /// Mid-distribution Fmid(x) = F(x) - 0.5 p(x) over the support.
    pub fn mid_distribution(&self) -> MidDistribution {
        let fmid: Vec<f64> = self
            .cumulative
            .iter()
            .zip(&self.masses)
            .map(|(&f, &p)| f - 0.5 * p)
            .collect();
        let sum_p3: f64 = self.masses.iter().map(|&p| p * p * p).sum();
        let var = (1.0 - sum_p3) / 12.0;
        MidDistribution {
            support: self.support.clone(),
            fmid,
            sigma_mid: var.max(0.0).sqrt(),
        }
    }

    /// Per-observation mid-rank transform `U~_i = Fmid(X_i)`, original order.
    pub fn mid_rank_transform(&self) -> Vec<f64> {
        let md = self.mid_distribution();
        self.obs_index.iter().map(|&k| md.fmid[k]).collect()
    }

    /// Support index of the left-continuous inverse CDF at u.
    pub(crate) fn quantile_index(&self, u: f64) -> Result<usize> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::ProbabilityOutOfRange(u));
        }
        let idx = self.cumulative.partition_point(|&f| f < u);
        Ok(idx.min(self.support.len() - 1))
    }

    /// Quantile Q(u) = smallest support value with F(x) >= u.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        Ok(self.support[self.quantile_index(u)?])
    }

    /// Informative quantile QIQ(u) = (Qmid(u) - median) / (2 IQR), where Qmid
    /// is the piecewise-linear mid-quantile.
    pub fn informative_quantile(&self, u: f64) -> Result<f64> {
        self.mid_distribution().informative_quantile(u)
    }
}

/// Mid-distribution values over the support, plus the mid-quantile
/// interpolant built from the knots (Fmid(x_k), x_k).
#[derive(Debug, Clone)]
pub struct MidDistribution {
    support: Vec<f64>,
    fmid: Vec<f64>,
    sigma_mid: f64,
}

impl MidDistribution {
    pub fn support(&self) -> &[f64] {
        &self.support
    }

    /// Fmid at each support point.
    pub fn fmid(&self) -> &[f64] {
        &self.fmid
    }

    /// Standard deviation of Fmid(X) under the empirical law:
    /// sigma^2 = (1/12)(1 - sum p^3).
    pub fn sigma_mid(&self) -> f64 {
        self.sigma_mid
    }

    /// Piecewise-linear mid-quantile through the (Fmid, x) knots, clamped to
    /// the extreme support values outside the knot range.
    pub fn mid_quantile(&self, u: f64) -> f64 {
        let fm = &self.fmid;
        let xs = &self.support;
        if u <= fm[0] {
            return xs[0];
        }
        if u >= fm[fm.len() - 1] {
            return xs[xs.len() - 1];
        }
        let hi = fm.partition_point(|&f| f < u);
        let (f0, f1) = (fm[hi - 1], fm[hi]);
        let (x0, x1) = (xs[hi - 1], xs[hi]);
        x0 + (x1 - x0) * (u - f0) / (f1 - f0)
    }

    /// QIQ(u) = (Qmid(u) - Qmid(1/2)) / (2 (Qmid(3/4) - Qmid(1/4))).
    pub fn informative_quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::ProbabilityOutOfRange(u));
        }
        let iqr = self.mid_quantile(0.75) - self.mid_quantile(0.25);
        if iqr <= 0.0 {
            return Err(Error::DegenerateScale);
        }
        Ok((self.mid_quantile(u) - self.mid_quantile(0.5)) / (2.0 * iqr))
    }
}

/// Two samples sharing a row index.
#[derive(Debug, Clone)]
pub struct PairedSample {
    x: Sample,
    y: Sample,
}

impl PairedSample {
    pub fn new(x_values: Vec<f64>, y_values: Vec<f64>) -> Result<Self> {
        if x_values.len() != y_values.len() {
            return Err(Error::LengthMismatch {
                x: x_values.len(),
                y: y_values.len(),
            });
        }
        Ok(Self {
            x: Sample::new(x_values)?,
            y: Sample::new(y_values)?,
        })
    }

    pub fn from_samples(x: Sample, y: Sample) -> Result<Self> {
        if x.n() != y.n() {
            return Err(Error::LengthMismatch { x: x.n(), y: y.n() });
        }
        Ok(Self { x, y })
    }

    pub fn x(&self) -> &Sample {
        &self.x
    }

    pub fn y(&self) -> &Sample {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.n()
    }
}
