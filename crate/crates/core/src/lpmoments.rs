//! LP comoments, LP score moments, and the correlation measures built from
//! them.
//!
//! For j,k >= 1 the comoment `LP(j,k) = E[T_j(X) T_k(Y)]` is a rank-based
//! cross-moment bounded by 1 in absolute value. The zero-order row and
//! column mix raw values with scores — `LP(j,0) = E[T_j(X) Y]`,
//! `LP(0,k) = E[X T_k(Y)]`, `LP(0,0) = Cov(X,Y)` — and are therefore NOT
//! invariant under monotone transforms, unlike the inner block. That
//! asymmetry is deliberate: the zero-order entries are the coefficients of
//! the score-series regression and of the quantile representation
//! `Q(u) - E[X] = sum_j LP(j;X) S_j(u)`, which yields the variance identity
//! `var(X) = sum_j LP(j;X)^2`.

use crate::empirical::{PairedSample, Sample};
use crate::error::{Error, Result};
use crate::scores::ScoreBasis;

/// Matrix of LP comoments for j = 0..m_x, k = 0..m_y.
#[derive(Debug, Clone)]
pub struct LpMatrix {
    m_x: usize,
    m_y: usize,
    entries: Vec<f64>,
}

impl LpMatrix {
    /// Matrix from precomputed entries (row-major, (m_x+1) x (m_y+1)).
    pub fn from_entries(m_x: usize, m_y: usize, entries: Vec<f64>) -> Self {
        assert_eq!(entries.len(), (m_x + 1) * (m_y + 1));
        Self { m_x, m_y, entries }
    }

    /// Effective degree on the X margin.
    pub fn m_x(&self) -> usize {
        self.m_x
    }

    /// Effective degree on the Y margin.
    pub fn m_y(&self) -> usize {
        self.m_y
    }

    /// LP(j,k), with j = 0..=m_x, k = 0..=m_y.
    pub fn get(&self, j: usize, k: usize) -> f64 {
        assert!(j <= self.m_x && k <= self.m_y);
        self.entries[j * (self.m_y + 1) + k]
    }

    /// The rank-invariant inner block as (j, k, LP(j,k)) with j,k >= 1.
    pub fn inner_entries(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.m_x * self.m_y);
        for j in 1..=self.m_x {
            for k in 1..=self.m_y {
                out.push((j, k, self.get(j, k)));
            }
        }
        out
    }
}

/// LP comoment matrix of a paired sample, building score bases of the
/// requested degrees internally.
pub fn lp_comoment_matrix(pair: &PairedSample, m_x: usize, m_y: usize) -> Result<LpMatrix> {
    let bx = ScoreBasis::new(pair.x(), m_x)?;
    let by = ScoreBasis::new(pair.y(), m_y)?;
    lp_comoment_matrix_with(pair, &bx, &by)
}

/// LP comoment matrix using caller-provided score bases.
pub fn lp_comoment_matrix_with(
    pair: &PairedSample,
    basis_x: &ScoreBasis,
    basis_y: &ScoreBasis,
) -> Result<LpMatrix> {
    let n = pair.n() as f64;
    let (m_x, m_y) = (basis_x.effective_m(), basis_y.effective_m());
    let ix = pair.x().obs_support_indices();
    let iy = pair.y().obs_support_indices();
    let mean_x = pair.x().mean();
    let mean_y = pair.y().mean();
    let xv = pair.x().values();
    let yv = pair.y().values();

    let mut entries = vec![0.0; (m_x + 1) * (m_y + 1)];
    for i in 0..pair.n() {
        let xc = xv[i] - mean_x;
        let yc = yv[i] - mean_y;
        entries[0] += xc * yc;
        for (e, k) in entries[1..=m_y].iter_mut().zip(1..) {
            *e += xc * basis_y.t_at(k, iy[i]);
        }
        for j in 1..=m_x {
            let tj = basis_x.t_at(j, ix[i]);
            entries[j * (m_y + 1)] += tj * yc;
            for k in 1..=m_y {
                entries[j * (m_y + 1) + k] += tj * basis_y.t_at(k, iy[i]);
            }
        }
    }
    entries.iter_mut().for_each(|e| *e /= n);
    Ok(LpMatrix { m_x, m_y, entries })
}

/// LP score moments LP(j;X) = E[X T_j(X)] plus var(X) (divisor n).
#[derive(Debug, Clone)]
pub struct LpMomentVector {
    lp: Vec<f64>,
    variance: f64,
}

impl LpMomentVector {
    /// LP(j;X) for j = 1..=effective_m, in order.
    pub fn lp(&self) -> &[f64] {
        &self.lp
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn effective_m(&self) -> usize {
        self.lp.len()
    }

    /// Variance share not captured by the computed moments,
    /// `1 - sum LP(j)^2 / var`; nonzero when m was truncated below the full
    /// support degree.
    pub fn unexplained_share(&self) -> f64 {
        let explained: f64 = self.lp.iter().map(|&c| c * c).sum();
        (1.0 - explained / self.variance).max(0.0)
    }
}

pub fn lp_score_moments(sample: &Sample, m: usize) -> Result<LpMomentVector> {
    let basis = ScoreBasis::new(sample, m)?;
    let mean = sample.mean();
    let p = basis.masses();
    let xs = basis.support();
    let lp: Vec<f64> = (1..=basis.effective_m())
        .map(|j| {
            let t = basis.t_values(j).unwrap();
            p.iter()
                .zip(xs.iter().zip(t))
                .map(|(&w, (&x, &tv))| w * (x - mean) * tv)
                .sum()
        })
        .collect();
    Ok(LpMomentVector {
        lp,
        variance: sample.variance(),
    })
}

/// Variance shares LP(j)^2 / var(X).
pub fn variance_decomposition(v: &LpMomentVector) -> Result<Vec<f64>> {
    if v.variance <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(v.lp.iter().map(|&c| c * c / v.variance).collect())
}

/// LP tail order: smallest m whose cumulative variance share exceeds 0.95.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TailOrder {
    pub order: usize,
    /// False when the 0.95 share was not reached within effective_m.
    pub resolved: bool,
}

pub fn lp_tail_order(v: &LpMomentVector) -> Result<TailOrder> {
    let shares = variance_decomposition(v)?;
    let mut cum = 0.0;
    for (i, s) in shares.iter().enumerate() {
        cum += s;
        if cum > 0.95 {
            return Ok(TailOrder {
                order: i + 1,
                resolved: true,
            });
        }
    }
    Ok(TailOrder {
        order: shares.len(),
        resolved: false,
    })
}

/// Which conditional the Gini correlation targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GiniDirection {
    YGivenX,
    XGivenY,
}

/// Gini correlation R_GINI(Y|X) = E[T_1(X) Y] / E[T_1(Y) Y] (or the mirror).
pub fn gini_correlation(pair: &PairedSample, direction: GiniDirection) -> Result<f64> {
    let lp = lp_comoment_matrix(pair, 1, 1)?;
    let (num_pair, den_sample) = match direction {
        GiniDirection::YGivenX => (lp.get(1, 0), lp_score_moments(pair.y(), 1)?),
        GiniDirection::XGivenY => (lp.get(0, 1), lp_score_moments(pair.x(), 1)?),
    };
    let den = den_sample.lp()[0];
    if den == 0.0 {
        return Err(Error::DegenerateScale);
    }
    Ok(num_pair / den)
}

/// Extended multiple correlation R_LP = sum_j LP(j,0)^2 / var(Y) over a
/// selected index set. The raw value can exceed 1 from estimation noise;
/// the clamped value is pinned to the unit interval.
#[derive(Debug, Clone, Copy)]
pub struct MultipleCorrelation {
    pub raw: f64,
    pub clamped: f64,
}

pub fn extended_multiple_correlation(
    pair: &PairedSample,
    selected_j: &[usize],
) -> Result<MultipleCorrelation> {
    let var_y = pair.y().variance();
    if var_y <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let m = selected_j.iter().copied().max().unwrap_or(1).max(1);
    let lp = lp_comoment_matrix(pair, m, 1)?;
    let raw = selected_j
        .iter()
        .filter(|&&j| j >= 1 && j <= lp.m_x())
        .map(|&j| {
            let c = lp.get(j, 0);
            c * c
        })
        .sum::<f64>()
        / var_y;
    Ok(MultipleCorrelation {
        raw,
        clamped: raw.clamp(0.0, 1.0),
    })
}

/// Score-series representation of the Pearson correlation:
/// R = sum_j LP(j,0;X,X) LP(j,0;X,Y) / (sigma_X sigma_Y).
#[derive(Debug, Clone)]
pub struct PearsonRepresentation {
    pub pearson_r: f64,
    /// Per-j contribution to R.
    pub terms: Vec<f64>,
    /// Running sums of `terms`; converges to `pearson_r` as j grows.
    pub partial_sums: Vec<f64>,
}

pub fn pearson_representation(pair: &PairedSample, m: usize) -> Result<PearsonRepresentation> {
    let var_x = pair.x().variance();
    let var_y = pair.y().variance();
    if var_x <= 0.0 || var_y <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let scale = (var_x * var_y).sqrt();
    let lp = lp_comoment_matrix(pair, m, 1)?;
    let x_moments = lp_score_moments(pair.x(), m)?;
    let terms: Vec<f64> = (1..=lp.m_x())
        .map(|j| x_moments.lp()[j - 1] * lp.get(j, 0) / scale)
        .collect();
    let mut running = 0.0;
    let partial_sums = terms
        .iter()
        .map(|t| {
            running += t;
            running
        })
        .collect();
    Ok(PearsonRepresentation {
        pearson_r: lp.get(0, 0) / scale,
        terms,
        partial_sums,
    })
}
