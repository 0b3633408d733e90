//! Orthonormal score functions.
//!
//! For a discrete sample the scores start from the standardized mid-rank
//! `T_1(x) = (Fmid(x) - 0.5) / sigma_mid` and continue by Gram-Schmidt
//! orthonormalization of powers of T_1 under the empirical inner product
//! `<f,g> = sum_x p(x) f(x) g(x)`. The construction is organized as a
//! Stieltjes recurrence (each candidate is T_1 times the last accepted
//! function, fully re-orthogonalized in two passes), which spans the same
//! powers but stays numerically orthonormal to machine precision at high
//! degree. Scores depend on the data only through mid-ranks, so they are
//! invariant under strictly increasing transforms.
//!
//! `S_j(u) = T_j(Q(u))` is the same function in percentile coordinates:
//! piecewise constant on (0,1) with jumps at the cumulative masses. The
//! continuous idealization replaces S_j by orthonormal shifted Legendre
//! polynomials `Leg_j(u) = sqrt(2j+1) P_j(2u-1)`.

use crate::empirical::Sample;
use crate::error::{Error, Result};
use crate::quadrature::legendre_with_derivative;

/// Relative residual below which a Gram-Schmidt candidate is considered
/// linearly dependent and the basis is truncated.
const DROP_TOL: f64 = 1e-8;

/// Orthonormal score functions T_1..T_m of one sample, tabulated over its
/// support.
#[derive(Debug, Clone)]
pub struct ScoreBasis {
    support: Vec<f64>,
    masses: Vec<f64>,
    cumulative: Vec<f64>,
    table: Vec<Vec<f64>>,
}

impl ScoreBasis {
    /// Builds T_1..T_m for the sample; the achieved degree is
    /// `effective_m() <= min(m, #support - 1)`.
    pub fn new(sample: &Sample, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidDegree);
        }
        if sample.is_degenerate() {
            return Err(Error::DegenerateSample);
        }
        let masses = sample.masses().to_vec();
        let md = sample.mid_distribution();
        let sigma = md.sigma_mid();
        let t1: Vec<f64> = md.fmid().iter().map(|&f| (f - 0.5) / sigma).collect();

        let s = masses.len();
        let max_funcs = m.min(s - 1);
        let mut table: Vec<Vec<f64>> = Vec::with_capacity(max_funcs);
        while table.len() < max_funcs {
            let mut cand: Vec<f64> = match table.last() {
                None => t1.clone(),
                Some(prev) => prev.iter().zip(&t1).map(|(&a, &b)| a * b).collect(),
            };
            let norm0 = dot(&masses, &cand, &cand).sqrt();
            if norm0 == 0.0 {
                break;
            }
            cand.iter_mut().for_each(|v| *v /= norm0);
            for _ in 0..2 {
                let mean = cand.iter().zip(&masses).map(|(&c, &p)| c * p).sum::<f64>();
                cand.iter_mut().for_each(|v| *v -= mean);
                for f in &table {
                    let proj = dot(&masses, &cand, f);
                    cand.iter_mut().zip(f).for_each(|(v, &fv)| *v -= proj * fv);
                }
            }
            let norm = dot(&masses, &cand, &cand).sqrt();
            if norm < DROP_TOL {
                // measure cannot support another orthogonal polynomial
                break;
            }
            cand.iter_mut().for_each(|v| *v /= norm);
            table.push(cand);
        }
        if table.is_empty() {
            return Err(Error::DegenerateSample);
        }
        Ok(Self {
            support: sample.support().to_vec(),
            masses,
            cumulative: sample.cumulative().to_vec(),
            table,
        })
    }

    /// Number of orthonormal score functions actually constructed.
    pub fn effective_m(&self) -> usize {
        self.table.len()
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// T_j over the support (index aligned with `support()`).
    pub fn t_values(&self, j: usize) -> Result<&[f64]> {
        self.check_index(j)?;
        Ok(&self.table[j - 1])
    }

    /// T_j at one support index.
    pub fn t_at(&self, j: usize, support_index: usize) -> f64 {
        self.table[j - 1][support_index]
    }

    /// Support cell containing percentile u: first index with F(x) >= u.
    pub fn segment_of(&self, u: f64) -> usize {
        self.cumulative
            .partition_point(|&f| f < u)
            .min(self.support.len() - 1)
    }

    /// S_j(u) = T_j(Q(u)), piecewise constant with jumps at cumulative
    /// masses.
    pub fn eval_s(&self, j: usize, u: f64) -> Result<f64> {
        self.check_index(j)?;
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::ProbabilityOutOfRange(u));
        }
        Ok(self.table[j - 1][self.segment_of(u)])
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.table.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                max: self.table.len(),
            });
        }
        Ok(())
    }
}

fn dot(weights: &[f64], a: &[f64], b: &[f64]) -> f64 {
    weights
        .iter()
        .zip(a.iter().zip(b))
        .map(|(&w, (&x, &y))| w * x * y)
        .sum()
}

/// Orthonormal shifted Legendre polynomials on (0,1):
/// `Leg_j(u) = sqrt(2j+1) P_j(2u-1)`, with `Leg_1(u) = sqrt(12) (u - 1/2)`.
#[derive(Debug, Clone, Copy)]
pub struct LegendreBasis {
    m: usize,
}

impl LegendreBasis {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidDegree);
        }
        Ok(Self { m })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn eval(&self, j: usize, u: f64) -> Result<f64> {
        if j == 0 || j > self.m {
            return Err(Error::IndexOutOfRange { index: j, max: self.m });
        }
        Ok(legendre_shifted(j, u))
    }

    /// Running integral `int_0^u Leg_j(s) ds`, used by comparison-density
    /// CDFs. Closed form via `(2j+1) int P_j = P_{j+1} - P_{j-1}`.
    pub fn integral(&self, j: usize, u: f64) -> Result<f64> {
        if j == 0 || j > self.m {
            return Err(Error::IndexOutOfRange { index: j, max: self.m });
        }
        let w = 2.0 * u - 1.0;
        let (p_next, _) = legendre_with_derivative(j + 1, w);
        let (p_prev, _) = legendre_with_derivative(j - 1, w);
        Ok((p_next - p_prev) / (2.0 * ((2 * j + 1) as f64).sqrt()))
    }
}

/// `sqrt(2j+1) P_j(2u-1)` for j >= 0.
pub fn legendre_shifted(j: usize, u: f64) -> f64 {
    let (p, _) = legendre_with_derivative(j, 2.0 * u - 1.0);
    ((2 * j + 1) as f64).sqrt() * p
}
