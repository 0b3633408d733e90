//! Score-series nonparametric regression:
//! `E[Y | X=Q(u;X)] - E[Y] = sum_j S_j(u;X) LP(j,0;X,Y)`.
//!
//! With the full basis (m = #support(X) - 1) the score functions span every
//! function of X, so the fitted curve equals the groupwise conditional means
//! exactly; with fewer terms it is the least-squares projection. Replacing
//! the response by T_k(Y;Y) gives the conditional score regression whose
//! coefficients are exactly the LP comoments LP(j,k).

use crate::empirical::PairedSample;
use crate::error::{Error, Result};
use crate::scores::ScoreBasis;

/// Which coefficients the fitted curve uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// Every j up to the effective degree.
    All,
    /// AIC on variance-normalized squared coefficients (penalty 2/n).
    Aic,
}

/// A fitted score-series regression curve, piecewise constant in u.
#[derive(Debug, Clone)]
pub struct RegressionFit {
    intercept: f64,
    all_coefficients: Vec<f64>,
    selected: Vec<usize>,
    basis: ScoreBasis,
    response_variance: f64,
    n: usize,
}

impl RegressionFit {
    /// The response mean E\[Y\].
    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    /// LP(j,0;X,Y) for j = 1..=effective_m (selection-independent).
    pub fn all_coefficients(&self) -> &[f64] {
        &self.all_coefficients
    }

    /// Indices kept by the selection rule, ranked by descending squared
    /// coefficient.
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn basis(&self) -> &ScoreBasis {
        &self.basis
    }

    pub fn response_variance(&self) -> f64 {
        self.response_variance
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn eval_cell(&self, ix: usize) -> f64 {
        let mut y = self.intercept;
        for &j in &self.selected {
            y += self.all_coefficients[j - 1] * self.basis.t_at(j, ix);
        }
        y
    }

    /// Fitted value at percentile u.
    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::ProbabilityOutOfRange(u));
        }
        Ok(self.eval_cell(self.basis.segment_of(u)))
    }

    /// Fitted value at a raw x, mapped through the training sample's
    /// mid-distribution; out-of-sample x snaps to the nearest support point
    /// (step-function extension).
    pub fn eval_at_x(&self, x: f64) -> f64 {
        let support = self.basis.support();
        let idx = support.partition_point(|&s| s < x);
        let ix = if idx == 0 {
            0
        } else if idx == support.len() {
            support.len() - 1
        } else if x - support[idx - 1] <= support[idx] - x {
            idx - 1
        } else {
            idx
        };
        self.eval_cell(ix)
    }

    /// Variance explained by the selected terms: sum of squared selected
    /// coefficients (equals var of the fitted curve by orthonormality).
    pub fn fitted_variance(&self) -> f64 {
        self.selected
            .iter()
            .map(|&j| self.all_coefficients[j - 1].powi(2))
            .sum()
    }

    /// R_LP restricted to the selected terms: fitted_variance / var(Y).
    pub fn r_lp_raw(&self) -> f64 {
        if self.response_variance > 0.0 {
            self.fitted_variance() / self.response_variance
        } else {
            0.0
        }
    }
}

/// Fits `E[Y | X=Q(u;X)]` with coefficients `LP(j,0) = E[T_j(X) Y]`.
pub fn fit_regression(pair: &PairedSample, m: usize, selection: Selection) -> Result<RegressionFit> {
    let basis = ScoreBasis::new(pair.x(), m)?;
    let y_mean = pair.y().mean();
    let centered: Vec<f64> = pair.y().values().iter().map(|&y| y - y_mean).collect();
    let fit = fit_with_response(pair, basis, &centered, y_mean, pair.y().variance(), selection);
    Ok(fit)
}

/// Conditional score regression: response T_k(Y;Y), coefficients LP(j,k),
/// intercept 0.
pub fn conditional_score_regression(
    pair: &PairedSample,
    k: usize,
    m: usize,
) -> Result<RegressionFit> {
    let basis_y = ScoreBasis::new(pair.y(), k)?;
    if k > basis_y.effective_m() {
        return Err(Error::IndexOutOfRange {
            index: k,
            max: basis_y.effective_m(),
        });
    }
    let iy = pair.y().obs_support_indices();
    let response: Vec<f64> = (0..pair.n()).map(|i| basis_y.t_at(k, iy[i])).collect();
    let basis_x = ScoreBasis::new(pair.x(), m)?;
    // T_k(Y) has empirical mean 0 and variance 1 by orthonormality
    Ok(fit_with_response(
        pair,
        basis_x,
        &response,
        0.0,
        1.0,
        Selection::All,
    ))
}

fn fit_with_response(
    pair: &PairedSample,
    basis: ScoreBasis,
    centered_response: &[f64],
    intercept: f64,
    response_variance: f64,
    selection: Selection,
) -> RegressionFit {
    let n = pair.n();
    let ix = pair.x().obs_support_indices();
    let all_coefficients: Vec<f64> = (1..=basis.effective_m())
        .map(|j| {
            (0..n)
                .map(|i| basis.t_at(j, ix[i]) * centered_response[i])
                .sum::<f64>()
                / n as f64
        })
        .collect();

    let mut ranked: Vec<usize> = (1..=all_coefficients.len()).collect();
    ranked.sort_by(|&a, &b| {
        let (sa, sb) = (
            all_coefficients[a - 1].powi(2),
            all_coefficients[b - 1].powi(2),
        );
        sb.total_cmp(&sa).then(a.cmp(&b))
    });
    let selected = match selection {
        Selection::All => ranked,
        Selection::Aic => {
            // scale-free: rank LP(j,0)^2 / var(Y) against the 2/n penalty
            if response_variance > 0.0 {
                let penalty = 2.0 / n as f64;
                let mut best = 0.0;
                let mut best_k = 0;
                let mut cum = 0.0;
                for (i, &j) in ranked.iter().enumerate() {
                    cum += all_coefficients[j - 1].powi(2) / response_variance;
                    let aic = cum - penalty * (i + 1) as f64;
                    if aic > best {
                        best = aic;
                        best_k = i + 1;
                    }
                }
                ranked[..best_k].to_vec()
            } else {
                Vec::new()
            }
        }
    };
    RegressionFit {
        intercept,
        all_coefficients,
        selected,
        basis,
        response_variance,
        n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpmoments::lp_comoment_matrix;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn constant_response_is_flat() {
        let x: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let y = vec![3.0; 10];
        let pair = PairedSample::new(x, y).unwrap();
        let fit = fit_regression(&pair, 4, Selection::All).unwrap();
        for &c in fit.all_coefficients() {
            assert!(c.abs() < 1e-12);
        }
        for u in [0.1, 0.5, 0.9] {
            assert!((fit.eval(u).unwrap() - 3.0).abs() < 1e-12);
        }
        // AIC on a zero-variance response selects nothing and stays flat
        let fit = fit_regression(&pair, 4, Selection::Aic).unwrap();
        assert!(fit.selected().is_empty());
        assert!((fit.eval(0.3).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn full_basis_reproduces_identity() {
        let x: Vec<f64> = (1..=12).map(|i| i as f64).collect();
        let pair = PairedSample::new(x.clone(), x.clone()).unwrap();
        let fit = fit_regression(&pair, 11, Selection::All).unwrap();
        let u = pair.x().mid_rank_transform();
        for (i, &xi) in x.iter().enumerate() {
            assert!(
                (fit.eval(u[i]).unwrap() - xi).abs() < 1e-8,
                "x = {xi}: fitted {}",
                fit.eval(u[i]).unwrap()
            );
            assert!((fit.eval_at_x(xi) - xi).abs() < 1e-8);
        }
        assert!((fit.r_lp_raw() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn full_basis_matches_groupwise_means() {
        // small-support X with ties: fitted values equal per-cell means of Y
        let x = vec![1.0, 1.0, 1.0, 2.0, 2.0, 5.0, 5.0, 5.0, 5.0, 9.0];
        let y = vec![3.0, 4.0, 5.0, 10.0, 12.0, -1.0, 0.0, 1.0, 2.0, 7.0];
        let pair = PairedSample::new(x.clone(), y.clone()).unwrap();
        let m = pair.x().support().len() - 1;
        let fit = fit_regression(&pair, m, Selection::All).unwrap();
        for (ix, &xv) in pair.x().support().iter().enumerate() {
            let members: Vec<f64> = x
                .iter()
                .zip(&y)
                .filter(|(&a, _)| a == xv)
                .map(|(_, &b)| b)
                .collect();
            let mean = members.iter().sum::<f64>() / members.len() as f64;
            let _ = ix;
            assert!(
                (fit.eval_at_x(xv) - mean).abs() < 1e-8,
                "cell {xv}: {} vs {mean}",
                fit.eval_at_x(xv)
            );
        }
    }

    #[test]
    fn quadratic_response_is_dominated_by_second_score() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let x: Vec<f64> = (0..400).map(|_| StandardNormal.sample(&mut rng)).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&v| v * v + 0.1 * rng.gen::<f64>())
            .collect();
        let pair = PairedSample::new(x, y).unwrap();
        let fit = fit_regression(&pair, 4, Selection::Aic).unwrap();
        let c = fit.all_coefficients();
        assert!(
            c[1].abs() > c[0].abs(),
            "LP(1,0) = {}, LP(2,0) = {}",
            c[0],
            c[1]
        );
        assert_eq!(fit.selected()[0], 2);
    }

    #[test]
    fn coefficients_agree_with_lp_matrix_zero_order_row() {
        let x = vec![0.3, 1.0, 1.0, 2.2, 5.0, 5.0, 7.7, 9.1, 4.4, 6.2];
        let y = vec![4.0, 2.0, 8.0, 8.0, 1.0, 3.0, 9.0, 2.5, 7.1, 0.2];
        let pair = PairedSample::new(x, y).unwrap();
        let fit = fit_regression(&pair, 4, Selection::All).unwrap();
        let lp = lp_comoment_matrix(&pair, 4, 1).unwrap();
        for j in 1..=lp.m_x() {
            assert!((fit.all_coefficients()[j - 1] - lp.get(j, 0)).abs() < 1e-12);
        }
    }

    #[test]
    fn fitted_mean_and_variance_identities() {
        let x = vec![0.3, 1.0, 1.0, 2.2, 5.0, 5.0, 7.7, 9.1, 4.4, 6.2];
        let y = vec![4.0, 2.0, 8.0, 8.0, 1.0, 3.0, 9.0, 2.5, 7.1, 0.2];
        let pair = PairedSample::new(x.clone(), y).unwrap();
        let fit = fit_regression(&pair, 4, Selection::All).unwrap();
        let fitted: Vec<f64> = x.iter().map(|&v| fit.eval_at_x(v)).collect();
        let mean = fitted.iter().sum::<f64>() / fitted.len() as f64;
        assert!((mean - pair.y().mean()).abs() < 1e-9);
        let var = fitted.iter().map(|&f| (f - mean).powi(2)).sum::<f64>() / fitted.len() as f64;
        assert!((var - fit.fitted_variance()).abs() < 1e-9);
    }

    #[test]
    fn conditional_score_regression_identity() {
        let x: Vec<f64> = (1..=30).map(|i| i as f64).collect();
        let pair = PairedSample::new(x.clone(), x).unwrap();
        let fit = conditional_score_regression(&pair, 1, 4).unwrap();
        assert_eq!(fit.intercept(), 0.0);
        assert!((fit.all_coefficients()[0] - 1.0).abs() < 1e-9);
        for &c in &fit.all_coefficients()[1..] {
            assert!(c.abs() < 1e-9);
        }
    }

    #[test]
    fn independence_gives_flat_conditional_scores() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let x: Vec<f64> = (0..500).map(|_| rng.gen::<f64>()).collect();
        let y: Vec<f64> = (0..500).map(|_| rng.gen::<f64>()).collect();
        let pair = PairedSample::new(x, y).unwrap();
        let fit = conditional_score_regression(&pair, 2, 4).unwrap();
        let bound = 3.0 / (500.0f64).sqrt();
        for u in [0.1, 0.3, 0.5, 0.7, 0.9] {
            assert!(fit.eval(u).unwrap().abs() < 4.0 * bound);
        }
    }

    #[test]
    fn out_of_sample_x_snaps_to_nearest_support() {
        let x = vec![1.0, 2.0, 10.0];
        let y = vec![5.0, 6.0, 30.0];
        let pair = PairedSample::new(x, y).unwrap();
        let fit = fit_regression(&pair, 2, Selection::All).unwrap();
        assert_eq!(fit.eval_at_x(-100.0), fit.eval_at_x(1.0));
        assert_eq!(fit.eval_at_x(100.0), fit.eval_at_x(10.0));
        assert_eq!(fit.eval_at_x(5.9), fit.eval_at_x(2.0));
        assert_eq!(fit.eval_at_x(6.1), fit.eval_at_x(10.0));
    }

    #[test]
    fn degenerate_x_is_an_error() {
        let pair = PairedSample::new(vec![2.0, 2.0], vec![1.0, 3.0]).unwrap();
        assert_eq!(
            fit_regression(&pair, 4, Selection::All).unwrap_err(),
            Error::DegenerateSample
        );
    }
}
