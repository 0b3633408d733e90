//! Comparison distributions and densities against a parametric start, and
//! the estimators built on them.
//!
//! For a start distribution G, the comparison density
//! `d(u) = f(Q_G(u)) / g(Q_G(u))` is the density of the rank-G transform
//! `U = G(X)`; it equals 1 exactly when the start fits. The Neyman
//! orthogonal-series estimator is `dhat(u) = 1 + sum_h theta_h Leg_h(u)`
//! with `theta_h = (1/n) sum_i Leg_h(G(X_i))` and AIC index selection, and
//! it induces the marginal density estimate `fhat(x) = g(x) dhat(G(x))`.
//!
//! For binary Y the comparison density of the class-1 conditional against
//! the pooled distribution is estimated by logistic regression on score
//! functions: `log odds(P[Y=1 | X=Q(u;X)]) = beta_0 + sum_j beta_j S_j(u)`,
//! fitted by iteratively reweighted least squares.

use crate::empirical::{PairedSample, Sample};
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_unit;
use crate::scores::{legendre_shifted, LegendreBasis, ScoreBasis};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

/// A fitted start distribution G: cdf, density, and quantile.
pub trait ParametricStart {
    fn cdf(&self, x: f64) -> f64;
    fn pdf(&self, x: f64) -> f64;
    fn quantile(&self, u: f64) -> f64;
    /// Human-readable description for reports.
    fn label(&self) -> String;
}

/// Normal start fitted by sample mean and standard deviation (divisor n).
#[derive(Debug, Clone)]
pub struct NormalStart {
    mean: f64,
    sd: f64,
    dist: Normal,
}

impl NormalStart {
    pub fn new(mean: f64, sd: f64) -> Result<Self> {
        if !sd.is_finite() || sd <= 0.0 {
            return Err(Error::DegenerateScale);
        }
        Ok(Self {
            mean,
            sd,
            dist: Normal::new(mean, sd).expect("finite parameters"),
        })
    }

    pub fn fit(sample: &Sample) -> Result<Self> {
        Self::new(sample.mean(), sample.variance().sqrt())
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }
}

impl ParametricStart for NormalStart {
    fn cdf(&self, x: f64) -> f64 {
        self.dist.cdf(x)
    }

    fn pdf(&self, x: f64) -> f64 {
        self.dist.pdf(x)
    }

    fn quantile(&self, u: f64) -> f64 {
        // one Newton polish over the library inverse tightens cdf(quantile(u))
        // to u within ~1e-14
        let q = self.dist.inverse_cdf(u);
        let density = self.dist.pdf(q);
        if density > 0.0 {
            q - (self.dist.cdf(q) - u) / density
        } else {
            q
        }
    }

    fn label(&self) -> String {
        format!("normal(mean={:.6}, sd={:.6})", self.mean, self.sd)
    }
}

/// Uniform start; the fit widens min/max by range/n on each side so no data
/// point lands on cdf 0 or 1.
#[derive(Debug, Clone)]
pub struct UniformStart {
    min: f64,
    max: f64,
}

impl UniformStart {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !min.is_finite() || !max.is_finite() || max <= min {
            return Err(Error::DegenerateScale);
        }
        Ok(Self { min, max })
    }

    pub fn fit(sample: &Sample) -> Result<Self> {
        let lo = sample.support()[0];
        let hi = sample.support()[sample.support().len() - 1];
        let pad = (hi - lo) / sample.n() as f64;
        Self::new(lo - pad, hi + pad)
    }
}

impl ParametricStart for UniformStart {
    fn cdf(&self, x: f64) -> f64 {
        ((x - self.min) / (self.max - self.min)).clamp(0.0, 1.0)
    }

    fn pdf(&self, x: f64) -> f64 {
        if x >= self.min && x <= self.max {
            1.0 / (self.max - self.min)
        } else {
            0.0
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        self.min + u * (self.max - self.min)
    }

    fn label(&self) -> String {
        format!("uniform(min={:.6}, max={:.6})", self.min, self.max)
    }
}

/// Exponential start fitted by the method of moments (rate = 1/mean).
#[derive(Debug, Clone)]
pub struct ExponentialStart {
    rate: f64,
}

impl ExponentialStart {
    pub fn new(rate: f64) -> Result<Self> {
        if !rate.is_finite() || rate <= 0.0 {
            return Err(Error::DegenerateScale);
        }
        Ok(Self { rate })
    }

    pub fn fit(sample: &Sample) -> Result<Self> {
        let mean = sample.mean();
        if !mean.is_finite() || mean <= 0.0 {
            return Err(Error::DegenerateScale);
        }
        Self::new(1.0 / mean)
    }
}

impl ParametricStart for ExponentialStart {
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-self.rate * x).exp_m1()
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            self.rate * (-self.rate * x).exp()
        }
    }

    fn quantile(&self, u: f64) -> f64 {
        -(-u).ln_1p() / self.rate
    }

    fn label(&self) -> String {
        format!("exponential(rate={:.6})", self.rate)
    }
}

/// Start family tag used by configuration surfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StartFamily {
    Normal,
    Uniform,
    Exponential,
}

impl StartFamily {
    pub fn fit(&self, sample: &Sample) -> Result<Box<dyn ParametricStart>> {
        Ok(match self {
            StartFamily::Normal => Box::new(NormalStart::fit(sample)?),
            StartFamily::Uniform => Box::new(UniformStart::fit(sample)?),
            StartFamily::Exponential => Box::new(ExponentialStart::fit(sample)?),
        })
    }
}

/// Comparison distribution `D(u; G, F) = F(Q_G(u))`: the empirical CDF seen
/// through the start's quantile function.
pub fn comparison_distribution(
    sample: &Sample,
    start: &dyn ParametricStart,
    u: f64,
) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::ProbabilityOutOfRange(u));
    }
    Ok(sample.cdf(start.quantile(u)))
}

/// Neyman orthogonal-series comparison-density fit.
pub struct ComparisonFit {
    start: Box<dyn ParametricStart>,
    theta: Vec<f64>,
    selected: Vec<usize>,
    n: usize,
    warnings: Vec<String>,
}

impl ComparisonFit {
    /// Assembles a fit from a start and a fixed coefficient/selection pair;
    /// `neyman_fit` is the estimating constructor.
    pub fn with_selection(
        start: Box<dyn ParametricStart>,
        theta: Vec<f64>,
        selected: Vec<usize>,
        n: usize,
    ) -> Self {
        assert!(selected.iter().all(|&h| h >= 1 && h <= theta.len()));
        Self {
            start,
            theta,
            selected,
            n,
            warnings: Vec::new(),
        }
    }

    /// All coefficients theta_h, h = 1..=m.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// AIC-selected indices h, ranked by descending theta^2.
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn start(&self) -> &dyn ParametricStart {
        self.start.as_ref()
    }

    /// dhat(u) = 1 + sum over the selected h of theta_h Leg_h(u). Integrates
    /// to one exactly; may go negative (reported raw).
    pub fn dhat(&self, u: f64) -> f64 {
        let mut d = 1.0;
        for &h in &self.selected {
            d += self.theta[h - 1] * legendre_shifted(h, u);
        }
        d
    }

    /// Running integral `int_0^u dhat`; the comparison-distribution estimate.
    pub fn dhat_cdf(&self, u: f64) -> f64 {
        let basis = LegendreBasis::new(self.theta.len().max(1)).unwrap();
        let mut total = u;
        for &h in &self.selected {
            total += self.theta[h - 1] * basis.integral(h, u).unwrap();
        }
        total
    }

    /// max(dhat, 0) renormalized to integrate to one (post-process for
    /// display; the raw series is the default report).
    pub fn dhat_nonneg(&self, u: f64) -> f64 {
        let mass = self.nonneg_mass();
        if mass > 0.0 {
            self.dhat(u).max(0.0) / mass
        } else {
            1.0
        }
    }

    fn nonneg_mass(&self) -> f64 {
        gauss_legendre_unit(256)
            .iter()
            .map(|&(u, w)| w * self.dhat(u).max(0.0))
            .sum()
    }

    /// Induced marginal density estimate `fhat(x) = g(x) dhat(G(x))`; zero
    /// outside the start's support.
    pub fn density_at(&self, x: f64) -> f64 {
        let g = self.start.pdf(x);
        if g <= 0.0 {
            return 0.0;
        }
        g * self.dhat(self.start.cdf(x))
    }

    /// `int (dhat - 1)^2 = sum of selected theta^2`: the fitted estimate of
    /// the start's misfit.
    pub fn integral_sq_dev(&self) -> f64 {
        self.selected
            .iter()
            .map(|&h| self.theta[h - 1] * self.theta[h - 1])
            .sum()
    }
}

impl std::fmt::Debug for ComparisonFit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ComparisonFit")
            .field("start", &self.start.label())
            .field("theta", &self.theta)
            .field("selected", &self.selected)
            .field("n", &self.n)
            .finish()
    }
}

/// Fits theta_h = mean of Leg_h(G(X_i)) for h = 1..=m and keeps the AIC
/// prefix of the ranked squared coefficients (possibly empty).
pub fn neyman_fit(
    sample: &Sample,
    start: Box<dyn ParametricStart>,
    m: usize,
) -> Result<ComparisonFit> {
    if m == 0 {
        return Err(Error::InvalidDegree);
    }
    let n = sample.n();
    let mut warnings = Vec::new();
    if n < 10 {
        warnings.push(format!("small sample (n = {n}); coefficients are noisy"));
    }
    let mut u_values = Vec::with_capacity(n);
    for &x in sample.values() {
        let u = start.cdf(x);
        if u <= 0.0 || u >= 1.0 {
            return Err(Error::StartSupportMismatch(x));
        }
        u_values.push(u);
    }
    let theta: Vec<f64> = (1..=m)
        .map(|h| u_values.iter().map(|&u| legendre_shifted(h, u)).sum::<f64>() / n as f64)
        .collect();

    // same AIC form as comoment selection: rank squared coefficients, keep
    // the prefix maximizing sum - 2k/n
    let mut order: Vec<usize> = (1..=m).collect();
    order.sort_by(|&a, &b| {
        let (sa, sb) = (theta[a - 1] * theta[a - 1], theta[b - 1] * theta[b - 1]);
        sb.total_cmp(&sa).then(a.cmp(&b))
    });
    let penalty = 2.0 / n as f64;
    let mut best = 0.0;
    let mut best_k = 0;
    let mut cum = 0.0;
    for (i, &h) in order.iter().enumerate() {
        cum += theta[h - 1] * theta[h - 1];
        let aic = cum - penalty * (i + 1) as f64;
        if aic > best {
            best = aic;
            best_k = i + 1;
        }
    }
    let selected = order[..best_k].to_vec();
    Ok(ComparisonFit {
        start,
        theta,
        selected,
        n,
        warnings,
    })
}

/// Logistic-regression comparison-density fit for binary Y.
#[derive(Debug)]
pub struct LogisticComparisonFit {
    beta: Vec<f64>,
    basis: ScoreBasis,
    prior1: f64,
    class_values: (f64, f64),
    iterations: usize,
    warnings: Vec<String>,
}

impl LogisticComparisonFit {
    /// (beta_0, beta_1, ..., beta_m).
    pub fn coefficients(&self) -> &[f64] {
        &self.beta
    }

    /// P[Y = upper class].
    pub fn prior1(&self) -> f64 {
        self.prior1
    }

    /// The two response values (lower mapped to 0, upper to 1).
    pub fn class_values(&self) -> (f64, f64) {
        self.class_values
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// p(u) = P[Y=1 | X=Q(u;X)] from the fitted score-series log-odds.
    pub fn p_at(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::ProbabilityOutOfRange(u));
        }
        let ix = self.basis.segment_of(u);
        let mut eta = self.beta[0];
        for j in 1..self.beta.len() {
            eta += self.beta[j] * self.basis.t_at(j, ix);
        }
        Ok(sigmoid(eta))
    }

    /// dhat(u) = p(u) / P[Y=1]: comparison density of the class-1
    /// conditional against the pooled distribution.
    pub fn dhat(&self, u: f64) -> Result<f64> {
        Ok(self.p_at(u)? / self.prior1)
    }
}

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^eta) without overflow.
fn softplus(eta: f64) -> f64 {
    if eta > 0.0 {
        eta + (-eta).exp().ln_1p()
    } else {
        eta.exp().ln_1p()
    }
}

const IRLS_MAX_ITER: usize = 100;
const IRLS_TOL: f64 = 1e-8;

/// Fits `log odds(P[Y=1 | X=Q(u;X)]) = beta_0 + sum_j beta_j S_j(u;X)` by
/// Newton/IRLS on the logistic log-likelihood.
pub fn logistic_comparison_fit(pair: &PairedSample, m: usize) -> Result<LogisticComparisonFit> {
    let y_support = pair.y().support();
    if y_support.len() != 2 {
        return Err(Error::NotBinary);
    }
    let upper = y_support[1];
    let y01: Vec<f64> = pair
        .y()
        .values()
        .iter()
        .map(|&v| if v == upper { 1.0 } else { 0.0 })
        .collect();
    let basis = ScoreBasis::new(pair.x(), m)?;
    let d = basis.effective_m() + 1;
    let ix = pair.x().obs_support_indices();
    let n = pair.n();
    let row = |i: usize, j: usize| -> f64 {
        if j == 0 {
            1.0
        } else {
            basis.t_at(j, ix[i])
        }
    };

    let mut beta = vec![0.0; d];
    let mut eta: Vec<f64> = vec![0.0; n];
    let mut iterations = 0;
    loop {
        let mu: Vec<f64> = eta.iter().map(|&e| sigmoid(e)).collect();
        let mut gradient = vec![0.0; d];
        for (i, (&y, &m)) in y01.iter().zip(&mu).enumerate() {
            let r = y - m;
            for (j, g) in gradient.iter_mut().enumerate() {
                *g += r * row(i, j);
            }
        }
        // score equations scaled per observation
        let gnorm = gradient.iter().fold(0.0f64, |a, &g| a.max(g.abs())) / n as f64;
        if gnorm < IRLS_TOL {
            break;
        }
        if iterations >= IRLS_MAX_ITER {
            return Err(Error::NonConvergence {
                what: "logistic IRLS",
                iterations,
                residual: gnorm,
            });
        }
        if beta.iter().any(|&b: &f64| b.abs() > 1e8) {
            return Err(Error::PerfectSeparation(format!(
                "coefficients diverged (|beta| > 1e8) with gradient norm {gnorm:.3e}"
            )));
        }
        let mut hessian = vec![0.0; d * d];
        for (i, &m) in mu.iter().enumerate() {
            let w = m * (1.0 - m);
            for a in 0..d {
                let ra = row(i, a);
                for b in 0..=a {
                    hessian[a * d + b] += w * ra * row(i, b);
                }
            }
        }
        for a in 0..d {
            for b in (a + 1)..d {
                hessian[a * d + b] = hessian[b * d + a];
            }
        }
        let Some(step) = crate::linalg::cholesky_solve(d, &hessian, &gradient) else {
            // separated classes drive every weight mu(1-mu) to zero; once the
            // score equations are nearly solved this is the saturated MLE
            // limit, otherwise no usable fit exists
            if gnorm < 1e-6 {
                break;
            }
            return Err(Error::PerfectSeparation(format!(
                "information matrix collapsed at iteration {iterations} (gradient norm {gnorm:.3e}); \
                 fitted probabilities are numerically 0 or 1"
            )));
        };
        // backtracking on the negative log-likelihood keeps Newton stable
        // when weights are extreme
        let nll = |etas: &[f64]| -> f64 {
            etas.iter()
                .zip(&y01)
                .map(|(&e, &y)| softplus(e) - y * e)
                .sum()
        };
        let nll0 = nll(&eta);
        let mut t = 1.0;
        loop {
            let cand_beta: Vec<f64> = beta.iter().zip(&step).map(|(&b, &s)| b + t * s).collect();
            let cand_eta: Vec<f64> = (0..n)
                .map(|i| (0..d).map(|j| cand_beta[j] * row(i, j)).sum())
                .collect();
            if nll(&cand_eta) <= nll0 || t < 1e-8 {
                beta = cand_beta;
                eta = cand_eta;
                break;
            }
            t *= 0.5;
        }
        iterations += 1;
    }

    let mut warnings = Vec::new();
    let max_eta = eta.iter().fold(0.0f64, |a, &e| a.max(e.abs()));
    if max_eta > 30.0 {
        warnings.push(
            "fitted probabilities numerically 0 or 1 occurred (separated classes)".to_string(),
        );
    }
    let prior1 = y01.iter().sum::<f64>() / n as f64;
    Ok(LogisticComparisonFit {
        beta,
        basis,
        prior1,
        class_values: (y_support[0], upper),
        iterations,
        warnings,
    })
}

/// odds(p) = p / (1 - p); infinite at p = 1.
pub fn odds(p: f64) -> f64 {
    p / (1.0 - p)
}

/// Odds form of Bayes theorem: odds of `P[Y=1 | X=Q(u;X)]` given the
/// conditional-probability curve p(u).
pub fn bayes_odds<F: Fn(f64) -> f64>(p_u: F, u: f64) -> f64 {
    odds(p_u(u))
}

/// Comparison probability `Comp[Y=y | X=x] = P(Y=y | X=x) / P(Y=y)`; equals
/// the normed joint probability dep(x,y) on discrete data.
pub fn comparison_probability(pair: &PairedSample, x: f64, y: f64) -> Result<f64> {
    let n = pair.n() as f64;
    let xv = pair.x().values();
    let yv = pair.y().values();
    let mut nx = 0.0;
    let mut ny = 0.0;
    let mut nxy = 0.0;
    for i in 0..pair.n() {
        let mx = xv[i] == x;
        let my = yv[i] == y;
        if mx {
            nx += 1.0;
        }
        if my {
            ny += 1.0;
        }
        if mx && my {
            nxy += 1.0;
        }
    }
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::ZeroMassCell);
    }
    Ok((nxy / nx) / (ny / n))
}

/// Accept-reject goodness-of-fit diagnostic for a comparison-density fit.
///
/// Draws from the clipped dhat by rejection with the flat start density as
/// envelope (bound taken on a 1024-point grid) and compares the KS distance
/// of the simulated rank-G sample against the fitted comparison distribution
/// with the observed one. A simulated KS in the same range as the observed
/// supports the fit; this is a diagnostic, not a formal test.
#[derive(Debug, Clone, Copy)]
pub struct GofDiagnostic {
    pub observed_ks: f64,
    pub simulated_ks: f64,
    /// Envelope bound M = max dhat on the grid.
    pub envelope: f64,
    pub n_sim: usize,
    pub acceptance_rate: f64,
}

pub fn gof_accept_reject(
    fit: &ComparisonFit,
    sample: &Sample,
    seed: u64,
    n_sim: usize,
) -> GofDiagnostic {
    const GRID: usize = 1024;
    let envelope = (0..GRID)
        .map(|i| fit.dhat((i as f64 + 0.5) / GRID as f64).max(0.0))
        .fold(0.0f64, f64::max)
        .max(1e-12);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut accepted = Vec::with_capacity(n_sim);
    let mut proposals = 0usize;
    while accepted.len() < n_sim && proposals < n_sim * 10_000 {
        let u: f64 = rng.gen();
        proposals += 1;
        if rng.gen::<f64>() * envelope <= fit.dhat(u).max(0.0) {
            accepted.push(u);
        }
    }
    let acceptance_rate = accepted.len() as f64 / proposals.max(1) as f64;

    let observed: Vec<f64> = sample.values().iter().map(|&x| fit.start().cdf(x)).collect();
    GofDiagnostic {
        observed_ks: ks_distance(&observed, fit),
        simulated_ks: ks_distance(&accepted, fit),
        envelope,
        n_sim: accepted.len(),
        acceptance_rate,
    }
}

/// sup_u |ecdf(u) - Dhat(u)| over the sample points (both step sides).
fn ks_distance(u_values: &[f64], fit: &ComparisonFit) -> f64 {
    let mut sorted = u_values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut ks = 0.0f64;
    for (i, &u) in sorted.iter().enumerate() {
        let d = fit.dhat_cdf(u).clamp(0.0, 1.0);
        ks = ks.max((d - i as f64 / n).abs());
        ks = ks.max((d - (i as f64 + 1.0) / n).abs());
    }
    ks
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Exp1, StandardNormal};

    const TOL: f64 = 1e-9;

    #[test]
    fn start_quantile_inverts_cdf() {
        let starts: Vec<Box<dyn ParametricStart>> = vec![
            Box::new(NormalStart::new(1.5, 2.5).unwrap()),
            Box::new(UniformStart::new(-1.0, 4.0).unwrap()),
            Box::new(ExponentialStart::new(0.7).unwrap()),
        ];
        for start in &starts {
            for i in 1..200 {
                let u = i as f64 / 200.0;
                let err = (start.cdf(start.quantile(u)) - u).abs();
                assert!(err < 1e-10, "{}: u={u} err={err:.2e}", start.label());
            }
        }
    }

    #[test]
    fn comparison_distribution_boundary_cases() {
        let s = Sample::new((1..=50).map(|i| i as f64 / 51.0).collect()).unwrap();
        // start far below all data: D(u) = 0
        let low = UniformStart::new(-10.0, -5.0).unwrap();
        assert_eq!(comparison_distribution(&s, &low, 0.5).unwrap(), 0.0);

        // matching uniform start: D approximates the identity
        let g = UniformStart::new(0.0, 1.0).unwrap();
        let mut sup: f64 = 0.0;
        for i in 1..100 {
            let u = i as f64 / 100.0;
            sup = sup.max((comparison_distribution(&s, &g, u).unwrap() - u).abs());
        }
        assert!(sup < 0.05, "KS-like distance {sup}");

        assert!(comparison_distribution(&s, &g, 0.0).is_err());
    }

    #[test]
    fn neyman_null_coefficients_are_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let data: Vec<f64> = (0..500).map(|_| StandardNormal.sample(&mut rng)).collect();
        let s = Sample::new(data).unwrap();
        let start = NormalStart::fit(&s).unwrap();
        let fit = neyman_fit(&s, Box::new(start), 4).unwrap();
        let bound = 3.0 / (500.0f64).sqrt();
        for &t in fit.theta() {
            assert!(t.abs() <= bound, "theta {t} exceeds {bound}");
        }
        // dhat always integrates to one
        let total: f64 = gauss_legendre_unit(64)
            .iter()
            .map(|&(u, w)| w * fit.dhat(u))
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn neyman_detects_bimodality_with_degree_eight() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut data = Vec::with_capacity(300);
        for i in 0..300 {
            let center = if i % 2 == 0 { -2.0 } else { 2.0 };
            let z: f64 = StandardNormal.sample(&mut rng);
            data.push(center + 0.5 * z);
        }
        let s = Sample::new(data).unwrap();
        let start = NormalStart::fit(&s).unwrap();
        let fit = neyman_fit(&s, Box::new(start), 8).unwrap();
        assert!(!fit.selected().is_empty());
        let grid: Vec<f64> = (0..512).map(|i| (i as f64 + 0.5) / 512.0).collect();
        let d: Vec<f64> = grid.iter().map(|&u| fit.dhat(u)).collect();
        let maxima = interior_maxima(&d);
        assert_eq!(maxima, 2, "expected bimodal dhat, found {maxima} maxima");
    }

    fn interior_maxima(values: &[f64]) -> usize {
        values
            .windows(3)
            .filter(|w| w[1] > w[0] && w[1] > w[2])
            .count()
    }

    #[test]
    fn neyman_rejects_misfitting_start() {
        // Exp(1) data against a normal start: large integrated misfit
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let data: Vec<f64> = (0..500).map(|_| Exp1.sample(&mut rng)).collect();
        let s = Sample::new(data).unwrap();
        let start = NormalStart::fit(&s).unwrap();
        let fit = neyman_fit(&s, Box::new(start), 4).unwrap();
        assert!(
            fit.integral_sq_dev() > 0.1,
            "integrated (dhat-1)^2 = {}",
            fit.integral_sq_dev()
        );
    }

    #[test]
    fn start_support_mismatch_is_an_error() {
        let s = Sample::new(vec![0.0, 0.5, 1.0]).unwrap();
        let g = UniformStart::new(0.0, 1.0).unwrap();
        assert!(matches!(
            neyman_fit(&s, Box::new(g), 4).unwrap_err(),
            Error::StartSupportMismatch(_)
        ));
    }

    #[test]
    fn empty_selection_returns_the_start() {
        let start = NormalStart::new(0.0, 1.0).unwrap();
        let fit = ComparisonFit::with_selection(
            Box::new(start.clone()),
            vec![0.01, -0.02, 0.005, 0.0],
            vec![],
            100,
        );
        for x in [-2.0, -0.3, 0.0, 1.7] {
            assert!((fit.density_at(x) - start.pdf(x)).abs() < 1e-15);
        }
        assert_eq!(fit.integral_sq_dev(), 0.0);
    }

    #[test]
    fn density_integrates_to_one_when_nonnegative() {
        let start = NormalStart::new(0.0, 1.0).unwrap();
        let fit = ComparisonFit::with_selection(
            Box::new(start),
            vec![0.05, 0.08, -0.04, 0.02],
            vec![1, 2, 3, 4],
            200,
        );
        let grid: Vec<f64> = (0..512).map(|i| (i as f64 + 0.5) / 512.0).collect();
        assert!(grid.iter().all(|&u| fit.dhat(u) > 0.0));
        // integrate fhat over x by composite Simpson on [-9, 9]
        let m = 4096;
        let (a, b) = (-9.0, 9.0);
        let h = (b - a) / m as f64;
        let mut total = fit.density_at(a) + fit.density_at(b);
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            total += w * fit.density_at(a + i as f64 * h);
        }
        total *= h / 3.0;
        assert!((total - 1.0).abs() < 1e-6, "integral = {total}");
    }

    #[test]
    fn logistic_reproduces_two_point_log_odds() {
        // binary X: the saturated model must match empirical cell log odds
        let x = [vec![0.0; 40], vec![1.0; 60]].concat();
        let mut y = vec![0.0; 100];
        // X=0: 10 of 40 are class 1; X=1: 45 of 60
        for item in y.iter_mut().take(10) {
            *item = 1.0;
        }
        for item in y.iter_mut().skip(40).take(45) {
            *item = 1.0;
        }
        let pair = PairedSample::new(x, y).unwrap();
        let fit = logistic_comparison_fit(&pair, 4).unwrap();
        let (p0, p1) = (10.0 / 40.0, 45.0 / 60.0);
        let u0 = 0.2; // inside the X=0 cell (mass 0.4)
        let u1 = 0.7;
        assert!((odds(fit.p_at(u0).unwrap()).ln() - odds(p0).ln()).abs() < TOL);
        assert!((odds(fit.p_at(u1).unwrap()).ln() - odds(p1).ln()).abs() < TOL);
    }

    #[test]
    fn logistic_null_recovers_prior() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let x: Vec<f64> = (0..400).map(|_| rng.gen::<f64>()).collect();
        let y: Vec<f64> = (0..400).map(|_| f64::from(rng.gen_bool(0.3))).collect();
        let pair = PairedSample::new(x, y).unwrap();
        let fit = logistic_comparison_fit(&pair, 4).unwrap();
        let prior = fit.prior1();
        assert!((fit.coefficients()[0] - odds(prior).ln()).abs() < 0.05);
        for &b in &fit.coefficients()[1..] {
            assert!(b.abs() < 3.0 / (400.0f64 * prior * (1.0 - prior)).sqrt() * 3.0);
        }
    }

    #[test]
    fn logistic_threshold_response_saturates() {
        let x: Vec<f64> = (0..200).map(|i| i as f64 + 0.5 * ((i * 7 % 13) as f64) / 13.0).collect();
        let median = 99.5;
        let y: Vec<f64> = x.iter().map(|&v| f64::from(v > median)).collect();
        let pair = PairedSample::new(x, y).unwrap();
        let fit = logistic_comparison_fit(&pair, 4).unwrap();
        assert!(fit.p_at(0.25).unwrap() < 0.1);
        assert!(fit.p_at(0.75).unwrap() > 0.9);
        assert!(!fit.warnings().is_empty());
    }

    #[test]
    fn logistic_shift_alternative_gives_increasing_dhat() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut x = Vec::with_capacity(300);
        let mut y = Vec::with_capacity(300);
        for i in 0..300 {
            let class1 = i % 2 == 0;
            let z: f64 = StandardNormal.sample(&mut rng);
            x.push(if class1 { 1.0 + z } else { z });
            y.push(f64::from(class1));
        }
        let pair = PairedSample::new(x, y).unwrap();
        let fit = logistic_comparison_fit(&pair, 4).unwrap();
        let rule = gauss_legendre_unit(64);
        let lower: f64 = rule
            .iter()
            .map(|&(u, w)| 0.5 * w * fit.dhat(0.5 * u).unwrap())
            .sum();
        let upper: f64 = rule
            .iter()
            .map(|&(u, w)| 0.5 * w * fit.dhat(0.5 + 0.5 * u).unwrap())
            .sum();
        assert!(
            lower < upper,
            "expected increasing trend: lower {lower}, upper {upper}"
        );
    }

    #[test]
    fn non_binary_response_rejected() {
        let pair = PairedSample::new(vec![1.0, 2.0, 3.0], vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(
            logistic_comparison_fit(&pair, 2).unwrap_err(),
            Error::NotBinary
        );
    }

    #[test]
    fn odds_arithmetic() {
        assert!((odds(0.5) - 1.0).abs() < 1e-15);
        assert!((odds(0.8) - 4.0).abs() < 1e-12);
        assert!(odds(1.0).is_infinite());
        let p_u = |u: f64| 0.5 + 0.25 * u;
        assert!((bayes_odds(p_u, 1.0) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn comparison_probability_matches_aspirin_dep() {
        let pair = crate::dependence::paired_from_counts(&[
            (0.0, 0.0, 100),
            (1.0, 0.0, 200),
            (0.0, 1.0, 9900),
            (1.0, 1.0, 9800),
        ])
        .unwrap();
        assert!((comparison_probability(&pair, 0.0, 0.0).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((comparison_probability(&pair, 1.0, 0.0).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        assert!(matches!(
            comparison_probability(&pair, 2.0, 0.0).unwrap_err(),
            Error::ZeroMassCell
        ));
    }

    #[test]
    fn comparison_probability_is_one_under_independence() {
        let mut cells = Vec::new();
        for (x, cx) in [(0.0, 2usize), (1.0, 3)] {
            for (y, cy) in [(10.0, 4usize), (20.0, 1)] {
                cells.push((x, y, cx * cy));
            }
        }
        let pair = crate::dependence::paired_from_counts(&cells).unwrap();
        for x in [0.0, 1.0] {
            for y in [10.0, 20.0] {
                assert!((comparison_probability(&pair, x, y).unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bayes_symmetry_on_discrete_table() {
        // Comp[Y=y | X=x] and Comp[X=x | Y=y] agree cellwise with dep(x,y)
        let pair = crate::dependence::paired_from_counts(&[
            (0.0, 0.0, 3),
            (0.0, 1.0, 1),
            (1.0, 0.0, 2),
            (1.0, 1.0, 5),
            (2.0, 0.0, 4),
            (2.0, 1.0, 2),
        ])
        .unwrap();
        let swapped = PairedSample::new(pair.y().values().to_vec(), pair.x().values().to_vec())
            .unwrap();
        for &x in &[0.0, 1.0, 2.0] {
            for &y in &[0.0, 1.0] {
                let forward = comparison_probability(&pair, x, y).unwrap();
                let backward = comparison_probability(&swapped, y, x).unwrap();
                assert!((forward - backward).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn posterior_odds_factorize_through_comparison_probability() {
        // odds(P[Y=1|X=x]) = odds(P[Y=1]) * Comp[Y=1|X=x] / Comp[Y=0|X=x]
        let pair = crate::dependence::paired_from_counts(&[
            (0.0, 0.0, 30),
            (0.0, 1.0, 10),
            (1.0, 0.0, 20),
            (1.0, 1.0, 40),
        ])
        .unwrap();
        let prior1 = 0.5;
        for &x in &[0.0, 1.0] {
            let joint1 = comparison_probability(&pair, x, 1.0).unwrap();
            let joint0 = comparison_probability(&pair, x, 0.0).unwrap();
            let posterior = prior1 * joint1; // P(Y=1|X=x)
            let lhs = odds(posterior);
            let rhs = odds(prior1) * joint1 / joint0;
            assert!((lhs - rhs).abs() < TOL);
        }
    }

    #[test]
    fn gof_diagnostic_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let data: Vec<f64> = (0..200).map(|_| StandardNormal.sample(&mut rng)).collect();
        let s = Sample::new(data).unwrap();
        let start = NormalStart::fit(&s).unwrap();
        let fit = neyman_fit(&s, Box::new(start), 4).unwrap();
        let a = gof_accept_reject(&fit, &s, 99, 500);
        let b = gof_accept_reject(&fit, &s, 99, 500);
        assert_eq!(a.observed_ks, b.observed_ks);
        assert_eq!(a.simulated_ks, b.simulated_ks);
        assert!(a.envelope >= 1.0 - 1e-12);
        assert!(a.observed_ks > 0.0 && a.simulated_ks > 0.0);
        assert_eq!(a.n_sim, 500);
    }
}
