//! LPINFOR dependence measures, AIC coefficient selection, the data-driven
//! chi-square independence test, orthogonal-series copula density estimates,
//! conditional LPINFOR profiles, and all-pairs dependence screening.
//!
//! The copula density series is `cop(u,v) - 1 = sum LP(j,k) S_j(u) S_k(v)`.
//! AIC keeps the coefficients worth their estimation cost: squared comoments
//! are ranked descending and the model size maximizing
//! `sum_top-m LP^2 - 2m/n` is kept (smallest size on ties, possibly empty).
//! LPINFOR is the sum of the selected squared comoments; under independence
//! `n * LPINFOR` is asymptotically chi-square with one degree of freedom per
//! selected pair.

use crate::empirical::PairedSample;
use crate::error::{Error, Result};
use crate::linalg::cholesky_solve;
use crate::lpmoments::{lp_comoment_matrix_with, LpMatrix};
use crate::quadrature::gauss_legendre_unit;
use crate::scores::ScoreBasis;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Coefficients kept by AIC, with the resulting LPINFOR.
#[derive(Debug, Clone)]
pub struct SelectedModel {
    pairs: Vec<(usize, usize)>,
    coefficients: Vec<f64>,
    lpinfor: f64,
    aic_path: Vec<f64>,
    n: usize,
}

impl SelectedModel {
    /// Selected (j,k) pairs, sorted by descending LP(j,k)^2.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// LP(j,k) for each selected pair, same order as `pairs()`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Sum of squared selected coefficients.
    pub fn lpinfor(&self) -> f64 {
        self.lpinfor
    }

    /// AIC(m) for m = 1..=#candidates, in ranked order.
    pub fn aic_path(&self) -> &[f64] {
        &self.aic_path
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn coefficient_of(&self, j: usize, k: usize) -> Option<f64> {
        self.pairs
            .iter()
            .position(|&p| p == (j, k))
            .map(|i| self.coefficients[i])
    }

    /// Model with explicit pairs and coefficients; no selection applied.
    pub fn from_pairs(pairs: Vec<(usize, usize)>, coefficients: Vec<f64>, n: usize) -> Self {
        assert_eq!(pairs.len(), coefficients.len());
        let lpinfor = coefficients.iter().map(|&c| c * c).sum();
        Self {
            pairs,
            coefficients,
            lpinfor,
            aic_path: Vec::new(),
            n,
        }
    }

    /// Model keeping every inner coefficient (pre-AIC), ranked like
    /// `aic_select`. The full-basis LPINFOR estimates the integrated squared
    /// copula deviation without selection.
    pub fn with_all_pairs(lp: &LpMatrix, n: usize) -> Self {
        let ranked = ranked_candidates(lp);
        let lpinfor = ranked.iter().map(|&(_, _, c)| c * c).sum();
        let aic_path = aic_path(&ranked, n);
        Self {
            pairs: ranked.iter().map(|&(j, k, _)| (j, k)).collect(),
            coefficients: ranked.iter().map(|&(_, _, c)| c).collect(),
            lpinfor,
            aic_path,
            n,
        }
    }
}

fn ranked_candidates(lp: &LpMatrix) -> Vec<(usize, usize, f64)> {
    let mut cands = lp.inner_entries();
    cands.sort_by(|a, b| {
        (b.2 * b.2)
            .total_cmp(&(a.2 * a.2))
            .then(a.0.cmp(&b.0))
            .then(a.1.cmp(&b.1))
    });
    cands
}

fn aic_path(ranked: &[(usize, usize, f64)], n: usize) -> Vec<f64> {
    let penalty = 2.0 / n as f64;
    let mut cum = 0.0;
    ranked
        .iter()
        .enumerate()
        .map(|(i, &(_, _, c))| {
            cum += c * c;
            cum - penalty * (i + 1) as f64
        })
        .collect()
}

/// Ranks squared comoments and keeps the prefix maximizing
/// `AIC(m) = sum_top-m LP^2 - 2m/n`. The empty model (AIC = 0) wins when
/// even the top coefficient fails its penalty.
pub fn aic_select(lp: &LpMatrix, n: usize) -> SelectedModel {
    debug_assert!(n >= 2);
    let ranked = ranked_candidates(lp);
    let path = aic_path(&ranked, n);
    let mut best = 0.0;
    let mut best_m = 0;
    for (i, &a) in path.iter().enumerate() {
        if a > best {
            best = a;
            best_m = i + 1;
        }
    }
    let kept = &ranked[..best_m];
    SelectedModel {
        pairs: kept.iter().map(|&(j, k, _)| (j, k)).collect(),
        coefficients: kept.iter().map(|&(_, _, c)| c).collect(),
        lpinfor: kept.iter().map(|&(_, _, c)| c * c).sum(),
        aic_path: path,
        n,
    }
}

/// Data-driven chi-square independence test based on a selected model.
///
/// The degrees of freedom count the AIC-selected pairs; the p-value does
/// not correct for that selection step.
#[derive(Debug, Clone, Copy)]
pub struct LpinforTest {
    /// n * LPINFOR.
    pub statistic: f64,
    /// Number of selected pairs.
    pub dof: usize,
    /// Upper-tail chi-square probability; 1 for an empty model.
    pub p_value: f64,
}

pub fn lpinfor_test(model: &SelectedModel) -> LpinforTest {
    let dof = model.pairs.len();
    let statistic = model.n as f64 * model.lpinfor;
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64).unwrap().sf(statistic)
    };
    LpinforTest {
        statistic,
        dof,
        p_value,
    }
}

/// Which estimator a [`CopulaEstimate`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CopulaKind {
    L2,
    MaxEnt,
}

/// A fitted copula density over (0,1)^2, piecewise constant on the product
/// of the marginal support cells.
///
/// The L2 estimate `1 + sum LP(j,k) S_j(u) S_k(v)` integrates to one exactly
/// but may go negative; it is reported raw, with
/// [`CopulaEstimate::floor_renormalized`] as an optional post-process. The
/// MaxEnt estimate `exp(theta_0 + sum theta_jk S_j S_k)` is positive by
/// construction and normalized with respect to the grid it was fitted on.
#[derive(Debug, Clone)]
pub struct CopulaEstimate {
    kind: CopulaKind,
    pairs: Vec<(usize, usize)>,
    coefficients: Vec<f64>,
    theta0: f64,
    basis_x: ScoreBasis,
    basis_y: ScoreBasis,
}

impl CopulaEstimate {
    pub fn kind(&self) -> CopulaKind {
        self.kind
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Series coefficients: LP values for L2, natural parameters for MaxEnt.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Log-normalizer of the MaxEnt estimate (0 for L2).
    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn basis_x(&self) -> &ScoreBasis {
        &self.basis_x
    }

    pub fn basis_y(&self) -> &ScoreBasis {
        &self.basis_y
    }

    fn eval_cell(&self, ix: usize, iy: usize) -> f64 {
        let mut s = 0.0;
        for (t, &(j, k)) in self.pairs.iter().enumerate() {
            s += self.coefficients[t] * self.basis_x.t_at(j, ix) * self.basis_y.t_at(k, iy);
        }
        match self.kind {
            CopulaKind::L2 => 1.0 + s,
            CopulaKind::MaxEnt => (self.theta0 + s).exp(),
        }
    }

    /// cop(u,v); piecewise constant in each coordinate.
    pub fn evaluate(&self, u: f64, v: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::ProbabilityOutOfRange(u));
        }
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::ProbabilityOutOfRange(v));
        }
        Ok(self.eval_cell(self.basis_x.segment_of(u), self.basis_y.segment_of(v)))
    }

    /// Exact integral over (0,1)^2 (sum over support cells).
    pub fn integral(&self) -> f64 {
        let px = self.basis_x.masses();
        let py = self.basis_y.masses();
        let mut total = 0.0;
        for (ix, &wx) in px.iter().enumerate() {
            for (iy, &wy) in py.iter().enumerate() {
                total += wx * wy * self.eval_cell(ix, iy);
            }
        }
        total
    }

    /// Exact moment `int S_j(u) S_k(v) cop(u,v) du dv` under this estimate.
    pub fn moment(&self, j: usize, k: usize) -> f64 {
        let px = self.basis_x.masses();
        let py = self.basis_y.masses();
        let mut total = 0.0;
        for (ix, &wx) in px.iter().enumerate() {
            for (iy, &wy) in py.iter().enumerate() {
                total += wx
                    * wy
                    * self.basis_x.t_at(j, ix)
                    * self.basis_y.t_at(k, iy)
                    * self.eval_cell(ix, iy);
            }
        }
        total
    }

    /// Moments of the selected product scores under an n-node tensor
    /// Gauss-Legendre rule; used to probe grid sensitivity of a MaxEnt fit.
    pub fn moments_on_gauss_grid(&self, nodes: usize) -> Vec<(usize, usize, f64)> {
        let rule = gauss_legendre_unit(nodes);
        let cx: Vec<usize> = rule.iter().map(|&(u, _)| self.basis_x.segment_of(u)).collect();
        let cy: Vec<usize> = rule.iter().map(|&(v, _)| self.basis_y.segment_of(v)).collect();
        self.pairs
            .iter()
            .map(|&(j, k)| {
                let mut m = 0.0;
                for (a, &(_, wa)) in rule.iter().enumerate() {
                    for (b, &(_, wb)) in rule.iter().enumerate() {
                        m += wa
                            * wb
                            * self.basis_x.t_at(j, cx[a])
                            * self.basis_y.t_at(k, cy[b])
                            * self.eval_cell(cx[a], cy[b]);
                    }
                }
                (j, k, m)
            })
            .collect()
    }

    /// Optional post-process for the (possibly negative) L2 estimate:
    /// max(cop, 0) renormalized to integrate to one. Off by default; the raw
    /// series estimate is what gets reported.
    pub fn floor_renormalized(&self) -> FlooredCopula<'_> {
        let px = self.basis_x.masses();
        let py = self.basis_y.masses();
        let mut mass = 0.0;
        for (ix, &wx) in px.iter().enumerate() {
            for (iy, &wy) in py.iter().enumerate() {
                mass += wx * wy * self.eval_cell(ix, iy).max(0.0);
            }
        }
        FlooredCopula {
            base: self,
            normalizer: mass,
        }
    }
}

/// `max(cop, 0) / normalizer`; see [`CopulaEstimate::floor_renormalized`].
#[derive(Debug, Clone, Copy)]
pub struct FlooredCopula<'a> {
    base: &'a CopulaEstimate,
    normalizer: f64,
}

impl FlooredCopula<'_> {
    pub fn evaluate(&self, u: f64, v: f64) -> Result<f64> {
        Ok(self.base.evaluate(u, v)?.max(0.0) / self.normalizer)
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }
}

/// L2 series copula estimate from a selected model.
pub fn copula_l2(
    model: &SelectedModel,
    basis_x: &ScoreBasis,
    basis_y: &ScoreBasis,
) -> CopulaEstimate {
    check_model_fits(model, basis_x, basis_y);
    CopulaEstimate {
        kind: CopulaKind::L2,
        pairs: model.pairs.clone(),
        coefficients: model.coefficients.clone(),
        theta0: 0.0,
        basis_x: basis_x.clone(),
        basis_y: basis_y.clone(),
    }
}

fn check_model_fits(model: &SelectedModel, basis_x: &ScoreBasis, basis_y: &ScoreBasis) {
    for &(j, k) in &model.pairs {
        assert!(
            j >= 1 && j <= basis_x.effective_m() && k >= 1 && k <= basis_y.effective_m(),
            "model pair ({j},{k}) outside basis degrees ({}, {})",
            basis_x.effective_m(),
            basis_y.effective_m()
        );
    }
}

/// Integration grid for the MaxEnt moment-matching solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxEntGrid {
    /// Exact cell sums when the product support is small enough, else a
    /// 64-node tensor Gauss-Legendre rule.
    Auto,
    /// Tensor-product Gauss-Legendre with the given nodes per axis.
    GaussLegendre(usize),
    /// Exact integration over the product of marginal support cells.
    ExactCells,
}

#[derive(Debug, Clone, Copy)]
pub struct MaxEntOptions {
    pub grid: MaxEntGrid,
    pub max_iter: usize,
    /// Convergence: max absolute moment residual.
    pub tol: f64,
}

impl Default for MaxEntOptions {
    fn default() -> Self {
        Self {
            grid: MaxEntGrid::Auto,
            max_iter: 200,
            tol: 1e-8,
        }
    }
}

const MAX_CELLS_EXACT: usize = 65_536;
/// Natural parameters beyond this size mean the targets sit on (or outside)
/// the boundary of the moment polytope.
const THETA_INFEASIBLE: f64 = 100.0;

/// MaxEnt (exponential family) copula estimate with default options:
/// `cop(u,v) = exp(theta_0 + sum theta_jk S_j(u) S_k(v))` where theta solves
/// the moment-matching equations `E_theta[S_j S_k] = LP(j,k)` by damped
/// Newton on the convex log-partition objective.
pub fn copula_maxent(
    model: &SelectedModel,
    basis_x: &ScoreBasis,
    basis_y: &ScoreBasis,
) -> Result<CopulaEstimate> {
    copula_maxent_with(model, basis_x, basis_y, MaxEntOptions::default())
}

pub fn copula_maxent_with(
    model: &SelectedModel,
    basis_x: &ScoreBasis,
    basis_y: &ScoreBasis,
    options: MaxEntOptions,
) -> Result<CopulaEstimate> {
    check_model_fits(model, basis_x, basis_y);
    if model.is_empty() {
        return Ok(CopulaEstimate {
            kind: CopulaKind::MaxEnt,
            pairs: Vec::new(),
            coefficients: Vec::new(),
            theta0: 0.0,
            basis_x: basis_x.clone(),
            basis_y: basis_y.clone(),
        });
    }
    let grid = FeatureGrid::build(&model.pairs, basis_x, basis_y, options.grid);
    let (theta, theta0) = solve_moment_match(&grid, &model.coefficients, &options)?;
    Ok(CopulaEstimate {
        kind: CopulaKind::MaxEnt,
        pairs: model.pairs.clone(),
        coefficients: theta,
        theta0,
        basis_x: basis_x.clone(),
        basis_y: basis_y.clone(),
    })
}

/// Weighted feature table: one row of S_j(u) S_k(v) values per grid point.
struct FeatureGrid {
    weights: Vec<f64>,
    features: Vec<f64>,
    d: usize,
}

impl FeatureGrid {
    fn build(
        pairs: &[(usize, usize)],
        basis_x: &ScoreBasis,
        basis_y: &ScoreBasis,
        grid: MaxEntGrid,
    ) -> Self {
        let cells = basis_x.masses().len() * basis_y.masses().len();
        let resolved = match grid {
            MaxEntGrid::Auto => {
                if cells <= MAX_CELLS_EXACT {
                    MaxEntGrid::ExactCells
                } else {
                    MaxEntGrid::GaussLegendre(64)
                }
            }
            g => g,
        };
        let d = pairs.len();
        let mut weights = Vec::new();
        let mut features = Vec::new();
        let mut push_point = |w: f64, ix: usize, iy: usize| {
            weights.push(w);
            for &(j, k) in pairs {
                features.push(basis_x.t_at(j, ix) * basis_y.t_at(k, iy));
            }
        };
        match resolved {
            MaxEntGrid::ExactCells => {
                for (ix, &wx) in basis_x.masses().iter().enumerate() {
                    for (iy, &wy) in basis_y.masses().iter().enumerate() {
                        push_point(wx * wy, ix, iy);
                    }
                }
            }
            MaxEntGrid::GaussLegendre(q) => {
                let rule = gauss_legendre_unit(q);
                let cx: Vec<usize> = rule.iter().map(|&(u, _)| basis_x.segment_of(u)).collect();
                let cy: Vec<usize> = rule.iter().map(|&(v, _)| basis_y.segment_of(v)).collect();
                for (a, &(_, wa)) in rule.iter().enumerate() {
                    for (b, &(_, wb)) in rule.iter().enumerate() {
                        push_point(wa * wb, cx[a], cy[b]);
                    }
                }
            }
            MaxEntGrid::Auto => unreachable!(),
        }
        Self {
            weights,
            features,
            d,
        }
    }

    fn n_points(&self) -> usize {
        self.weights.len()
    }

    fn log_partition(&self, theta: &[f64]) -> f64 {
        let scores = self.scores(theta);
        let smax = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = self
            .weights
            .iter()
            .zip(&scores)
            .map(|(&w, &s)| w * (s - smax).exp())
            .sum();
        smax + z.ln()
    }

    fn scores(&self, theta: &[f64]) -> Vec<f64> {
        (0..self.n_points())
            .map(|i| {
                let row = &self.features[i * self.d..(i + 1) * self.d];
                row.iter().zip(theta).map(|(&f, &t)| f * t).sum()
            })
            .collect()
    }

    /// (log Z, moments, covariance) at theta.
    fn log_partition_full(&self, theta: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let d = self.d;
        let scores = self.scores(theta);
        let smax = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut z = 0.0;
        let mut mom = vec![0.0; d];
        let mut second = vec![0.0; d * d];
        for ((&w0, &s), row) in self
            .weights
            .iter()
            .zip(&scores)
            .zip(self.features.chunks_exact(d))
        {
            let w = w0 * (s - smax).exp();
            z += w;
            for a in 0..d {
                mom[a] += w * row[a];
                for b in 0..=a {
                    second[a * d + b] += w * row[a] * row[b];
                }
            }
        }
        for a in 0..d {
            mom[a] /= z;
            for b in 0..=a {
                second[a * d + b] /= z;
            }
        }
        let mut cov = vec![0.0; d * d];
        for a in 0..d {
            for b in 0..=a {
                let c = second[a * d + b] - mom[a] * mom[b];
                cov[a * d + b] = c;
                cov[b * d + a] = c;
            }
        }
        (smax + z.ln(), mom, cov)
    }
}

fn solve_moment_match(
    grid: &FeatureGrid,
    targets: &[f64],
    options: &MaxEntOptions,
) -> Result<(Vec<f64>, f64)> {
    let d = targets.len();
    let mut theta = vec![0.0; d];
    let mut residual = f64::INFINITY;
    for iteration in 0..options.max_iter {
        let (logz, mom, cov) = grid.log_partition_full(&theta);
        let gradient: Vec<f64> = mom.iter().zip(targets).map(|(&m, &t)| m - t).collect();
        residual = gradient.iter().fold(0.0f64, |a, &g| a.max(g.abs()));
        if residual < options.tol {
            return Ok((theta, -logz));
        }
        if theta.iter().any(|t| t.abs() > THETA_INFEASIBLE) {
            return Err(Error::MomentInfeasible);
        }
        let Some(delta) = cholesky_solve(d, &cov, &gradient) else {
            return Err(Error::NonConvergence {
                what: "maxent moment matching",
                iterations: iteration,
                residual,
            });
        };
        // damped Newton: backtrack on the convex objective logZ - theta.target;
        // the epsilon slack keeps full steps acceptable once the decrease
        // falls below rounding noise near the optimum
        let psi0 = logz - dot(&theta, targets);
        let slack = 1e-14 * (1.0 + psi0.abs());
        let slope: f64 = dot(&gradient, &delta);
        let mut step = 1.0;
        loop {
            let cand: Vec<f64> = theta
                .iter()
                .zip(&delta)
                .map(|(&t, &dl)| t - step * dl)
                .collect();
            let psi = grid.log_partition(&cand) - dot(&cand, targets);
            if psi.is_finite() && psi <= psi0 - 0.25 * step * slope + slack {
                theta = cand;
                break;
            }
            step *= 0.5;
            if step < 1e-10 {
                return Err(Error::MomentInfeasible);
            }
        }
    }
    Err(Error::NonConvergence {
        what: "maxent moment matching",
        iterations: options.max_iter,
        residual,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Conditional LP moments and conditional LPINFOR along a u-grid.
///
/// `LP(k; Y | X=Q(u)) = sum_j S_j(u) LP(j,k)` over the selected pairs, and
/// `LPINFOR(Y | X=Q(u)) = sum_k LP(k; Y|X=Q(u))^2`; both are piecewise
/// constant in u. `integrated_lpinfor` integrates the profile exactly over
/// the support cells and recovers the total LPINFOR of the model.
#[derive(Debug, Clone)]
pub struct ConditionalProfile {
    u_grid: Vec<f64>,
    moments: Vec<Vec<f64>>,
    lpinfor: Vec<f64>,
    integrated_lpinfor: f64,
    k_max: usize,
}

impl ConditionalProfile {
    pub fn u_grid(&self) -> &[f64] {
        &self.u_grid
    }

    /// Conditional moments per grid point, k = 1..=k_max.
    pub fn moments(&self) -> &[Vec<f64>] {
        &self.moments
    }

    /// Conditional LPINFOR per grid point.
    pub fn lpinfor(&self) -> &[f64] {
        &self.lpinfor
    }

    /// Exact `int_0^1 LPINFOR(Y | X=Q(u)) du`.
    pub fn integrated_lpinfor(&self) -> f64 {
        self.integrated_lpinfor
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }
}

pub fn conditional_profile(
    model: &SelectedModel,
    basis_x: &ScoreBasis,
    u_grid: &[f64],
) -> ConditionalProfile {
    let k_max = model.pairs.iter().map(|&(_, k)| k).max().unwrap_or(0);
    let cell_moments = |ix: usize| -> Vec<f64> {
        let mut m = vec![0.0; k_max];
        for (t, &(j, k)) in model.pairs.iter().enumerate() {
            m[k - 1] += basis_x.t_at(j, ix) * model.coefficients[t];
        }
        m
    };
    let mut moments = Vec::with_capacity(u_grid.len());
    let mut lpinfor = Vec::with_capacity(u_grid.len());
    for &u in u_grid {
        let m = cell_moments(basis_x.segment_of(u));
        lpinfor.push(m.iter().map(|&v| v * v).sum());
        moments.push(m);
    }
    let integrated_lpinfor = basis_x
        .masses()
        .iter()
        .enumerate()
        .map(|(ix, &w)| {
            let m = cell_moments(ix);
            w * m.iter().map(|&v| v * v).sum::<f64>()
        })
        .sum();
    ConditionalProfile {
        u_grid: u_grid.to_vec(),
        moments,
        lpinfor,
        integrated_lpinfor,
        k_max,
    }
}

/// One screened column pair.
#[derive(Debug, Clone, Copy)]
pub struct PairScreen {
    /// Zero-based column indices, i < j.
    pub i: usize,
    pub j: usize,
    pub lpinfor: f64,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Rows actually used after pairwise missing-cell removal.
    pub n_used: usize,
}

#[derive(Debug, Clone)]
pub struct ScreenOutcome {
    /// Ranked by descending LPINFOR; ties by column index.
    pub ranked: Vec<PairScreen>,
    pub warnings: Vec<String>,
}

/// All-pairs dependence screening over columns sharing a row index.
/// Missing cells are dropped pairwise; degenerate pairs are skipped with a
/// recorded warning.
pub fn screen_pairs(columns: &[Vec<Option<f64>>], m: usize) -> Result<ScreenOutcome> {
    if columns.len() < 2 {
        return Err(Error::NotEnoughColumns);
    }
    let n_rows = columns[0].len();
    for c in columns {
        if c.len() != n_rows {
            return Err(Error::LengthMismatch {
                x: n_rows,
                y: c.len(),
            });
        }
    }
    let mut ranked = Vec::new();
    let mut warnings = Vec::new();
    for i in 0..columns.len() {
        for j in (i + 1)..columns.len() {
            let mut xs = Vec::with_capacity(n_rows);
            let mut ys = Vec::with_capacity(n_rows);
            for (&cx, &cy) in columns[i].iter().zip(&columns[j]) {
                if let (Some(x), Some(y)) = (cx, cy) {
                    xs.push(x);
                    ys.push(y);
                }
            }
            let dropped = n_rows - xs.len();
            if dropped > 0 {
                warnings.push(format!(
                    "pair ({i},{j}): dropped {dropped} rows with missing cells"
                ));
            }
            if xs.len() < 2 {
                warnings.push(format!("pair ({i},{j}): skipped (fewer than 2 complete rows)"));
                continue;
            }
            let pair = PairedSample::new(xs, ys)?;
            let lp = match build_matrix(&pair, m) {
                Ok(lp) => lp,
                Err(Error::DegenerateSample) => {
                    warnings.push(format!("pair ({i},{j}): skipped (degenerate column)"));
                    continue;
                }
                Err(e) => return Err(e),
            };
            let model = aic_select(&lp, pair.n());
            let test = lpinfor_test(&model);
            ranked.push(PairScreen {
                i,
                j,
                lpinfor: model.lpinfor(),
                statistic: test.statistic,
                dof: test.dof,
                p_value: test.p_value,
                n_used: pair.n(),
            });
        }
    }
    ranked.sort_by(|a, b| {
        b.lpinfor
            .total_cmp(&a.lpinfor)
            .then(a.i.cmp(&b.i))
            .then(a.j.cmp(&b.j))
    });
    Ok(ScreenOutcome { ranked, warnings })
}

fn build_matrix(pair: &PairedSample, m: usize) -> Result<LpMatrix> {
    let bx = ScoreBasis::new(pair.x(), m)?;
    let by = ScoreBasis::new(pair.y(), m)?;
    lp_comoment_matrix_with(pair, &bx, &by)
}

/// Convenience: comoment matrix, AIC selection, and test in one call.
pub fn analyze_pair(pair: &PairedSample, m: usize) -> Result<(LpMatrix, SelectedModel, LpinforTest)> {
    let lp = build_matrix(pair, m)?;
    let model = aic_select(&lp, pair.n());
    let test = lpinfor_test(&model);
    Ok((lp, model, test))
}

/// Expands a discrete joint table (counts over value pairs) into row-level
/// paired observations; handy for contingency-table interfaces.
pub fn paired_from_counts(cells: &[(f64, f64, usize)]) -> Result<PairedSample> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(x, y, count) in cells {
        for _ in 0..count {
            xs.push(x);
            ys.push(y);
        }
    }
    PairedSample::new(xs, ys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpmoments::lp_comoment_matrix;

    fn matrix_from(pair: &PairedSample, m: usize) -> LpMatrix {
        lp_comoment_matrix(pair, m, m).unwrap()
    }

    /// Aspirin 2x2 table at n = 20000: X margin 1/2, Y=0 margin 3/200.
    fn aspirin() -> PairedSample {
        paired_from_counts(&[
            (0.0, 0.0, 100),
            (1.0, 0.0, 200),
            (0.0, 1.0, 9900),
            (1.0, 1.0, 9800),
        ])
        .unwrap()
    }

    #[test]
    fn aic_keeps_single_strong_coefficient() {
        // one coefficient 0.5 at n=100: AIC(1) = 0.25 - 0.02 > 0
        let lp = LpMatrix::from_entries(1, 1, vec![0.0, 0.0, 0.0, 0.5]);
        let model = aic_select(&lp, 100);
        assert_eq!(model.pairs(), &[(1, 1)]);
        assert!((model.lpinfor() - 0.25).abs() < 1e-12);
        assert!((model.aic_path()[0] - 0.23).abs() < 1e-12);
    }

    #[test]
    fn aic_empty_when_penalty_dominates() {
        // all LP^2 below 2/n = 0.02
        let lp = LpMatrix::from_entries(
            2,
            2,
            vec![
                0.0, 0.0, 0.0, //
                0.0, 0.1, -0.05, //
                0.0, 0.08, 0.12,
            ],
        );
        let model = aic_select(&lp, 100);
        assert!(model.is_empty());
        assert_eq!(model.lpinfor(), 0.0);
        assert_eq!(lpinfor_test(&model).p_value, 1.0);
    }

    #[test]
    fn aic_ranking_is_deterministic_on_ties() {
        let lp = LpMatrix::from_entries(
            2,
            2,
            vec![
                0.0, 0.0, 0.0, //
                0.0, 0.3, -0.3, //
                0.0, 0.3, 0.3,
            ],
        );
        let model = aic_select(&lp, 1000);
        assert_eq!(model.pairs(), &[(1, 1), (1, 2), (2, 1), (2, 2)]);
    }

    #[test]
    fn chi_square_test_values() {
        let lp = LpMatrix::from_entries(1, 1, vec![0.0, 0.0, 0.0, 0.5]);
        let model = aic_select(&lp, 100);
        let t = lpinfor_test(&model);
        assert!((t.statistic - 25.0).abs() < 1e-12);
        assert_eq!(t.dof, 1);
        assert!(t.p_value < 1e-5);
    }

    #[test]
    fn two_by_two_reduction_and_classical_chi_square() {
        let pair = aspirin();
        let lp = matrix_from(&pair, 4);
        // a 2x2 table carries exactly one product score: LPINFOR = LP(1,1)^2
        assert_eq!(lp.m_x(), 1);
        assert_eq!(lp.m_y(), 1);
        let full = SelectedModel::with_all_pairs(&lp, pair.n());
        let r = lp.get(1, 1);
        assert!((full.lpinfor() - r * r).abs() < 1e-12);

        // oracle: classical Pearson chi-square statistic on the same table
        let n = 20000.0;
        let counts: [[f64; 2]; 2] = [[100.0, 200.0], [9900.0, 9800.0]];
        let col = [10000.0, 10000.0];
        let row = [300.0, 19700.0];
        let mut x2 = 0.0;
        for (a, row_counts) in counts.iter().enumerate() {
            for (b, &obs) in row_counts.iter().enumerate() {
                let expect = col[b] * row[a] / n;
                x2 += (obs - expect).powi(2) / expect;
            }
        }
        let stat = lpinfor_test(&full).statistic;
        assert!(
            ((stat - x2) / x2).abs() < 1e-9,
            "n*LPINFOR = {stat}, classical = {x2}"
        );
    }

    #[test]
    fn l2_copula_reproduces_dep_table() {
        let pair = aspirin();
        let lp = matrix_from(&pair, 4);
        let model = SelectedModel::with_all_pairs(&lp, pair.n());
        let bx = ScoreBasis::new(pair.x(), 4).unwrap();
        let by = ScoreBasis::new(pair.y(), 4).unwrap();
        let cop = copula_l2(&model, &bx, &by);

        // dep(x,y) = P(x,y) / (P(x) P(y)) computed straight from the counts
        let dep = |jx: usize, jy: usize, count: f64, px: f64, py: f64| {
            let d = (count / 20000.0) / (px * py);
            // cell of X=jx is u in (0, .5) or (.5, 1); Y=0 has mass .015
            let u = if jx == 0 { 0.25 } else { 0.75 };
            let v = if jy == 0 { 0.0074 } else { 0.5 };
            let got = cop.evaluate(u, v).unwrap();
            assert!((got - d).abs() < 1e-12, "cell ({jx},{jy}): {got} vs {d}");
            d
        };
        let d00 = dep(0, 0, 100.0, 0.5, 0.015);
        let d10 = dep(1, 0, 200.0, 0.5, 0.015);
        let d01 = dep(0, 1, 9900.0, 0.5, 0.985);
        let d11 = dep(1, 1, 9800.0, 0.5, 0.985);
        assert!((d00 - 2.0 / 3.0).abs() < 1e-12);
        assert!((d10 - 4.0 / 3.0).abs() < 1e-12);
        assert!((d01 - 1.005076).abs() < 5e-4);
        assert!((d11 - 0.994924).abs() < 5e-4);
    }

    #[test]
    fn l2_copula_empty_model_is_flat() {
        let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.7).sin()).collect();
        let y: Vec<f64> = (0..40).map(|i| (i as f64 * 1.3).cos()).collect();
        let pair = PairedSample::new(x, y).unwrap();
        let lp = matrix_from(&pair, 3);
        let empty = SelectedModel {
            pairs: vec![],
            coefficients: vec![],
            lpinfor: 0.0,
            aic_path: vec![],
            n: pair.n(),
        };
        let bx = ScoreBasis::new(pair.x(), 3).unwrap();
        let by = ScoreBasis::new(pair.y(), 3).unwrap();
        let cop = copula_l2(&empty, &bx, &by);
        assert_eq!(cop.evaluate(0.3, 0.9).unwrap(), 1.0);
        let _ = lp;
    }

    #[test]
    fn l2_copula_marginals_are_uniform() {
        let x = vec![0.3, 1.0, 1.0, 2.2, 5.0, 5.0, 7.7, 9.1, 4.4, 6.2];
        let y = vec![4.0, 2.0, 8.0, 8.0, 1.0, 3.0, 9.0, 2.5, 7.1, 0.2];
        let pair = PairedSample::new(x, y).unwrap();
        let lp = matrix_from(&pair, 4);
        let model = aic_select(&lp, pair.n());
        let bx = ScoreBasis::new(pair.x(), 4).unwrap();
        let by = ScoreBasis::new(pair.y(), 4).unwrap();
        let cop = copula_l2(&SelectedModel::with_all_pairs(&lp, pair.n()), &bx, &by);
        // integrate over u for a few fixed v cells, exactly over support cells
        for iy in 0..by.masses().len() {
            let total: f64 = bx
                .masses()
                .iter()
                .enumerate()
                .map(|(ix, &w)| w * cop.eval_cell(ix, iy))
                .sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        assert!((cop.integral() - 1.0).abs() < 1e-12);
        let _ = model;
    }

    #[test]
    fn maxent_empty_model_is_flat() {
        let x = vec![1.0, 2.0, 3.0, 4.0];
        let pair = PairedSample::new(x.clone(), x).unwrap();
        let bx = ScoreBasis::new(pair.x(), 2).unwrap();
        let empty = SelectedModel {
            pairs: vec![],
            coefficients: vec![],
            lpinfor: 0.0,
            aic_path: vec![],
            n: 4,
        };
        let cop = copula_maxent(&empty, &bx, &bx).unwrap();
        assert_eq!(cop.theta0(), 0.0);
        assert_eq!(cop.evaluate(0.5, 0.5).unwrap(), 1.0);
    }

    #[test]
    fn maxent_matches_single_moment() {
        let x = vec![0.0, 0.0, 1.0, 1.0];
        let pair = PairedSample::new(x.clone(), x).unwrap();
        let bx = ScoreBasis::new(pair.x(), 1).unwrap();
        let model = SelectedModel {
            pairs: vec![(1, 1)],
            coefficients: vec![0.3],
            lpinfor: 0.09,
            aic_path: vec![],
            n: 4,
        };
        let cop = copula_maxent(&model, &bx, &bx).unwrap();
        assert!((cop.moment(1, 1) - 0.3).abs() < 1e-8);
        assert!((cop.integral() - 1.0).abs() < 1e-9);
        // symmetric binary case solves in closed form: E[phi] = tanh(theta)
        assert!((cop.coefficients()[0] - 0.3f64.atanh()).abs() < 1e-6);
    }

    #[test]
    fn maxent_rejects_infeasible_target() {
        let x = vec![0.0, 0.0, 1.0, 1.0];
        let pair = PairedSample::new(x.clone(), x).unwrap();
        let bx = ScoreBasis::new(pair.x(), 1).unwrap();
        let model = SelectedModel {
            pairs: vec![(1, 1)],
            coefficients: vec![1.2],
            lpinfor: 1.44,
            aic_path: vec![],
            n: 4,
        };
        assert!(matches!(
            copula_maxent(&model, &bx, &bx).unwrap_err(),
            Error::MomentInfeasible | Error::NonConvergence { .. }
        ));
    }

    #[test]
    fn conditional_profile_identities() {
        // independence-like empty model: identically zero profile
        let x = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let pair = PairedSample::new(x.clone(), x).unwrap();
        let bx = ScoreBasis::new(pair.x(), 3).unwrap();
        let empty = SelectedModel {
            pairs: vec![],
            coefficients: vec![],
            lpinfor: 0.0,
            aic_path: vec![],
            n: 5,
        };
        let grid: Vec<f64> = (1..20).map(|i| i as f64 / 20.0).collect();
        let prof = conditional_profile(&empty, &bx, &grid);
        assert!(prof.lpinfor().iter().all(|&v| v == 0.0));
        assert_eq!(prof.integrated_lpinfor(), 0.0);

        // single pair (1,1) with coefficient c: integral = c^2 exactly
        let c = 0.42;
        let single = SelectedModel {
            pairs: vec![(1, 1)],
            coefficients: vec![c],
            lpinfor: c * c,
            aic_path: vec![],
            n: 5,
        };
        let prof = conditional_profile(&single, &bx, &grid);
        assert!((prof.integrated_lpinfor() - c * c).abs() < 1e-12);
        for (i, &u) in grid.iter().enumerate() {
            let s1 = bx.eval_s(1, u).unwrap();
            assert!((prof.lpinfor()[i] - c * c * s1 * s1).abs() < 1e-12);
        }
    }

    #[test]
    fn conditional_moments_match_indicator_correlation() {
        // 3x3 table: corr(T_k(Y), I(X=x)) = sqrt(odds(P[X=x])) LP(k; Y|X=x)
        let pair = paired_from_counts(&[
            (0.0, 0.0, 3),
            (0.0, 1.0, 1),
            (0.0, 2.0, 1),
            (1.0, 0.0, 1),
            (1.0, 1.0, 4),
            (1.0, 2.0, 2),
            (2.0, 0.0, 1),
            (2.0, 1.0, 1),
            (2.0, 2.0, 6),
        ])
        .unwrap();
        let lp = matrix_from(&pair, 2);
        let full = SelectedModel::with_all_pairs(&lp, pair.n());
        let bx = ScoreBasis::new(pair.x(), 2).unwrap();
        let by = ScoreBasis::new(pair.y(), 2).unwrap();
        let n = pair.n() as f64;
        let xv = pair.x().values();
        let yv = pair.y().values();
        let iy = pair.y().obs_support_indices();
        for (ix, &xval) in pair.x().support().iter().enumerate() {
            let px = pair.x().masses()[ix];
            let u = pair.x().cumulative()[ix] - 0.5 * px;
            let prof = conditional_profile(&full, &bx, &[u]);
            for k in 1..=by.effective_m() {
                // left side by direct enumeration
                let mut cov = 0.0;
                for i in 0..pair.n() {
                    let ind = if xv[i] == xval { 1.0 } else { 0.0 };
                    cov += (ind - px) * by.t_at(k, iy[i]);
                }
                cov /= n;
                let corr = cov / (px * (1.0 - px)).sqrt();
                let rhs = (px / (1.0 - px)).sqrt() * prof.moments()[0][k - 1];
                assert!(
                    (corr - rhs).abs() < 1e-10,
                    "x={xval} k={k}: {corr} vs {rhs}"
                );
            }
        }
        let _ = yv;
    }

    #[test]
    fn screening_ranks_duplicated_column_first() {
        let c1: Vec<Option<f64>> = (0..60).map(|i| Some((i as f64 * 0.37).sin())).collect();
        let c2: Vec<Option<f64>> = (0..60).map(|i| Some((i as f64 * 1.91).cos() * 3.0)).collect();
        let c3 = c1.clone();
        let out = screen_pairs(&[c1, c2, c3], 4).unwrap();
        assert_eq!((out.ranked[0].i, out.ranked[0].j), (0, 2));
        assert!(out.ranked[0].p_value < 1e-10);
    }

    #[test]
    fn screening_skips_degenerate_and_reports_missing() {
        let c1: Vec<Option<f64>> = (0..30).map(|i| Some(i as f64)).collect();
        let c2: Vec<Option<f64>> = vec![Some(7.0); 30];
        let mut c3: Vec<Option<f64>> = (0..30).map(|i| Some((i * i) as f64)).collect();
        c3[4] = None;
        let out = screen_pairs(&[c1, c2, c3], 4).unwrap();
        // degenerate column 1 removes pairs (0,1) and (1,2)
        assert_eq!(out.ranked.len(), 1);
        assert_eq!((out.ranked[0].i, out.ranked[0].j), (0, 2));
        assert_eq!(out.ranked[0].n_used, 29);
        assert!(out.warnings.iter().any(|w| w.contains("degenerate")));
        assert!(out.warnings.iter().any(|w| w.contains("dropped 1 rows")));
    }

    #[test]
    fn screening_needs_two_columns() {
        let c1: Vec<Option<f64>> = vec![Some(1.0), Some(2.0)];
        assert_eq!(
            screen_pairs(&[c1], 4).unwrap_err(),
            Error::NotEnoughColumns
        );
    }

    #[test]
    fn identity_pair_full_matrix_has_unit_lpinfor_rate() {
        // Y = X: LP(j,j) = 1, so full-basis LPINFOR = m
        let x: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let pair = PairedSample::new(x.clone(), x).unwrap();
        let lp = matrix_from(&pair, 3);
        let model = aic_select(&lp, pair.n());
        assert!((model.lpinfor() - 3.0).abs() < 1e-9);
        assert!(model.coefficient_of(1, 1).is_some());
    }
}
