//! Quantile-based nonparametric statistics built on mid-distribution score
//! functions.
//!
//! Every variable, discrete or continuous, is reduced to its empirical
//! mid-distribution `Fmid(x) = F(x) - 0.5 p(x)`. From it we construct
//! orthonormal score functions `T_j(x)` (discrete Legendre-like polynomials
//! in the mid-rank), and from those LP comoments `LP(j,k) = E[T_j(X) T_k(Y)]`
//! which drive everything downstream:
//!
//! - [`dependence`]: LPINFOR dependence measures with AIC coefficient
//!   selection, the data-driven chi-square independence test, L2 and MaxEnt
//!   orthogonal-series copula density estimates, conditional LPINFOR
//!   profiles, and all-pairs dependence screening.
//! - [`lpmoments`]: LP comoment matrices, LP score moments and the variance
//!   identity, tail order, Gini correlation, extended multiple correlation
//!   R_LP, and the score-series representation of Pearson correlation.
//! - [`compdensity`]: comparison distributions/densities against a parametric
//!   start, Neyman orthogonal-series density estimation, and the logistic
//!   comparison-density fit for binary responses.
//! - [`regression`]: score-series nonparametric regression
//!   `E[Y | X = Q(u;X)]`.
//!
//! Scores depend only on ranks, so all inner (j,k >= 1) quantities are
//! invariant under strictly increasing transforms of either variable. All
//! empirical expectations use divisor n.

pub mod compdensity;
pub mod dependence;
pub mod empirical;
mod error;
mod linalg;
pub mod lpmoments;
pub mod quadrature;
pub mod regression;
pub mod scores;

pub use empirical::{MidDistribution, PairedSample, Sample};
pub use error::{Error, Result};
pub use scores::{LegendreBasis, ScoreBasis};
