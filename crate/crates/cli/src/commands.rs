//! The seven analysis commands. Each returns JSON results plus the tables
//! and charts the file formats emit.

use crate::dataset::Dataset;
use crate::errors::{CliError, CliResult};
use crate::report::{num, slug, CommandOutput, NamedChart, Table};
use crate::svg::{padded_range, Chart, SERIES_COLORS};
use lpstat_core::compdensity::{gof_accept_reject, neyman_fit, StartFamily};
use lpstat_core::dependence::{
    aic_select, conditional_profile, copula_l2, copula_maxent, lpinfor_test, screen_pairs,
    CopulaEstimate, CopulaKind, SelectedModel,
};
use lpstat_core::lpmoments::{
    gini_correlation, lp_comoment_matrix_with, pearson_representation, GiniDirection, LpMatrix,
};
use lpstat_core::regression::{fit_regression, Selection};
use lpstat_core::{PairedSample, Sample, ScoreBasis};
use serde_json::json;

pub struct Inputs<'a> {
    pub dataset: &'a Dataset,
    pub x: Option<&'a str>,
    pub y: Option<&'a str>,
    pub m: usize,
    pub start: StartFamily,
    pub estimator: EstimatorChoice,
    pub select: Selection,
    pub seed: u64,
    pub gof: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorChoice {
    L2,
    MaxEnt,
}

impl Inputs<'_> {
    fn require_x(&self) -> CliResult<&str> {
        self.x
            .ok_or_else(|| CliError::Usage("--x COLUMN is required for this command".into()))
    }

    fn require_y(&self) -> CliResult<&str> {
        self.y
            .ok_or_else(|| CliError::Usage("--y COLUMN is required for this command".into()))
    }

    /// Columns requested: x, plus y when present.
    fn requested_columns(&self) -> CliResult<Vec<String>> {
        let mut cols = vec![self.require_x()?.to_string()];
        if let Some(y) = self.y {
            cols.push(y.to_string());
        }
        Ok(cols)
    }

    fn load_column(&self, name: &str, warnings: &mut Vec<String>) -> CliResult<Sample> {
        let idx = self.dataset.column_index(name)?;
        let (values, dropped) = self.dataset.complete_column(idx);
        if dropped > 0 {
            warnings.push(format!("column '{name}': dropped {dropped} missing cells"));
        }
        Sample::new(values)
            .map_err(|e| CliError::Data(format!("column '{name}': {e}")))
    }

    fn load_pair(&self, warnings: &mut Vec<String>) -> CliResult<(PairedSample, String, String)> {
        let xn = self.require_x()?.to_string();
        let yn = self.require_y()?.to_string();
        let ix = self.dataset.column_index(&xn)?;
        let iy = self.dataset.column_index(&yn)?;
        let (xs, ys, dropped) = self.dataset.complete_pair(ix, iy);
        if dropped > 0 {
            warnings.push(format!(
                "pair ('{xn}','{yn}'): dropped {dropped} rows with missing cells"
            ));
        }
        let pair = PairedSample::new(xs, ys)
            .map_err(|e| CliError::Data(format!("pair ('{xn}','{yn}'): {e}")))?;
        Ok((pair, xn, yn))
    }
}

fn grid_midpoints(k: usize) -> Vec<f64> {
    (0..k).map(|i| (i as f64 + 0.5) / k as f64).collect()
}

fn interior_maxima(values: &[f64]) -> usize {
    values
        .windows(3)
        .filter(|w| w[1] > w[0] && w[1] > w[2])
        .count()
}

/// Step segments (u_lo, u_hi, value) of one score function over the support.
fn score_segments(sample: &Sample, basis: &ScoreBasis, j: usize) -> Vec<(f64, f64, f64)> {
    let mut lo = 0.0;
    sample
        .cumulative()
        .iter()
        .enumerate()
        .map(|(i, &hi)| {
            let seg = (lo, hi, basis.t_at(j, i));
            lo = hi;
            seg
        })
        .collect()
}

pub fn cmd_summarize(inputs: &Inputs) -> CliResult<CommandOutput> {
    let mut warnings = inputs.dataset.parse_warnings();
    let mut results = Vec::new();
    let mut tables = Vec::new();
    let mut charts = Vec::new();
    for name in inputs.requested_columns()? {
        let sample = inputs.load_column(&name, &mut warnings)?;
        let md = sample.mid_distribution();
        let knots: Vec<(f64, f64)> = md
            .fmid()
            .iter()
            .zip(md.support())
            .map(|(&u, &x)| (u, x))
            .collect();
        let grid: Vec<f64> = (1..200).map(|k| k as f64 / 200.0).collect();
        let qmid: Vec<f64> = grid.iter().map(|&u| md.mid_quantile(u)).collect();
        let qiq: Option<Vec<f64>> = match md.informative_quantile(0.5) {
            Ok(_) => Some(
                grid.iter()
                    .map(|&u| md.informative_quantile(u).unwrap())
                    .collect(),
            ),
            Err(_) => {
                warnings.push(format!(
                    "column '{name}': degenerate scale, informative quantile omitted"
                ));
                None
            }
        };

        let stem = slug(&name);
        let mut tq = Table::new(
            format!("summarize_{stem}_quantile"),
            &["u", "qmid", "kind"],
        );
        for (&u, &q) in grid.iter().zip(&qmid) {
            tq.push(vec![num(u), num(q), "grid".into()]);
        }
        for &(u, x) in &knots {
            tq.push(vec![num(u), num(x), "knot".into()]);
        }
        let y_range = padded_range(qmid.iter().copied());
        let mut cq = Chart::new(
            &format!("Mid-quantile: {name}"),
            "u",
            "Qmid(u)",
            (0.0, 1.0),
            y_range,
        );
        cq.polyline(
            &grid.iter().copied().zip(qmid.iter().copied()).collect::<Vec<_>>(),
            SERIES_COLORS[0],
            None,
        );
        cq.points(&knots.iter().map(|&(u, x)| (u, x)).collect::<Vec<_>>(), SERIES_COLORS[1], 1.6);
        tables.push(tq);
        charts.push(NamedChart {
            name: format!("summarize_{stem}_quantile"),
            chart: cq,
        });

        if let Some(qiq_vals) = &qiq {
            let mut tb = Table::new(format!("summarize_{stem}_qiq"), &["u", "qiq"]);
            for (&u, &q) in grid.iter().zip(qiq_vals) {
                tb.push(vec![num(u), num(q)]);
            }
            let mut cb = Chart::new(
                &format!("Informative quantile: {name}"),
                "u",
                "QIQ(u)",
                (0.0, 1.0),
                padded_range(qiq_vals.iter().copied()),
            );
            cb.polyline(
                &grid.iter().copied().zip(qiq_vals.iter().copied()).collect::<Vec<_>>(),
                SERIES_COLORS[0],
                None,
            );
            tables.push(tb);
            charts.push(NamedChart {
                name: format!("summarize_{stem}_qiq"),
                chart: cb,
            });
        }

        results.push(json!({
            "column": name,
            "n": sample.n(),
            "support_points": sample.support().len(),
            "quantile_knots": knots.iter().map(|&(u, x)| json!([u, x])).collect::<Vec<_>>(),
            "qiq": qiq.as_ref().map(|v| grid.iter().zip(v).map(|(&u, &q)| json!([u, q])).collect::<Vec<_>>()),
        }));
    }
    Ok(CommandOutput {
        results: json!({ "columns": results }),
        warnings,
        tables,
        charts,
    })
}

pub fn cmd_scores(inputs: &Inputs) -> CliResult<CommandOutput> {
    let mut warnings = inputs.dataset.parse_warnings();
    let mut results = Vec::new();
    let mut tables = Vec::new();
    let mut charts = Vec::new();
    for name in inputs.requested_columns()? {
        let sample = inputs.load_column(&name, &mut warnings)?;
        let basis = ScoreBasis::new(&sample, inputs.m)
            .map_err(|e| CliError::Data(format!("column '{name}': {e}")))?;
        if basis.effective_m() < inputs.m {
            warnings.push(format!(
                "column '{name}': degree truncated to {} ({} support points)",
                basis.effective_m(),
                sample.support().len()
            ));
        }
        let stem = slug(&name);
        let mut table = Table::new(format!("scores_{stem}"), &["j", "u_lo", "u_hi", "value"]);
        let mut chart = Chart::new(
            &format!("Score functions: {name}"),
            "u",
            "S_j(u)",
            (0.0, 1.0),
            padded_range((1..=basis.effective_m()).flat_map(|j| {
                basis.t_values(j).unwrap().to_vec()
            })),
        );
        let mut per_j = Vec::new();
        for j in 1..=basis.effective_m() {
            let segments = score_segments(&sample, &basis, j);
            for &(lo, hi, v) in &segments {
                table.push(vec![j.to_string(), num(lo), num(hi), num(v)]);
            }
            chart.step_line(
                &segments,
                SERIES_COLORS[(j - 1) % SERIES_COLORS.len()],
                Some(&format!("S_{j}")),
            );
            per_j.push(json!({
                "j": j,
                "segments": segments.iter().map(|&(lo, hi, v)| json!([lo, hi, v])).collect::<Vec<_>>(),
            }));
        }
        tables.push(table);
        charts.push(NamedChart {
            name: format!("scores_{stem}"),
            chart,
        });
        results.push(json!({
            "column": name,
            "n": sample.n(),
            "effective_m": basis.effective_m(),
            "scores": per_j,
        }));
    }
    Ok(CommandOutput {
        results: json!({ "columns": results }),
        warnings,
        tables,
        charts,
    })
}

fn build_pair_analysis(
    inputs: &Inputs,
    warnings: &mut Vec<String>,
) -> CliResult<(PairedSample, ScoreBasis, ScoreBasis, LpMatrix, SelectedModel, String, String)> {
    let (pair, xn, yn) = inputs.load_pair(warnings)?;
    let bx = ScoreBasis::new(pair.x(), inputs.m)
        .map_err(|e| CliError::Data(format!("column '{xn}': {e}")))?;
    let by = ScoreBasis::new(pair.y(), inputs.m)
        .map_err(|e| CliError::Data(format!("column '{yn}': {e}")))?;
    if bx.effective_m() < inputs.m {
        warnings.push(format!(
            "column '{xn}': degree truncated to {}",
            bx.effective_m()
        ));
    }
    if by.effective_m() < inputs.m {
        warnings.push(format!(
            "column '{yn}': degree truncated to {}",
            by.effective_m()
        ));
    }
    let lp = lp_comoment_matrix_with(&pair, &bx, &by)?;
    let model = aic_select(&lp, pair.n());
    Ok((pair, bx, by, lp, model, xn, yn))
}

pub fn cmd_comoments(inputs: &Inputs) -> CliResult<CommandOutput> {
    let mut warnings = inputs.dataset.parse_warnings();
    let (pair, _bx, _by, lp, model, xn, yn) = build_pair_analysis(inputs, &mut warnings)?;
    let test = lpinfor_test(&model);
    let var_x = pair.x().variance();
    let var_y = pair.y().variance();
    let pearson_r = lp.get(0, 0) / (var_x * var_y).sqrt();

    let matrix: Vec<Vec<f64>> = (0..=lp.m_x())
        .map(|j| (0..=lp.m_y()).map(|k| lp.get(j, k)).collect())
        .collect();

    let mut tm = Table::new("comoments_matrix", &["j", "k", "value"]);
    for (j, row) in matrix.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            tm.push(vec![j.to_string(), k.to_string(), num(v)]);
        }
    }
    let mut ts = Table::new(
        "comoments_selected",
        &["rank", "j", "k", "coefficient", "squared", "aic"],
    );
    for (i, (&(j, k), &c)) in model.pairs().iter().zip(model.coefficients()).enumerate() {
        ts.push(vec![
            (i + 1).to_string(),
            j.to_string(),
            k.to_string(),
            num(c),
            num(c * c),
            num(model.aic_path()[i]),
        ]);
    }

    // heatmap of |LP(j,k)| over the rank-invariant inner block
    let peak = lp
        .inner_entries()
        .iter()
        .map(|&(_, _, v)| v.abs())
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let mut chart = Chart::new(
        &format!("|LP(j,k)| for {xn} vs {yn}"),
        "k (columns)",
        "j (rows)",
        (0.5, lp.m_y() as f64 + 0.5),
        (0.5, lp.m_x() as f64 + 0.5),
    );
    for &(j, k, v) in &lp.inner_entries() {
        chart.heat_cell(
            k as f64 - 0.5,
            k as f64 + 0.5,
            j as f64 - 0.5,
            j as f64 + 0.5,
            v.abs() / peak,
        );
    }

    let results = json!({
        "x": xn,
        "y": yn,
        "n": pair.n(),
        "m_x": lp.m_x(),
        "m_y": lp.m_y(),
        "matrix": matrix,
        "pearson_r": pearson_r,
        "lp11": lp.get(1, 1),
        "selected": model.pairs().iter().zip(model.coefficients())
            .map(|(&(j, k), &c)| json!({"j": j, "k": k, "coefficient": c}))
            .collect::<Vec<_>>(),
        "lpinfor": model.lpinfor(),
        "aic_path": model.aic_path(),
        "chi_square": {
            "statistic": test.statistic,
            "dof": test.dof,
            "p_value": test.p_value,
        },
    });
    Ok(CommandOutput {
        results,
        warnings,
        tables: vec![tm, ts],
        charts: vec![NamedChart {
            name: "comoments_matrix".into(),
            chart,
        }],
    })
}

const SLICE_US: [f64; 5] = [0.1, 0.25, 0.5, 0.75, 0.9];
const HEATMAP_CELLS: usize = 64;
const SLICE_POINTS: usize = 256;
const MOMENT_CHECK_MAX_CELLS: usize = 65_536;

pub fn cmd_copula(inputs: &Inputs) -> CliResult<CommandOutput> {
    let mut warnings = inputs.dataset.parse_warnings();
    let (pair, bx, by, _lp, model, xn, yn) = build_pair_analysis(inputs, &mut warnings)?;

    let estimate: CopulaEstimate = match inputs.estimator {
        EstimatorChoice::L2 => copula_l2(&model, &bx, &by),
        EstimatorChoice::MaxEnt => copula_maxent(&model, &bx, &by)?,
    };

    if estimate.kind() == CopulaKind::MaxEnt && !model.is_empty() {
        // grid-sensitivity check on the fitted moments
        let cells = pair.x().support().len() * pair.y().support().len();
        let residual: f64 = if cells <= MOMENT_CHECK_MAX_CELLS {
            estimate
                .pairs()
                .iter()
                .zip(model.coefficients())
                .map(|(&(j, k), &target)| (estimate.moment(j, k) - target).abs())
                .fold(0.0, f64::max)
        } else {
            estimate
                .moments_on_gauss_grid(128)
                .iter()
                .zip(model.coefficients())
                .map(|((_, _, m), &target)| (m - target).abs())
                .fold(0.0, f64::max)
        };
        if residual > 1e-7 {
            warnings.push(format!(
                "maxent moment residual under refined integration: {residual:.3e}"
            ));
        }
    }

    let grid = grid_midpoints(HEATMAP_CELLS);
    let values: Vec<Vec<f64>> = grid
        .iter()
        .map(|&u| {
            grid.iter()
                .map(|&v| estimate.evaluate(u, v).unwrap())
                .collect()
        })
        .collect();
    let vgrid = grid_midpoints(SLICE_POINTS);
    let slices: Vec<(f64, Vec<f64>)> = SLICE_US
        .iter()
        .map(|&u| {
            (
                u,
                vgrid.iter().map(|&v| estimate.evaluate(u, v).unwrap()).collect(),
            )
        })
        .collect();

    let mut th = Table::new("copula_heatmap", &["u", "v", "value"]);
    for (i, &u) in grid.iter().enumerate() {
        for (j, &v) in grid.iter().enumerate() {
            th.push(vec![num(u), num(v), num(values[i][j])]);
        }
    }
    let mut tslice = Table::new("copula_slices", &["slice_u", "v", "value"]);
    for (u, vals) in &slices {
        for (&v, &c) in vgrid.iter().zip(vals) {
            tslice.push(vec![num(*u), num(v), num(c)]);
        }
    }

    let peak = values
        .iter()
        .flatten()
        .copied()
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let mut heat = Chart::new(
        &format!("Copula density ({})", estimator_name(inputs.estimator)),
        "u",
        "v",
        (0.0, 1.0),
        (0.0, 1.0),
    );
    let w = 1.0 / HEATMAP_CELLS as f64;
    for (i, &u) in grid.iter().enumerate() {
        for (j, &v) in grid.iter().enumerate() {
            heat.heat_cell(
                u - 0.5 * w,
                u + 0.5 * w,
                v - 0.5 * w,
                v + 0.5 * w,
                (values[i][j] / peak).max(0.0),
            );
        }
    }
    let mut slice_chart = Chart::new(
        &format!("Copula slices: {xn} vs {yn}"),
        "v",
        "cop(u, v)",
        (0.0, 1.0),
        padded_range(slices.iter().flat_map(|(_, vals)| vals.iter().copied())),
    );
    for (i, (u, vals)) in slices.iter().enumerate() {
        slice_chart.polyline(
            &vgrid.iter().copied().zip(vals.iter().copied()).collect::<Vec<_>>(),
            SERIES_COLORS[i % SERIES_COLORS.len()],
            Some(&format!("u={u}")),
        );
    }

    let profile = conditional_profile(&model, &bx, &grid);
    let results = json!({
        "x": xn,
        "y": yn,
        "n": pair.n(),
        "estimator": estimator_name(inputs.estimator),
        "pairs": estimate.pairs().iter().zip(estimate.coefficients())
            .map(|(&(j, k), &c)| json!({"j": j, "k": k, "coefficient": c}))
            .collect::<Vec<_>>(),
        "lpinfor": model.lpinfor(),
        "theta0": if estimate.kind() == CopulaKind::MaxEnt { Some(estimate.theta0()) } else { None },
        "integral": estimate.integral(),
        "heatmap": { "u": grid, "v": grid, "values": values },
        "slices": slices.iter().map(|(u, vals)| json!({"u": u, "v": vgrid, "values": vals})).collect::<Vec<_>>(),
        "conditional_lpinfor": {
            "u": profile.u_grid(),
            "values": profile.lpinfor(),
            "integrated": profile.integrated_lpinfor(),
        },
    });
    Ok(CommandOutput {
        results,
        warnings,
        tables: vec![th, tslice],
        charts: vec![
            NamedChart {
                name: "copula_heatmap".into(),
                chart: heat,
            },
            NamedChart {
                name: "copula_slices".into(),
                chart: slice_chart,
            },
        ],
    })
}

fn estimator_name(e: EstimatorChoice) -> &'static str {
    match e {
        EstimatorChoice::L2 => "l2",
        EstimatorChoice::MaxEnt => "maxent",
    }
}

pub fn cmd_density(inputs: &Inputs) -> CliResult<CommandOutput> {
    let mut warnings = inputs.dataset.parse_warnings();
    let name = inputs.require_x()?.to_string();
    let sample = inputs.load_column(&name, &mut warnings)?;
    let start = inputs
        .start
        .fit(&sample)
        .map_err(|e| CliError::Data(format!("start fit for '{name}': {e}")))?;
    let fit = neyman_fit(&sample, start, inputs.m)?;
    warnings.extend(fit.warnings().iter().cloned());

    let ugrid = grid_midpoints(512);
    let dhat: Vec<f64> = ugrid.iter().map(|&u| fit.dhat(u)).collect();
    let lo = sample.support()[0];
    let hi = sample.support()[sample.support().len() - 1];
    let pad = 0.05 * (hi - lo).max(1e-12);
    let xgrid: Vec<f64> = (0..512)
        .map(|i| lo - pad + (hi - lo + 2.0 * pad) * (i as f64 + 0.5) / 512.0)
        .collect();
    let fhat: Vec<f64> = xgrid.iter().map(|&x| fit.density_at(x)).collect();
    let g: Vec<f64> = xgrid.iter().map(|&x| fit.start().pdf(x)).collect();

    let gof = if inputs.gof {
        let d = gof_accept_reject(&fit, &sample, inputs.seed, 1000);
        Some(json!({
            "observed_ks": d.observed_ks,
            "simulated_ks": d.simulated_ks,
            "envelope": d.envelope,
            "n_sim": d.n_sim,
            "acceptance_rate": d.acceptance_rate,
        }))
    } else {
        None
    };

    let mut td = Table::new("density_dhat", &["u", "dhat"]);
    for (&u, &d) in ugrid.iter().zip(&dhat) {
        td.push(vec![num(u), num(d)]);
    }
    let mut tf = Table::new("density_fhat", &["x", "fhat", "start_pdf"]);
    for i in 0..xgrid.len() {
        tf.push(vec![num(xgrid[i]), num(fhat[i]), num(g[i])]);
    }

    let mut cd = Chart::new(
        &format!("Comparison density: {name}"),
        "u",
        "dhat(u)",
        (0.0, 1.0),
        padded_range(dhat.iter().copied().chain([1.0])),
    );
    cd.polyline(
        &ugrid.iter().copied().zip(dhat.iter().copied()).collect::<Vec<_>>(),
        SERIES_COLORS[0],
        Some("dhat"),
    );
    cd.polyline(&[(0.0, 1.0), (1.0, 1.0)], "#999999", Some("1"));
    let mut cf = Chart::new(
        &format!("Density estimate: {name}"),
        &name,
        "density",
        padded_range(xgrid.iter().copied()),
        padded_range(fhat.iter().copied().chain(g.iter().copied()).chain([0.0])),
    );
    cf.polyline(
        &xgrid.iter().copied().zip(fhat.iter().copied()).collect::<Vec<_>>(),
        SERIES_COLORS[0],
        Some("fhat"),
    );
    cf.polyline(
        &xgrid.iter().copied().zip(g.iter().copied()).collect::<Vec<_>>(),
        SERIES_COLORS[1],
        Some("start"),
    );

    let results = json!({
        "column": name,
        "n": sample.n(),
        "start": fit.start().label(),
        "theta": fit.theta(),
        "selected": fit.selected(),
        "integral_sq_dev": fit.integral_sq_dev(),
        "dhat": ugrid.iter().zip(&dhat).map(|(&u, &d)| json!([u, d])).collect::<Vec<_>>(),
        "fhat": xgrid.iter().zip(&fhat).map(|(&x, &f)| json!([x, f])).collect::<Vec<_>>(),
        "dhat_interior_maxima": interior_maxima(&dhat),
        "fhat_interior_maxima": interior_maxima(&fhat),
        "gof": gof,
    });
    Ok(CommandOutput {
        results,
        warnings,
        tables: vec![td, tf],
        charts: vec![
            NamedChart {
                name: "density_dhat".into(),
                chart: cd,
            },
            NamedChart {
                name: "density_fhat".into(),
                chart: cf,
            },
        ],
    })
}

pub fn cmd_regress(inputs: &Inputs) -> CliResult<CommandOutput> {
    let mut warnings = inputs.dataset.parse_warnings();
    let (pair, xn, yn) = inputs.load_pair(&mut warnings)?;
    let fit = fit_regression(&pair, inputs.m, inputs.select)?;
    let r_lp_raw = fit.r_lp_raw();

    let mut r_gini = |direction: GiniDirection| -> Option<f64> {
        match gini_correlation(&pair, direction) {
            Ok(v) => Some(v),
            Err(e) => {
                warnings.push(format!("gini correlation unavailable: {e}"));
                None
            }
        }
    };
    let gini_yx = r_gini(GiniDirection::YGivenX);
    let gini_xy = r_gini(GiniDirection::XGivenY);
    let pearson = match pearson_representation(&pair, inputs.m) {
        Ok(p) => Some(p),
        Err(e) => {
            warnings.push(format!("pearson representation unavailable: {e}"));
            None
        }
    };

    // fitted step curve in u and fitted values at the support
    let segments: Vec<(f64, f64, f64)> = {
        let mut lo = 0.0;
        pair.x()
            .cumulative()
            .iter()
            .zip(pair.x().support())
            .map(|(&hi, &x)| {
                let seg = (lo, hi, fit.eval_at_x(x));
                lo = hi;
                seg
            })
            .collect()
    };
    let at_support: Vec<(f64, f64)> = pair
        .x()
        .support()
        .iter()
        .map(|&x| (x, fit.eval_at_x(x)))
        .collect();

    let mut tu = Table::new("regress_fit_u", &["u_lo", "u_hi", "fitted"]);
    for &(lo, hi, v) in &segments {
        tu.push(vec![num(lo), num(hi), num(v)]);
    }
    let mut tx = Table::new("regress_scatter", &["x", "y", "fitted"]);
    for (i, (&x, &y)) in pair
        .x()
        .values()
        .iter()
        .zip(pair.y().values())
        .enumerate()
    {
        let _ = i;
        tx.push(vec![num(x), num(y), num(fit.eval_at_x(x))]);
    }

    let mut cu = Chart::new(
        &format!("E[{yn} | {xn} = Q(u)]"),
        "u",
        &format!("fitted {yn}"),
        (0.0, 1.0),
        padded_range(segments.iter().map(|&(_, _, v)| v)),
    );
    cu.step_line(&segments, SERIES_COLORS[0], None);
    let scatter: Vec<(f64, f64)> = pair
        .x()
        .values()
        .iter()
        .copied()
        .zip(pair.y().values().iter().copied())
        .collect();
    let mut cx = Chart::new(
        &format!("{yn} vs {xn} with score-series fit"),
        &xn,
        &yn,
        padded_range(scatter.iter().map(|&(x, _)| x)),
        padded_range(scatter.iter().map(|&(_, y)| y)),
    );
    cx.points(&scatter, "#888888", 1.8);
    cx.polyline(&at_support, SERIES_COLORS[1], Some("fit"));

    let results = json!({
        "x": xn,
        "y": yn,
        "n": pair.n(),
        "effective_m": fit.basis().effective_m(),
        "intercept": fit.intercept(),
        "coefficients": fit.all_coefficients(),
        "selected": fit.selected(),
        "r_lp": { "raw": r_lp_raw, "clamped": r_lp_raw.clamp(0.0, 1.0) },
        "r_gini": { "y_given_x": gini_yx, "x_given_y": gini_xy },
        "pearson": pearson.map(|p| json!({
            "r": p.pearson_r,
            "terms": p.terms,
            "partial_sums": p.partial_sums,
        })),
        "curve_u": segments.iter().map(|&(lo, hi, v)| json!([lo, hi, v])).collect::<Vec<_>>(),
        "fitted_at_support": at_support.iter().map(|&(x, v)| json!([x, v])).collect::<Vec<_>>(),
    });
    Ok(CommandOutput {
        results,
        warnings,
        tables: vec![tu, tx],
        charts: vec![
            NamedChart {
                name: "regress_fit_u".into(),
                chart: cu,
            },
            NamedChart {
                name: "regress_scatter".into(),
                chart: cx,
            },
        ],
    })
}

pub fn cmd_screen(inputs: &Inputs) -> CliResult<CommandOutput> {
    let mut warnings = inputs.dataset.parse_warnings();
    let outcome = screen_pairs(&inputs.dataset.columns, inputs.m)?;
    warnings.extend(outcome.warnings.iter().cloned());
    let names = &inputs.dataset.names;

    let mut table = Table::new(
        "screen",
        &[
            "rank", "i", "j", "col_i", "col_j", "n_used", "lpinfor", "statistic", "dof", "p_value",
        ],
    );
    for (r, p) in outcome.ranked.iter().enumerate() {
        table.push(vec![
            (r + 1).to_string(),
            p.i.to_string(),
            p.j.to_string(),
            names[p.i].clone(),
            names[p.j].clone(),
            p.n_used.to_string(),
            num(p.lpinfor),
            num(p.statistic),
            p.dof.to_string(),
            num(p.p_value),
        ]);
    }

    let top: Vec<_> = outcome.ranked.iter().take(20).collect();
    let mut chart = Chart::new(
        "Pairwise LPINFOR (top pairs)",
        "rank",
        "LPINFOR",
        (0.0, top.len().max(1) as f64 + 0.5),
        padded_range(top.iter().map(|p| p.lpinfor).chain([0.0])),
    );
    for (r, p) in top.iter().enumerate() {
        let x = r as f64 + 1.0;
        chart.heat_cell(x - 0.35, x + 0.35, 0.0, p.lpinfor, 0.75);
    }

    let results = json!({
        "columns": names,
        "m": inputs.m,
        "pairs": outcome.ranked.iter().map(|p| json!({
            "i": p.i,
            "j": p.j,
            "col_i": names[p.i],
            "col_j": names[p.j],
            "n_used": p.n_used,
            "lpinfor": p.lpinfor,
            "statistic": p.statistic,
            "dof": p.dof,
            "p_value": p.p_value,
        })).collect::<Vec<_>>(),
    });
    Ok(CommandOutput {
        results,
        warnings,
        tables: vec![table],
        charts: vec![NamedChart {
            name: "screen".into(),
            chart,
        }],
    })
}
