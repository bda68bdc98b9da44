//! Heffernan–Tawn conditional extremes on Laplace margins.
//!
//! Given the conditioning variable `Y_i` above a high Laplace threshold `u`,
//! each other variable follows `Y_j = a Y_i + Y_i^b Z_j` with residual `Z_j`
//! independent of `Y_i`. Parameters come from a normal working likelihood for
//! `Z_j`; predictions resample the fitted residuals instead.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::margins::MarginTransform;
use crate::market_data::ReturnPanel;
use crate::numeric::{golden_section, laplace_cdf, laplace_quantile, quantile_type7, sorted};
use crate::optim::{minimize_with_restarts, nelder_mead, newton_polish, NelderMeadOptions};
use crate::plot::PlotData;
use crate::rng::Philox4x32;
use crate::smooth::lowess;
use crate::FitFlag;

/// Lower edge of the `b` search box.
pub const B_MIN: f64 = -5.0;
const SIGMA_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HtOptions {
    pub min_exceedances: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for HtOptions {
    fn default() -> Self {
        Self { min_exceedances: 50, restarts: 4, seed: 0x4854 }
    }
}

/// Dependence parameters for one target given the conditioning market.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HtTarget {
    pub market: String,
    pub a: f64,
    pub b: f64,
    pub mu: f64,
    pub sigma: f64,
    /// Unstandardized residuals `(Y_j - a Y_i) / Y_i^b`, row-aligned with
    /// [`HtFit::conditioning`].
    pub residuals: Vec<f64>,
    /// Maximized working log-likelihood.
    pub loglik: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HtFit {
    pub conditioning_market: String,
    pub dep_quantile: f64,
    /// Laplace threshold `u` the conditioning variable exceeds.
    pub threshold: f64,
    /// Conditioning values above `u`, in panel row order.
    pub conditioning: Vec<f64>,
    pub targets: Vec<HtTarget>,
    pub flags: Vec<FitFlag>,
}

impl HtFit {
    pub fn n_cond_exceed(&self) -> usize {
        self.conditioning.len()
    }

    pub fn target(&self, market: &str) -> Option<&HtTarget> {
        self.targets.iter().find(|t| t.market == market)
    }
}

/// Negative profile working log-likelihood of `(a, b)` with `μ`, `σ` at their
/// closed-form maximizers. Returns `(nll, μ̂, σ̂)`.
fn profile(a: f64, b: f64, yi: &[f64], ln_yi: &[f64], yj: &[f64]) -> (f64, f64, f64) {
    let n = yi.len() as f64;
    let mut sum = 0.0;
    let mut sum_ln = 0.0;
    for ((&x, &lx), &y) in yi.iter().zip(ln_yi).zip(yj) {
        sum += (y - a * x) * (-b * lx).exp();
        sum_ln += lx;
    }
    let mu = sum / n;
    let ss: f64 = yi.iter().zip(ln_yi).zip(yj).map(|((&x, &lx), &y)| ((y - a * x) * (-b * lx).exp() - mu).powi(2)).sum();
    let sigma = (ss / n).sqrt().max(SIGMA_FLOOR);
    let nll = n * sigma.ln() + b * sum_ln + 0.5 * n * (1.0 + (2.0 * std::f64::consts::PI).ln());
    (nll, mu, sigma)
}

/// Full negative working log-likelihood of `(a, b, μ, σ)`.
pub fn working_nll(params: &[f64], yi: &[f64], yj: &[f64]) -> f64 {
    let (a, b, mu, sigma) = (params[0], params[1], params[2], params[3]);
    if !(sigma > 0.0) {
        return f64::INFINITY;
    }
    let half_ln_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    yi.iter()
        .zip(yj)
        .map(|(&x, &y)| {
            let s = sigma * x.powf(b);
            let r = (y - a * x - mu * x.powf(b)) / s;
            half_ln_2pi + s.ln() + 0.5 * r * r
        })
        .sum()
}

fn in_box(a: f64, b: f64) -> bool {
    (-1.0..=1.0).contains(&a) && b > B_MIN && b < 1.0
}

fn fit_target(yi: &[f64], ln_yi: &[f64], yj: &[f64], opts: &HtOptions) -> (f64, f64, f64, f64, f64, bool) {
    let f = |p: &[f64]| if in_box(p[0], p[1]) { profile(p[0], p[1], yi, ln_yi, yj).0 } else { f64::INFINITY };
    let nm = NelderMeadOptions { max_evals: 2000, f_tol: 1e-12, x_tol: 1e-7 };
    let best_start = [[0.0, 0.0], [0.5, 0.3], [0.9, 0.1], [-0.5, 0.3]]
        .iter()
        .map(|s| nelder_mead(&f, s, &[0.2, 0.2], &NelderMeadOptions { max_evals: 200, ..nm }))
        .min_by(|p, q| p.value.total_cmp(&q.value))
        .expect("non-empty start set");
    let m = minimize_with_restarts(&f, &best_start.x, &[0.1, 0.1], opts.restarts, opts.seed, &nm);
    let mut x = m.x.clone();
    if x[0].abs() < 1.0 - 1e-6 {
        let polished = newton_polish(&f, &x, &[1e-6, 1e-6], 30);
        if f(&polished) <= f(&x) {
            x = polished;
        }
    }
    // the box edge a = ±1 is reachable; compare it with the interior optimum
    let edge = x[0].signum();
    if x[0].abs() > 0.99 {
        let (b_edge, v_edge) = golden_section(|b| f(&[edge, b]), B_MIN + 1e-9, 1.0 - 1e-9, 1e-10);
        let interior = f(&x);
        if v_edge <= interior + 1e-9 * interior.abs() {
            x = vec![edge, b_edge];
        }
    }
    let (nll, mu, sigma) = profile(x[0], x[1], yi, ln_yi, yj);
    (x[0], x[1], mu, sigma, -nll, m.converged)
}

pub fn fit_ht(panel: &ReturnPanel, conditioning: &str, dep_quantile: f64) -> Result<HtFit> {
    fit_ht_with(panel, conditioning, dep_quantile, &HtOptions::default())
}

/// Fits every other panel column against `conditioning`. The panel must
/// already be on the Laplace scale.
pub fn fit_ht_with(panel: &ReturnPanel, conditioning: &str, dep_quantile: f64, opts: &HtOptions) -> Result<HtFit> {
    if !(dep_quantile > 0.5 && dep_quantile < 1.0) {
        return Err(Error::invalid("dependence quantile must lie in (0.5, 1)"));
    }
    let ci = panel.index_of(conditioning).ok_or_else(|| Error::invalid(format!("unknown conditioning market {conditioning}")))?;
    if panel.n_markets() < 2 {
        return Err(Error::invalid("need at least one target market"));
    }
    let u = laplace_quantile(dep_quantile);
    let rows: Vec<usize> = (0..panel.n_rows()).filter(|&r| panel.columns[ci][r] > u).collect();
    if rows.len() < opts.min_exceedances {
        return Err(Error::TooFewExceedances { found: rows.len(), required: opts.min_exceedances });
    }
    let yi: Vec<f64> = rows.iter().map(|&r| panel.columns[ci][r]).collect();
    let ln_yi: Vec<f64> = yi.iter().map(|v| v.ln()).collect();

    let mut targets = Vec::new();
    let mut flags = Vec::new();
    for (j, id) in panel.market_ids.iter().enumerate() {
        if j == ci {
            continue;
        }
        let yj: Vec<f64> = rows.iter().map(|&r| panel.columns[j][r]).collect();
        let (a, b, mu, sigma, loglik, converged) = fit_target(&yi, &ln_yi, &yj, opts);
        if !converged {
            flags.push(FitFlag::BudgetExhausted);
        }
        if a.abs() >= 1.0 - 1e-6 {
            flags.push(FitFlag::Boundary { param: format!("a[{id}]"), value: a });
        }
        if b < B_MIN + 1e-3 {
            flags.push(FitFlag::Boundary { param: format!("b[{id}]"), value: b });
        }
        let residuals = yi.iter().zip(&ln_yi).zip(&yj).map(|((&x, &lx), &y)| (y - a * x) * (-b * lx).exp()).collect();
        targets.push(HtTarget { market: id.clone(), a, b, mu, sigma, residuals, loglik });
    }
    Ok(HtFit { conditioning_market: conditioning.to_string(), dep_quantile, threshold: u, conditioning: yi, targets, flags })
}

/// Residual diagnostics for one target.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HtDiagnostics {
    pub market: String,
    /// Columns `quantile, z, smooth`, sorted by quantile.
    pub residuals: PlotData,
    /// Columns `quantile, spread, smooth` with `spread = |Z - mean(Z)|`.
    pub spread: PlotData,
    /// Columns `y_cond, y_target` on the Laplace scale.
    pub scatter: PlotData,
    /// Columns `y_cond, q05, q50, q95`: fitted conditional quantile curves.
    pub curves: PlotData,
    pub smoothed: bool,
}

/// Below this many exceedances the lowess layers carry points only.
pub const MIN_SMOOTH_POINTS: usize = 10;
const LOWESS_SPAN: f64 = 2.0 / 3.0;

fn smoothed_layer(name: &str, q: &[f64], v: &[f64], smooth: bool) -> PlotData {
    let mut out = PlotData::new(&["quantile", name, "smooth"]);
    let mut idx: Vec<usize> = (0..q.len()).collect();
    idx.sort_by(|&a, &b| q[a].total_cmp(&q[b]));
    let fitted = if smooth { Some(lowess(q, v, LOWESS_SPAN, 0).1) } else { None };
    for (k, &i) in idx.iter().enumerate() {
        let s = fitted.as_ref().map_or(f64::NAN, |f| f[k]);
        out.push(vec![q[i], v[i], s]);
    }
    out
}

/// Conditional quantile of `Y_j` at `y_cond`: `a y + y^b q_Z(level)`.
pub fn conditional_quantile(target: &HtTarget, y_cond: f64, level: f64) -> f64 {
    let z = quantile_type7(&sorted(&target.residuals), level);
    target.a * y_cond + y_cond.powf(target.b) * z
}

pub fn ht_diagnostics(fit: &HtFit) -> Vec<HtDiagnostics> {
    let q: Vec<f64> = fit.conditioning.iter().map(|&y| laplace_cdf(y)).collect();
    let smooth = fit.n_cond_exceed() >= MIN_SMOOTH_POINTS;
    let hi = fit.conditioning.iter().cloned().fold(fit.threshold, f64::max);
    fit.targets
        .iter()
        .map(|t| {
            let mean = t.residuals.iter().sum::<f64>() / t.residuals.len() as f64;
            let spread: Vec<f64> = t.residuals.iter().map(|z| (z - mean).abs()).collect();
            let mut scatter = PlotData::new(&["y_cond", "y_target"]);
            for (&x, &z) in fit.conditioning.iter().zip(&t.residuals) {
                scatter.push(vec![x, t.a * x + x.powf(t.b) * z]);
            }
            let zs = sorted(&t.residuals);
            let zq = [0.05, 0.5, 0.95].map(|p| quantile_type7(&zs, p));
            let mut curves = PlotData::new(&["y_cond", "q05", "q50", "q95"]);
            for k in 0..=100 {
                let x = fit.threshold + (hi - fit.threshold) * k as f64 / 100.0;
                let mut row = vec![x];
                row.extend(zq.iter().map(|z| t.a * x + x.powf(t.b) * z));
                curves.push(row);
            }
            HtDiagnostics {
                market: t.market.clone(),
                residuals: smoothed_layer("z", &q, &t.residuals, smooth),
                spread: smoothed_layer("spread", &q, &spread, smooth),
                scatter,
                curves,
                smoothed: smooth,
            }
        })
        .collect()
}

/// Threshold each target must exceed in a prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetThreshold {
    /// The Laplace quantile at the fit's dependence level.
    DependenceQuantile,
    /// The Laplace quantile at the given level, shared by all targets.
    Quantile(f64),
    /// Per-target thresholds on the return scale, mapped through the
    /// target's marginal transform.
    Returns(Vec<f64>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictOptions {
    pub pred_quantile: f64,
    pub n_importance: usize,
    pub seed: u64,
    pub target: TargetThreshold,
}

impl Default for PredictOptions {
    fn default() -> Self {
        Self { pred_quantile: 0.9, n_importance: 100_000, seed: 0x5052, target: TargetThreshold::DependenceQuantile }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionResult {
    pub conditioning_market: String,
    pub pred_quantile: f64,
    pub targets: Vec<String>,
    pub probabilities: Vec<f64>,
    pub n_importance: usize,
    pub seed: u64,
}

/// Probability that each target exceeds its threshold given the conditioning
/// variable is above its `pred_quantile` quantile. Conditioning draws come
/// from the exponential Laplace tail; residual rows are resampled jointly.
/// `margins` (one per target, in fit order) is needed only for
/// [`TargetThreshold::Returns`].
pub fn predict_exceedance_prob(fit: &HtFit, margins: Option<&[MarginTransform]>, opts: &PredictOptions) -> Result<PredictionResult> {
    if !(opts.pred_quantile >= fit.dep_quantile && opts.pred_quantile < 1.0) {
        return Err(Error::invalid("prediction quantile must lie in [dependence quantile, 1)"));
    }
    if opts.n_importance == 0 {
        return Err(Error::invalid("importance sample size must be positive"));
    }
    let rows = fit.n_cond_exceed();
    if rows == 0 || fit.targets.iter().any(|t| t.residuals.len() != rows) {
        return Err(Error::invalid("empty or ragged residual set"));
    }
    let thresholds: Vec<f64> = match &opts.target {
        TargetThreshold::DependenceQuantile => vec![fit.threshold; fit.targets.len()],
        TargetThreshold::Quantile(p) => vec![laplace_quantile(*p); fit.targets.len()],
        TargetThreshold::Returns(x) => {
            let m = margins.ok_or_else(|| Error::invalid("return-scale thresholds need marginal transforms"))?;
            if m.len() != fit.targets.len() || x.len() != fit.targets.len() {
                return Err(Error::invalid("one threshold and one transform per target required"));
            }
            m.iter().zip(x).map(|(t, &v)| t.to_laplace(v)).collect()
        }
    };
    let v = laplace_quantile(opts.pred_quantile);
    let mut rng = Philox4x32::new(opts.seed);
    let mut hits = vec![0usize; fit.targets.len()];
    for _ in 0..opts.n_importance {
        let y = v + rng.exponential();
        let row = rng.below(rows);
        for (k, t) in fit.targets.iter().enumerate() {
            if t.a * y + y.powf(t.b) * t.residuals[row] > thresholds[k] {
                hits[k] += 1;
            }
        }
    }
    Ok(PredictionResult {
        conditioning_market: fit.conditioning_market.clone(),
        pred_quantile: opts.pred_quantile,
        targets: fit.targets.iter().map(|t| t.market.clone()).collect(),
        probabilities: hits.iter().map(|&h| h as f64 / opts.n_importance as f64).collect(),
        n_importance: opts.n_importance,
        seed: opts.seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Magnitude {
    VeryWeak,
    Weak,
    FairlyStrong,
    Strong,
}

impl Magnitude {
    pub fn label(self) -> &'static str {
        match self {
            Magnitude::VeryWeak => "very weak",
            Magnitude::Weak => "weak",
            Magnitude::FairlyStrong => "fairly strong",
            Magnitude::Strong => "strong",
        }
    }
}

/// Verbal reading of a fitted `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DependenceLabel {
    Independence,
    Directed { magnitude: Magnitude, positive: bool },
}

impl fmt::Display for DependenceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DependenceLabel::Independence => f.write_str("independence"),
            DependenceLabel::Directed { magnitude, positive } => {
                write!(f, "{} {}", magnitude.label(), if *positive { "positive" } else { "negative" })
            }
        }
    }
}

pub fn classify_dependence(a: f64) -> Result<DependenceLabel> {
    if !(a.abs() <= 1.0) {
        return Err(Error::domain(format!("a = {a} outside [-1, 1]")));
    }
    if a == 0.0 {
        return Ok(DependenceLabel::Independence);
    }
    let m = a.abs();
    let magnitude = if m < 0.1 {
        Magnitude::VeryWeak
    } else if m < 0.3 {
        Magnitude::Weak
    } else if m < 0.6 {
        Magnitude::FairlyStrong
    } else {
        Magnitude::Strong
    };
    Ok(DependenceLabel::Directed { magnitude, positive: a > 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::fd_gradient;
    use crate::simulate::{sim_gauss_copula_panel, CopulaMargin};
    use chrono::NaiveDate;

    fn panel(cols: Vec<Vec<f64>>) -> ReturnPanel {
        let n = cols[0].len();
        let start = NaiveDate::from_ymd_opt(2000, 1, 3).unwrap();
        let dates = crate::simulate::business_days(start, n);
        let ids = (0..cols.len()).map(|k| format!("M{k}")).collect();
        ReturnPanel::new(ids, dates, cols).unwrap()
    }

    fn laplace_pair(rho: f64, n: usize, seed: u64) -> ReturnPanel {
        let corr = vec![vec![1.0, rho], vec![rho, 1.0]];
        sim_gauss_copula_panel(&["A", "B"], &corr, n, seed, CopulaMargin::Laplace).unwrap()
    }

    fn hand_fit(a: f64, b: f64, conditioning: Vec<f64>, residuals: Vec<f64>, dep_quantile: f64) -> HtFit {
        HtFit {
            conditioning_market: "A".into(),
            dep_quantile,
            threshold: laplace_quantile(dep_quantile),
            conditioning,
            targets: vec![HtTarget { market: "B".into(), a, b, mu: 0.0, sigma: 1.0, residuals, loglik: 0.0 }],
            flags: vec![],
        }
    }

    #[test]
    fn duplicate_column_hits_the_boundary() {
        let p = laplace_pair(0.5, 2000, 1);
        let dup = panel(vec![p.columns[0].clone(), p.columns[0].clone()]);
        let fit = fit_ht(&dup, "M0", 0.7).unwrap();
        let t = &fit.targets[0];
        assert_eq!(t.a, 1.0);
        assert!(crate::numeric::variance(&t.residuals) < 1e-10);
        assert!(fit.flags.iter().any(|f| matches!(f, FitFlag::Boundary { .. })));
    }

    #[test]
    fn independence_gives_small_a() {
        let fit = fit_ht(&laplace_pair(0.0, 20_000, 2), "A", 0.7).unwrap();
        assert!(fit.targets[0].a.abs() < 0.1, "{}", fit.targets[0].a);
    }

    #[test]
    fn score_vanishes_at_optimum() {
        let fit = fit_ht(&laplace_pair(0.5, 5_000, 3), "A", 0.7).unwrap();
        let t = &fit.targets[0];
        assert_eq!(t.residuals.len(), fit.n_cond_exceed());
        assert!(t.a.abs() <= 1.0 && t.b < 1.0 && t.sigma > 0.0);
        let yj: Vec<f64> = fit.conditioning.iter().zip(&t.residuals).map(|(&x, &z)| t.a * x + x.powf(t.b) * z).collect();
        let f = |p: &[f64]| working_nll(p, &fit.conditioning, &yj);
        let g = fd_gradient(&f, &[t.a, t.b, t.mu, t.sigma], &[1e-6; 4]);
        assert!(g.iter().all(|v| v.abs() < 1e-4), "{g:?}");
        assert!((f(&[t.a, t.b, t.mu, t.sigma]) + t.loglik).abs() < 1e-6 * t.loglik.abs());
    }

    #[test]
    fn too_few_exceedances() {
        let p = laplace_pair(0.5, 100, 4);
        assert!(matches!(fit_ht(&p, "A", 0.9), Err(Error::TooFewExceedances { .. })));
        assert!(fit_ht(&p, "C", 0.7).is_err());
        assert!(fit_ht(&p, "A", 0.3).is_err());
    }

    #[test]
    fn perfect_dependence_predicts_certainty() {
        let fit = hand_fit(1.0, 0.0, vec![1.0, 2.0, 3.0], vec![0.0; 3], 0.7);
        let r = predict_exceedance_prob(&fit, None, &PredictOptions { n_importance: 10_000, ..Default::default() }).unwrap();
        assert_eq!(r.probabilities, vec![1.0]);
    }

    #[test]
    fn independence_predicts_marginal_tail_mass() {
        let mut rng = Philox4x32::new(5);
        let z: Vec<f64> = (0..200_000).map(|_| rng.laplace()).collect();
        let fit = hand_fit(0.0, 0.0, vec![1.0; z.len()], z, 0.7);
        let opts = PredictOptions { n_importance: 100_000, seed: 9, ..Default::default() };
        let r = predict_exceedance_prob(&fit, None, &opts).unwrap();
        assert!((r.probabilities[0] - 0.3).abs() < 0.01, "{:?}", r.probabilities);
        assert_eq!(r, predict_exceedance_prob(&fit, None, &opts).unwrap());
    }

    #[test]
    fn prediction_preconditions() {
        let fit = hand_fit(0.5, 0.2, vec![1.0, 2.0], vec![0.1, -0.1], 0.7);
        assert!(predict_exceedance_prob(&fit, None, &PredictOptions { pred_quantile: 0.6, ..Default::default() }).is_err());
        let empty = hand_fit(0.5, 0.2, vec![], vec![], 0.7);
        assert!(predict_exceedance_prob(&empty, None, &PredictOptions::default()).is_err());
        let returns = PredictOptions { target: TargetThreshold::Returns(vec![0.01]), ..Default::default() };
        assert!(predict_exceedance_prob(&fit, None, &returns).is_err());
    }

    #[test]
    fn diagnostics_layers() {
        let fit = fit_ht(&laplace_pair(0.5, 3_000, 6), "A", 0.7).unwrap();
        let d = &ht_diagnostics(&fit)[0];
        assert!(d.smoothed);
        assert_eq!(d.residuals.rows.len(), fit.n_cond_exceed());
        let t = &fit.targets[0];
        let u = fit.threshold;
        let median = quantile_type7(&sorted(&t.residuals), 0.5);
        let at_u = d.curves.rows[0][2];
        assert!((at_u - (t.a * u + u.powf(t.b) * median)).abs() < 1e-12);

        let few = hand_fit(0.5, 0.2, vec![1.5, 2.0, 2.5], vec![0.1, -0.1, 0.3], 0.7);
        let d = &ht_diagnostics(&few)[0];
        assert!(!d.smoothed);
        assert!(d.residuals.column("smooth").unwrap().iter().all(|v| v.is_nan()));
    }

    #[test]
    fn self_consistent_data_shows_no_trend() {
        let mut rng = Philox4x32::new(7);
        let u = laplace_quantile(0.7);
        let (a, b) = (0.4, 0.3);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for _ in 0..20_000 {
            // Laplace conditioning draw; the HT relation holds above u
            let xi = rng.laplace();
            let yj = if xi > u { a * xi + xi.powf(b) * rng.normal() } else { rng.laplace() };
            x.push(xi);
            y.push(yj);
        }
        let fit = fit_ht(&panel(vec![x, y]), "M0", 0.7).unwrap();
        for d in ht_diagnostics(&fit) {
            for layer in [&d.residuals, &d.spread] {
                let q = layer.column("quantile").unwrap();
                let s = layer.column("smooth").unwrap();
                let m = crate::smooth::ols_slope(&q, &s);
                assert!(m.abs() < 0.05, "{m}");
            }
        }
    }

    #[test]
    fn labels() {
        assert_eq!(classify_dependence(0.3888).unwrap().to_string(), "fairly strong positive");
        assert_eq!(classify_dependence(-0.0408).unwrap().to_string(), "very weak negative");
        assert_eq!(classify_dependence(0.0).unwrap().to_string(), "independence");
        assert_eq!(classify_dependence(-0.6).unwrap().to_string(), "strong negative");
        assert_eq!(classify_dependence(0.1).unwrap().to_string(), "weak positive");
        assert!(classify_dependence(1.2).is_err());
    }
}
