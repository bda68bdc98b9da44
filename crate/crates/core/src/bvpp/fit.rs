//! Poisson-process likelihood above a radial threshold and AIC selection.
//!
//! With unit-Fréchet margins scaled by `1/n`, points with `r = x + y > r0`
//! form approximately a Poisson process with intensity `2 h(w) / r²`. Over
//! the region `r > r0` the integrated intensity is `2 / r0` whatever the
//! family, so only `Σ ln h(w_i)` depends on the parameters.

use std::cell::RefCell;
use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::family::{DependenceFamily, FamilyTag};
use crate::error::{Error, Result};
use crate::numeric::invert;
use crate::optim::{fd_hessian, minimize_with_restarts, newton_polish, NelderMeadOptions};
use crate::FitFlag;

/// Which form of the likelihood the optimizer sees. Both give the same
/// estimate; the full form carries the parameter-free terms along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    #[default]
    Full,
    ThetaOnly,
}

#[derive(Debug, Clone)]
pub struct PpOptions {
    pub restarts: usize,
    pub seed: u64,
    pub min_points: usize,
    pub objective: Objective,
}

impl Default for PpOptions {
    fn default() -> Self {
        Self { restarts: 5, seed: 0x7070, min_points: 30, objective: Objective::Full }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpFit {
    pub family: DependenceFamily,
    /// Full Poisson-process log-likelihood.
    pub loglik: f64,
    /// Parameter-dependent part, `Σ ln h(w_i)`.
    pub loglik_theta: f64,
    pub aic: f64,
    #[serde(with = "crate::serde_nan::vec")]
    pub se: Vec<f64>,
    pub n_points: usize,
    pub n_total: usize,
    pub quantile_level: f64,
    pub r0: f64,
    /// Pseudo-polar `(r, w)` of the points above `r0`, on the `1/n` scale.
    pub points: Vec<(f64, f64)>,
    pub flags: Vec<FitFlag>,
}

/// Radial threshold on the `1/n` scale: the line `x + y = r0` meets each
/// axis at the marginal `quantile_level` quantile.
pub fn radial_threshold(quantile_level: f64, n: usize) -> f64 {
    -1.0 / quantile_level.ln() / n as f64
}

pub fn aic(k: usize, loglik: f64) -> f64 {
    2.0 * k as f64 - 2.0 * loglik
}

fn start(tag: FamilyTag) -> Vec<f64> {
    match tag {
        FamilyTag::Logistic => vec![0.6],
        FamilyTag::NegLogistic => vec![0.8],
        FamilyTag::HuslerReiss => vec![1.2],
        FamilyTag::Bilogistic => vec![0.6, 0.6],
        FamilyTag::NegBilogistic | FamilyTag::ColesTawn => vec![1.0, 1.0],
    }
}

fn to_working(tag: FamilyTag, theta: &[f64]) -> Vec<f64> {
    theta.iter().map(|&t| if tag.unit_interval() { (t / (1.0 - t)).ln() } else { t.ln() }).collect()
}

fn to_natural(tag: FamilyTag, w: &[f64]) -> Vec<f64> {
    w.iter().map(|&s| if tag.unit_interval() { 1.0 / (1.0 + (-s).exp()) } else { s.exp() }).collect()
}

/// Sum of `ln h(w_i)` at natural parameters; -inf outside the domain.
/// `hints` carries implicit-root starting points between calls.
fn theta_loglik(tag: FamilyTag, theta: &[f64], ws: &[f64], hints: &RefCell<Vec<f64>>) -> f64 {
    let Ok(fam) = DependenceFamily::new(tag, theta) else { return f64::NEG_INFINITY };
    let mut hints = hints.borrow_mut();
    let mut s = 0.0;
    for (&w, hint) in ws.iter().zip(hints.iter_mut()) {
        match fam.ln_h_hinted(w, hint) {
            Ok(v) if v.is_finite() => s += v,
            _ => return f64::NEG_INFINITY,
        }
    }
    s
}

pub fn fit_pp(x: &[f64], y: &[f64], tag: FamilyTag, quantile_level: f64) -> Result<PpFit> {
    fit_pp_with(x, y, tag, quantile_level, &PpOptions::default())
}

/// Fits one family to paired unit-Fréchet observations.
pub fn fit_pp_with(x: &[f64], y: &[f64], tag: FamilyTag, quantile_level: f64, opts: &PpOptions) -> Result<PpFit> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::invalid("point-process fit needs two equal-length, non-empty margins"));
    }
    if !(quantile_level > 0.0 && quantile_level < 1.0) {
        return Err(Error::invalid("quantile level must lie in (0, 1)"));
    }
    let n = x.len();
    let nf = n as f64;
    let r0 = radial_threshold(quantile_level, n);
    let mut points = Vec::new();
    for (&a, &b) in x.iter().zip(y) {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::invalid("Fréchet-scale observations must be positive"));
        }
        let r = (a + b) / nf;
        if r > r0 {
            points.push((r, a / (a + b)));
        }
    }
    if points.len() < opts.min_points {
        return Err(Error::TooFewExceedances { found: points.len(), required: opts.min_points });
    }
    let ws: Vec<f64> = points.iter().map(|p| p.1).collect();
    let constant = -2.0 / r0 + points.iter().map(|p| 2f64.ln() - 2.0 * p.0.ln()).sum::<f64>();

    let hints = RefCell::new(vec![f64::NAN; ws.len()]);
    let objective = |w: &[f64]| {
        let ll = theta_loglik(tag, &to_natural(tag, w), &ws, &hints);
        match opts.objective {
            Objective::Full => -(constant + ll),
            Objective::ThetaOnly => -ll,
        }
    };
    let w0 = to_working(tag, &start(tag));
    let step = vec![0.5; w0.len()];
    let nm = NelderMeadOptions { max_evals: 2000, f_tol: 1e-12, x_tol: 1e-3 };
    let m = minimize_with_restarts(&objective, &w0, &step, opts.restarts, opts.seed, &nm);
    if !m.value.is_finite() {
        return Err(Error::NonConvergence(format!("{tag}: likelihood not finite at any start")));
    }
    let polished = newton_polish(&objective, &m.x, &vec![1e-4; w0.len()], 30);
    let w_hat = if objective(&polished) <= m.value { polished } else { m.x.clone() };
    let theta = to_natural(tag, &w_hat);
    let family = DependenceFamily::new(tag, &theta)?;
    let loglik_theta = theta_loglik(tag, &theta, &ws, &hints);
    let loglik = constant + loglik_theta;

    let nat = |t: &[f64]| -theta_loglik(tag, t, &ws, &hints);
    let h: Vec<f64> = theta.iter().map(|t| 1e-5 * t.abs().max(1e-3)).collect();
    let se = match invert(&fd_hessian(&nat, &theta, &h)) {
        Some(cov) => (0..theta.len()).map(|i| if cov[i][i] >= 0.0 { cov[i][i].sqrt() } else { f64::NAN }).collect(),
        None => vec![f64::NAN; theta.len()],
    };

    let mut flags = Vec::new();
    if !m.converged {
        flags.push(FitFlag::BudgetExhausted);
    }
    let names = ["alpha", "beta"];
    for (i, (&s, &t)) in w_hat.iter().zip(&theta).enumerate() {
        let at_edge = s.abs() > 12.0 || (tag == FamilyTag::Logistic && t > 0.999);
        if at_edge {
            flags.push(FitFlag::Boundary { param: names[i].into(), value: t });
        }
    }
    Ok(PpFit {
        family,
        loglik,
        loglik_theta,
        aic: aic(tag.n_params(), loglik),
        se,
        n_points: points.len(),
        n_total: n,
        quantile_level,
        r0,
        points,
        flags,
    })
}

/// AIC ascending, then fewer parameters, then family order.
pub fn aic_order(a: &PpFit, b: &PpFit) -> Ordering {
    a.aic.total_cmp(&b.aic).then(a.family.tag.n_params().cmp(&b.family.tag.n_params())).then(a.family.tag.cmp(&b.family.tag))
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub ranked: Vec<PpFit>,
    pub failures: Vec<(FamilyTag, String)>,
}

/// Fits all six families and ranks the successful fits by AIC.
pub fn select_family(x: &[f64], y: &[f64], quantile_level: f64, opts: &PpOptions) -> Result<Selection> {
    rank_fits(FamilyTag::ALL.iter().map(|&tag| (tag, fit_pp_with(x, y, tag, quantile_level, opts))).collect())
}

/// Ranks per-family fit outcomes by AIC, keeping failures aside. Errors only
/// when no family fitted.
pub fn rank_fits(outcomes: Vec<(FamilyTag, Result<PpFit>)>) -> Result<Selection> {
    let mut ranked = Vec::new();
    let mut failures = Vec::new();
    for (tag, outcome) in outcomes {
        match outcome {
            Ok(f) => ranked.push(f),
            Err(e) => failures.push((tag, e.to_string())),
        }
    }
    if ranked.is_empty() {
        return Err(Error::NonConvergence(format!("every dependence family failed: {failures:?}")));
    }
    ranked.sort_by(aic_order);
    Ok(Selection { ranked, failures })
}
