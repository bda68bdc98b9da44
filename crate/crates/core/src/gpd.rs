//! Generalized Pareto fits to threshold excesses.
//!
//! The threshold is always given as an empirical quantile level of the sample
//! (see [`crate::empirical::EmpiricalCdf`] for the quantile convention).
//! Parameters are estimated by maximum likelihood on the working scale
//! `(ln σ, ξ)` with a simplex search from probability-weighted-moment starts,
//! random restarts and a final Newton polish.

use serde::{Deserialize, Serialize};

use crate::empirical::EmpiricalCdf;
use crate::error::{Error, Result};
use crate::numeric::{invert, sorted};
use crate::optim::{fd_hessian, minimize_with_restarts, newton_polish, NelderMeadOptions};
use crate::plot::PlotData;
use crate::FitFlag;

/// Below this |ξ| the exponential limit formulas are used.
pub const XI_ZERO: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpdFit {
    pub threshold: f64,
    pub quantile_level: f64,
    pub sigma: f64,
    pub xi: f64,
    pub n_exceed: usize,
    pub n_total: usize,
    pub loglik: f64,
    #[serde(with = "crate::serde_nan")]
    pub se_sigma: f64,
    #[serde(with = "crate::serde_nan")]
    pub se_xi: f64,
    pub flags: Vec<FitFlag>,
}

#[derive(Debug, Clone)]
pub struct GpdOptions {
    pub min_exceedances: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for GpdOptions {
    fn default() -> Self {
        Self { min_exceedances: 30, restarts: 5, seed: 0x0067_7064 }
    }
}

/// Maximum-likelihood estimate for a set of excesses `y > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcessFit {
    pub sigma: f64,
    pub xi: f64,
    pub loglik: f64,
    pub se_sigma: f64,
    pub se_xi: f64,
    pub flags: Vec<FitFlag>,
}

/// Distribution function of an excess `y = x - u`.
pub fn cdf_excess(y: f64, sigma: f64, xi: f64) -> f64 {
    if y <= 0.0 {
        return 0.0;
    }
    1.0 - sf_excess(y, sigma, xi)
}

/// Survival function of an excess.
pub fn sf_excess(y: f64, sigma: f64, xi: f64) -> f64 {
    if y <= 0.0 {
        return 1.0;
    }
    if xi.abs() < XI_ZERO {
        return (-y / sigma).exp();
    }
    let t = 1.0 + xi * y / sigma;
    if t <= 0.0 {
        return 0.0;
    }
    (-t.ln() / xi).exp()
}

pub fn quantile_excess(p: f64, sigma: f64, xi: f64) -> f64 {
    let ln_sf = (-p).ln_1p();
    if xi.abs() < XI_ZERO {
        return -sigma * ln_sf;
    }
    sigma * ((-xi * ln_sf).exp_m1()) / xi
}

pub fn ln_density_excess(y: f64, sigma: f64, xi: f64) -> f64 {
    if y < 0.0 || sigma <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if xi.abs() < XI_ZERO {
        return -sigma.ln() - y / sigma;
    }
    let t = 1.0 + xi * y / sigma;
    if t <= 0.0 {
        return f64::NEG_INFINITY;
    }
    -sigma.ln() - (1.0 + 1.0 / xi) * t.ln()
}

pub fn loglik(excesses: &[f64], sigma: f64, xi: f64) -> f64 {
    excesses.iter().map(|&y| ln_density_excess(y, sigma, xi)).sum()
}

/// Probability-weighted-moment estimate (Hosking & Wallis), clamped to a
/// sane starting region.
pub fn pwm_start(excesses: &[f64]) -> (f64, f64) {
    let s = sorted(excesses);
    let n = s.len() as f64;
    let a0 = s.iter().sum::<f64>() / n;
    let a1 = s.iter().enumerate().map(|(i, y)| (1.0 - (i as f64 + 1.0 - 0.35) / n) * y).sum::<f64>() / n;
    let denom = a0 - 2.0 * a1;
    if !(denom > 0.0) {
        return (a0.max(1e-12), 0.1);
    }
    let xi = (2.0 - a0 / denom).clamp(-0.4, 0.9);
    let sigma = (2.0 * a0 * a1 / denom).max(1e-12 * a0.max(1e-300));
    (sigma, xi)
}

/// GPD maximum likelihood for excesses over a threshold.
pub fn fit_excesses(excesses: &[f64], restarts: usize, seed: u64) -> Result<ExcessFit> {
    if excesses.is_empty() || excesses.iter().any(|y| !(*y >= 0.0) || !y.is_finite()) {
        return Err(Error::invalid("excesses must be finite and non-negative"));
    }
    let (s0, x0) = pwm_start(excesses);
    // working scale: (ln sigma, xi); xi kept above -1 where the likelihood is bounded
    let neg = |p: &[f64]| {
        if p[1] <= -1.0 {
            return f64::INFINITY;
        }
        -loglik(excesses, p[0].exp(), p[1])
    };
    let opts = NelderMeadOptions::default();
    let m = minimize_with_restarts(&neg, &[s0.ln(), x0], &[0.3, 0.2], restarts, seed, &opts);
    if !m.value.is_finite() {
        return Err(Error::NonConvergence("GPD likelihood not finite at any start".into()));
    }
    let h = [1e-5, 1e-5];
    let w = newton_polish(&neg, &m.x, &h, 25);
    let value = neg(&w);
    let (w, value) = if value <= m.value { (w, value) } else { (m.x.clone(), m.value) };
    let sigma = w[0].exp();
    let xi = w[1];

    let mut flags = Vec::new();
    if !m.converged {
        flags.push(FitFlag::BudgetExhausted);
    }
    if xi <= -0.5 {
        flags.push(FitFlag::UnreliableShape { xi });
    }
    let (se_sigma, se_xi) = match invert(&fd_hessian(&neg, &w, &h)) {
        Some(cov) if cov[0][0] >= 0.0 && cov[1][1] >= 0.0 => (sigma * cov[0][0].sqrt(), cov[1][1].sqrt()),
        _ => (f64::NAN, f64::NAN),
    };
    Ok(ExcessFit { sigma, xi, loglik: -value, se_sigma, se_xi, flags })
}

/// Fit above the empirical `quantile_level` quantile of `sample`.
pub fn fit_gpd(sample: &[f64], quantile_level: f64) -> Result<GpdFit> {
    fit_gpd_with(sample, quantile_level, &GpdOptions::default())
}

pub fn fit_gpd_with(sample: &[f64], quantile_level: f64, opts: &GpdOptions) -> Result<GpdFit> {
    if !(quantile_level > 0.0 && quantile_level < 1.0) {
        return Err(Error::invalid("quantile level must lie in (0, 1)"));
    }
    let ecdf = EmpiricalCdf::new(sample).map_err(|_| Error::TooFewExceedances { found: 0, required: opts.min_exceedances })?;
    let threshold = ecdf.quantile(quantile_level);
    let excesses: Vec<f64> = sample.iter().filter(|&&x| x > threshold).map(|x| x - threshold).collect();
    if excesses.len() < opts.min_exceedances.max(1) {
        return Err(Error::TooFewExceedances { found: excesses.len(), required: opts.min_exceedances });
    }
    let f = fit_excesses(&excesses, opts.restarts, opts.seed)?;
    Ok(GpdFit {
        threshold,
        quantile_level,
        sigma: f.sigma,
        xi: f.xi,
        n_exceed: excesses.len(),
        n_total: sample.len(),
        loglik: f.loglik,
        se_sigma: f.se_sigma,
        se_xi: f.se_xi,
        flags: f.flags,
    })
}

impl GpdFit {
    /// Upper end of the support (infinite for ξ ≥ 0).
    pub fn upper_endpoint(&self) -> f64 {
        if self.xi < 0.0 && self.xi.abs() >= XI_ZERO {
            self.threshold - self.sigma / self.xi
        } else {
            f64::INFINITY
        }
    }

    /// Exceedance rate ζ_u = n_exceed / n_total.
    pub fn exceedance_rate(&self) -> f64 {
        self.n_exceed as f64 / self.n_total as f64
    }

    pub fn density(&self, x: f64) -> f64 {
        ln_density_excess(x - self.threshold, self.sigma, self.xi).exp()
    }

    /// Level exceeded on average once every `period` observations.
    pub fn return_level(&self, period: f64) -> f64 {
        let m = period * self.exceedance_rate();
        if self.xi.abs() < XI_ZERO {
            self.threshold + self.sigma * m.ln()
        } else {
            self.threshold + self.sigma * (m.powf(self.xi) - 1.0) / self.xi
        }
    }
}

pub fn gpd_cdf(fit: &GpdFit, x: f64) -> Result<f64> {
    if x < fit.threshold {
        return Err(Error::domain(format!("x = {x} below threshold {}", fit.threshold)));
    }
    if x > fit.upper_endpoint() {
        return Err(Error::domain(format!("x = {x} above upper endpoint {}", fit.upper_endpoint())));
    }
    Ok(cdf_excess(x - fit.threshold, fit.sigma, fit.xi))
}

pub fn gpd_quantile(fit: &GpdFit, p: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::domain(format!("probability {p} outside [0, 1)")));
    }
    Ok(fit.threshold + quantile_excess(p, fit.sigma, fit.xi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpdDiagnostics {
    /// (empirical, model) probabilities.
    pub probability: PlotData,
    /// (model, empirical) quantiles.
    pub quantile: PlotData,
    /// Return period in observations against model and empirical levels.
    pub return_level: PlotData,
    /// Histogram of exceedances with the fitted density at bin centres.
    pub density: PlotData,
}

pub fn gpd_diagnostics(fit: &GpdFit, sample: &[f64], bins: usize) -> Result<GpdDiagnostics> {
    let exceed = sorted(&sample.iter().copied().filter(|&x| x > fit.threshold).collect::<Vec<_>>());
    let m = exceed.len();
    if bins == 0 || m < bins.max(1) {
        return Err(Error::invalid(format!("{bins} histogram bins requested for {m} exceedances")));
    }
    let mf = (m + 1) as f64;

    let mut probability = PlotData::new(&["empirical", "model"]);
    let mut quantile = PlotData::new(&["model", "empirical"]);
    for (i, &x) in exceed.iter().enumerate() {
        let p = (i + 1) as f64 / mf;
        probability.push(vec![p, cdf_excess(x - fit.threshold, fit.sigma, fit.xi)]);
        quantile.push(vec![fit.threshold + quantile_excess(p, fit.sigma, fit.xi), x]);
    }

    let n_total = sample.len() as f64;
    let mut return_level = PlotData::new(&["period", "model", "empirical"]);
    for (k, &x) in exceed.iter().rev().enumerate() {
        let period = (n_total + 1.0) / (k + 1) as f64;
        return_level.push(vec![period, fit.return_level(period), x]);
    }
    return_level.rows.reverse();

    let lo = fit.threshold;
    let hi = exceed[m - 1];
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in &exceed {
        let b = (((x - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let mut density = PlotData::new(&["center", "empirical", "model"]);
    for (b, c) in counts.iter().enumerate() {
        let center = lo + (b as f64 + 0.5) * width;
        density.push(vec![center, *c as f64 / (m as f64 * width), fit.density(center)]);
    }
    Ok(GpdDiagnostics { probability, quantile, return_level, density })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::fd_gradient;
    use crate::simulate::sim_gpd;

    fn fixed(sigma: f64, xi: f64) -> GpdFit {
        GpdFit {
            threshold: 0.0,
            quantile_level: 0.9,
            sigma,
            xi,
            n_exceed: 100,
            n_total: 1000,
            loglik: 0.0,
            se_sigma: 0.0,
            se_xi: 0.0,
            flags: vec![],
        }
    }

    #[test]
    fn closed_form_cdf_values() {
        let f = fixed(1.0, 0.0);
        assert_eq!(gpd_cdf(&f, 0.0).unwrap(), 0.0);
        assert!((gpd_cdf(&f, 2f64.ln()).unwrap() - 0.5).abs() < 1e-15);
        let f = fixed(1.0, 0.5);
        assert!((gpd_cdf(&f, 2.0).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn support_errors() {
        let f = fixed(1.0, -0.5);
        assert!(gpd_cdf(&f, 2.5).is_err());
        assert!(gpd_cdf(&f, -0.1).is_err());
        assert!(gpd_cdf(&f, 1.9).is_ok());
        assert!(gpd_quantile(&f, 1.0).is_err());
    }

    #[test]
    fn quantile_inverts_cdf_on_grid() {
        for &xi in &[-0.4, -1e-9, 0.0, 0.2, 0.7] {
            let f = fixed(1.3, xi);
            for k in 0..=999 {
                let p = k as f64 * 0.001;
                let q = gpd_quantile(&f, p).unwrap();
                assert!((gpd_cdf(&f, q).unwrap() - p).abs() < 1e-10, "xi={xi} p={p}");
            }
        }
    }

    #[test]
    fn shape_zero_continuity() {
        for k in 0..200 {
            let y = k as f64 * 0.05;
            let a = cdf_excess(y, 1.0, 1e-9);
            let b = 1.0 - (-y).exp();
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn recovers_simulated_shape() {
        let x = sim_gpd(1.0, 0.2, 5000, 11);
        let e = fit_excesses(&x, 5, 1).unwrap();
        assert!((e.xi - 0.2).abs() < 3.0 * e.se_xi, "{e:?}");
        let x = sim_gpd(1.0, 0.0, 5000, 12);
        let e = fit_excesses(&x, 5, 1).unwrap();
        assert!(e.xi.abs() < 3.0 * e.se_xi, "{e:?}");
    }

    #[test]
    fn score_vanishes_at_estimate() {
        let x = sim_gpd(2.0, 0.1, 3000, 5);
        let e = fit_excesses(&x, 5, 1).unwrap();
        let ll = |p: &[f64]| loglik(&x, p[0], p[1]);
        let g = fd_gradient(&ll, &[e.sigma, e.xi], &[1e-6, 1e-6]);
        assert!(g.iter().all(|v| v.abs() < 1e-4), "{g:?}");
    }

    #[test]
    fn constant_sample_has_no_exceedances() {
        let err = fit_gpd(&[1.5; 500], 0.7).unwrap_err();
        assert!(err.to_string().contains("too few exceedances"), "{err}");
    }

    #[test]
    fn threshold_is_the_empirical_quantile() {
        let x = sim_gpd(1.0, 0.1, 1000, 2);
        let fit = fit_gpd(&x, 0.7).unwrap();
        let e = EmpiricalCdf::new(&x).unwrap();
        assert!((e.cdf(fit.threshold) - 0.7).abs() < 1e-12);
        assert_eq!(fit.n_exceed, x.iter().filter(|&&v| v > fit.threshold).count());
    }

    #[test]
    fn diagnostics_well_specified() {
        let x = sim_gpd(1.0, 0.2, 5000, 21);
        let fit = fit_gpd(&x, 0.0001).unwrap();
        let d = gpd_diagnostics(&fit, &x, 30).unwrap();
        let dev = d.probability.rows.iter().map(|r| (r[0] - r[1]).abs()).fold(0.0, f64::max);
        assert!(dev < 0.05, "{dev}");
        assert_eq!(d.density.rows.len(), 30);
        assert_eq!(d.return_level.rows.len(), fit.n_exceed);
    }

    #[test]
    fn qq_on_diagonal_for_model_quantiles() {
        let f = fixed(1.0, 0.2);
        let m = 200;
        let sample: Vec<f64> = (1..=m).map(|i| quantile_excess(i as f64 / (m + 1) as f64, 1.0, 0.2)).collect();
        let d = gpd_diagnostics(&f, &sample, 10).unwrap();
        for r in &d.quantile.rows {
            assert!((r[0] - r[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn too_many_bins_rejected() {
        let f = fixed(1.0, 0.2);
        assert!(gpd_diagnostics(&f, &[-1.0, 0.5], 2).is_err());
    }

    #[test]
    fn return_level_at_one_exceedance_per_period() {
        let f = fixed(1.0, 0.2);
        // period 1/ζ returns the threshold
        assert!((f.return_level(10.0) - 0.0).abs() < 1e-12);
    }
}
