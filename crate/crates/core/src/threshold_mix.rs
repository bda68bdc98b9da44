//! Kernel-bulk / GPD-tail mixture for objective threshold selection.
//!
//! The bulk is a Gaussian kernel density estimate over the whole sample with
//! bandwidth `γ` treated as a likelihood parameter (bulk points contribute
//! their leave-one-out density). Above the threshold `u` the excesses follow
//! a GPD with tail fraction `ϑ_u`, either implied by the bulk
//! (`1 - H(u)`) or estimated freely (the bulk is then renormalized by
//! `H(u)`).
//!
//! The likelihood separates into a bandwidth part and a GPD part for each
//! `u`, so the search profiles `u` over a grid of empirical quantiles,
//! maximizing the GPD part once per candidate and the bandwidth part over a
//! log-spaced grid, then refines both by golden-section search. Bulk
//! densities during the search come from a linearly binned estimate;
//! [`mixture_loglik`] evaluates the exact likelihood.

use serde::{Deserialize, Serialize};

use crate::empirical::EmpiricalCdf;
use crate::error::{Error, Result};
use crate::gpd::{fit_excesses, ln_density_excess, pwm_start, sf_excess, XI_ZERO};
use crate::numeric::{golden_section, normal_cdf, normal_pdf, quantile_type7, sorted, variance};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::plot::PlotData;
use crate::FitFlag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMode {
    BulkBased,
    Parameterised,
}

#[derive(Debug, Clone)]
pub struct MixtureOptions {
    /// Admissible band for the threshold, as empirical quantile levels.
    pub lower: f64,
    pub upper: f64,
    pub n_grid: usize,
    pub n_bandwidths: usize,
    pub bins: usize,
    /// Smallest number of exceedances a candidate threshold may leave.
    pub min_tail: usize,
    pub seed: u64,
}

impl Default for MixtureOptions {
    fn default() -> Self {
        Self { lower: 0.5, upper: 0.99, n_grid: 50, n_bandwidths: 16, bins: 2048, min_tail: 10, seed: 0x6d6978 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixtureFit {
    pub bandwidth: f64,
    pub u: f64,
    pub sigma_u: f64,
    pub xi: f64,
    pub phi_u: f64,
    pub tail_mode: TailMode,
    pub loglik: f64,
    #[serde(with = "crate::serde_nan")]
    pub se_u: f64,
    /// Empirical quantile level of `u` and its delta-method standard error.
    pub quantile_level: f64,
    #[serde(with = "crate::serde_nan")]
    pub se_level: f64,
    pub flags: Vec<FitFlag>,
    /// Profile log-likelihood against candidate quantile level at the fitted bandwidth.
    pub profile: PlotData,
    /// Kernel centres (the fitted sample).
    pub centres: Vec<f64>,
}

/// Kernel density estimate at `x`.
pub fn kde_density(centres: &[f64], gamma: f64, x: f64) -> f64 {
    centres.iter().map(|c| normal_pdf((x - c) / gamma)).sum::<f64>() / (centres.len() as f64 * gamma)
}

/// Kernel distribution function `H(x | X, γ)`.
pub fn kde_cdf(centres: &[f64], gamma: f64, x: f64) -> f64 {
    centres.iter().map(|c| normal_cdf((x - c) / gamma)).sum::<f64>() / centres.len() as f64
}

fn ln_loo_density(centres: &[f64], gamma: f64, i: usize) -> f64 {
    let n = centres.len() as f64;
    let x = centres[i];
    let total: f64 = centres.iter().map(|c| normal_pdf((x - c) / gamma)).sum::<f64>() - normal_pdf(0.0);
    (total / ((n - 1.0) * gamma)).max(f64::MIN_POSITIVE).ln()
}

/// Exact mixture log-likelihood. In parameterised mode `phi_u` defaults to
/// its closed-form estimate, the exceedance fraction.
#[allow(clippy::too_many_arguments)]
pub fn mixture_loglik(sample: &[f64], gamma: f64, u: f64, sigma: f64, xi: f64, mode: TailMode, phi_u: Option<f64>) -> f64 {
    let n = sample.len();
    let h_u = kde_cdf(sample, gamma, u);
    let n_tail = sample.iter().filter(|&&x| x > u).count();
    let phi = match mode {
        TailMode::BulkBased => 1.0 - h_u,
        TailMode::Parameterised => phi_u.unwrap_or(n_tail as f64 / n as f64),
    };
    let mut ll = 0.0;
    for (i, &x) in sample.iter().enumerate() {
        if x > u {
            ll += phi.ln() + ln_density_excess(x - u, sigma, xi);
        } else {
            ll += ln_loo_density(sample, gamma, i);
            if mode == TailMode::Parameterised {
                ll += (1.0 - phi).ln() - h_u.ln();
            }
        }
    }
    ll
}

/// Leave-one-out log densities of the sorted sample from a linearly binned
/// estimate. Points above `top` are left as NaN (they are never bulk).
fn binned_loo(sorted_x: &[f64], gamma: f64, top: f64, bins: usize) -> Vec<f64> {
    let n = sorted_x.len();
    let a = sorted_x[0];
    let b = top + 8.0 * gamma;
    let nb = bins.max(((b - a) / (gamma / 8.0)).ceil() as usize).min(1 << 16);
    let delta = (b - a) / (nb - 1) as f64;
    let mut counts = vec![0.0; nb];
    for &x in sorted_x {
        if x > b {
            break;
        }
        let t = (x - a) / delta;
        let i = (t.floor() as usize).min(nb - 2);
        let w = t - i as f64;
        counts[i] += 1.0 - w;
        counts[i + 1] += w;
    }
    let reach = ((8.0 * gamma / delta).ceil() as usize).min(nb - 1);
    let kernel: Vec<f64> = (0..=reach).map(|k| normal_pdf(k as f64 * delta / gamma)).collect();
    let mut dens = vec![0.0; nb];
    for (m, &c) in counts.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let lo = m.saturating_sub(reach);
        let hi = (m + reach).min(nb - 1);
        for (k, d) in dens.iter_mut().enumerate().take(hi + 1).skip(lo) {
            *d += c * kernel[k.abs_diff(m)];
        }
    }
    let self_term = normal_pdf(0.0);
    let scale = 1.0 / ((n - 1) as f64 * gamma);
    sorted_x
        .iter()
        .map(|&x| {
            if x > top {
                return f64::NAN;
            }
            let t = (x - a) / delta;
            let i = (t.floor() as usize).min(nb - 2);
            let w = t - i as f64;
            let s = (1.0 - w) * dens[i] + w * dens[i + 1];
            ((s - self_term) * scale).max(f64::MIN_POSITIVE).ln()
        })
        .collect()
}

struct Candidate {
    level: f64,
    u: f64,
    n_bulk: usize,
    gpd_ll: f64,
}

/// Maximized GPD log-likelihood of the excesses over `u`, with its parameters.
fn gpd_profile(sorted_x: &[f64], u: f64) -> (f64, f64, f64) {
    let start = sorted_x.partition_point(|&x| x <= u);
    let y: Vec<f64> = sorted_x[start..].iter().map(|x| x - u).collect();
    let (s0, x0) = pwm_start(&y);
    let neg = |p: &[f64]| {
        if p[1] <= -1.0 {
            return f64::INFINITY;
        }
        -y.iter().map(|&v| ln_density_excess(v, p[0].exp(), p[1])).sum::<f64>()
    };
    let opts = NelderMeadOptions { max_evals: 600, f_tol: 1e-9, x_tol: 1e-7 };
    let m = nelder_mead(&neg, &[s0.ln(), x0], &[0.3, 0.2], &opts);
    (-m.value, m.x[0].exp(), m.x[1])
}

struct Search<'a> {
    x: &'a [f64],
    mode: TailMode,
    top: f64,
    bins: usize,
}

impl Search<'_> {
    /// Bandwidth-dependent part of the likelihood at each candidate.
    fn bandwidth_terms(&self, gamma: f64, cands: &[Candidate]) -> Vec<f64> {
        let loo = binned_loo(self.x, gamma, self.top, self.bins);
        let mut prefix = vec![0.0; self.x.len() + 1];
        for (i, l) in loo.iter().enumerate() {
            prefix[i + 1] = prefix[i] + if l.is_nan() { 0.0 } else { *l };
        }
        let n = self.x.len() as f64;
        cands
            .iter()
            .map(|c| {
                let h_u = kde_cdf(self.x, gamma, c.u);
                let nb = c.n_bulk as f64;
                let nt = n - nb;
                let bulk = prefix[c.n_bulk];
                match self.mode {
                    TailMode::BulkBased => bulk + nt * (1.0 - h_u).max(f64::MIN_POSITIVE).ln(),
                    TailMode::Parameterised => bulk - nb * h_u.ln() + nb * (nb / n).ln() + nt * (nt / n).ln(),
                }
            })
            .collect()
    }

    fn candidate(&self, ecdf: &EmpiricalCdf, level: f64) -> Candidate {
        let u = ecdf.quantile(level);
        let n_bulk = self.x.partition_point(|&v| v <= u);
        let (gpd_ll, _, _) = gpd_profile(self.x, u);
        Candidate { level, u, n_bulk, gpd_ll }
    }
}

fn silverman(x: &[f64]) -> f64 {
    let sd = variance(x).sqrt();
    let iqr = quantile_type7(x, 0.75) - quantile_type7(x, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * (x.len() as f64).powf(-0.2)
}

pub fn fit_mixture(sample: &[f64], tail_mode: TailMode) -> Result<MixtureFit> {
    fit_mixture_with(sample, tail_mode, &MixtureOptions::default())
}

pub fn fit_mixture_with(sample: &[f64], tail_mode: TailMode, opts: &MixtureOptions) -> Result<MixtureFit> {
    if sample.len() < 200 {
        return Err(Error::invalid(format!("mixture fit needs at least 200 observations, got {}", sample.len())));
    }
    if !(0.0 < opts.lower && opts.lower < opts.upper && opts.upper < 1.0) || opts.n_grid < 3 {
        return Err(Error::invalid("threshold band must satisfy 0 < lower < upper < 1 with at least 3 candidates"));
    }
    let x = sorted(sample);
    let h0 = silverman(&x);
    if !(h0 > 0.0) {
        return Err(Error::Degenerate("kernel bandwidth degenerate: sample has no spread".into()));
    }
    let ecdf = EmpiricalCdf::new(&x)?;
    let n = x.len();
    let top = ecdf.quantile(opts.upper);
    let search = Search { x: &x, mode: tail_mode, top, bins: opts.bins };

    let levels: Vec<f64> = (0..opts.n_grid).map(|k| opts.lower + (opts.upper - opts.lower) * k as f64 / (opts.n_grid - 1) as f64).collect();
    let cands: Vec<Candidate> =
        levels.iter().map(|&q| search.candidate(&ecdf, q)).filter(|c| n - c.n_bulk >= opts.min_tail.max(3) && c.n_bulk >= 2).collect();
    if cands.len() < 3 {
        return Err(Error::TooFewExceedances { found: n - (opts.lower * n as f64) as usize, required: opts.min_tail });
    }

    // cross-validation bandwidth over the admissible bulk as the grid centre
    let cv = |lg: f64| {
        let loo = binned_loo(&x, lg.exp(), top, opts.bins);
        -loo.iter().filter(|v| !v.is_nan()).sum::<f64>()
    };
    let (lg_cv, _) = golden_section(cv, (h0 / 20.0).ln(), (h0 * 5.0).ln(), 1e-3);
    let nb = opts.n_bandwidths.max(3);
    let log_gammas: Vec<f64> = (0..nb).map(|k| lg_cv + (4f64).ln() * (2.0 * k as f64 / (nb - 1) as f64 - 1.0)).collect();

    let mut best = (f64::NEG_INFINITY, 0, 0);
    for (g, &lg) in log_gammas.iter().enumerate() {
        let terms = search.bandwidth_terms(lg.exp(), &cands);
        for (c, (cand, t)) in cands.iter().zip(&terms).enumerate() {
            let total = t + cand.gpd_ll;
            if total > best.0 {
                best = (total, g, c);
            }
        }
    }
    let (_, g_best, c_best) = best;

    // refine the bandwidth at the best candidate, then the threshold
    let lg_lo = log_gammas[g_best.saturating_sub(1)];
    let lg_hi = log_gammas[(g_best + 1).min(nb - 1)];
    let one = std::slice::from_ref(&cands[c_best]);
    let (lg_hat, _) = golden_section(|lg| -search.bandwidth_terms(lg.exp(), one)[0], lg_lo, lg_hi, 1e-4);
    let gamma = lg_hat.exp();

    let profile_at = |q: f64| {
        let c = search.candidate(&ecdf, q);
        let t = search.bandwidth_terms(gamma, std::slice::from_ref(&c))[0];
        t + c.gpd_ll
    };
    let q_lo = cands[c_best.saturating_sub(1)].level;
    let q_hi = cands[(c_best + 1).min(cands.len() - 1)].level;
    let (q_ref, neg_ref) = golden_section(|q| -profile_at(q), q_lo, q_hi, 1e-5);
    let grid_terms = search.bandwidth_terms(gamma, &cands);
    let trace: Vec<(f64, f64, f64)> = cands.iter().zip(&grid_terms).map(|(c, t)| (c.level, c.u, t + c.gpd_ll)).collect();
    let u = {
        let best_grid = trace.iter().max_by(|a, b| a.2.total_cmp(&b.2)).expect("non-empty");
        if -neg_ref >= best_grid.2 {
            ecdf.quantile(q_ref)
        } else {
            best_grid.1
        }
    };

    let excess: Vec<f64> = x.iter().filter(|&&v| v > u).map(|v| v - u).collect();
    let g = fit_excesses(&excess, 2, opts.seed)?;
    let h_u = kde_cdf(&x, gamma, u);
    let phi_u = match tail_mode {
        TailMode::BulkBased => 1.0 - h_u,
        TailMode::Parameterised => excess.len() as f64 / n as f64,
    };
    let loglik = mixture_loglik(&x, gamma, u, g.sigma, g.xi, tail_mode, None);

    let se_u = curvature_se(&trace, u);
    let se_level = if se_u.is_finite() { 0.5 * (ecdf.cdf(u + se_u) - ecdf.cdf(u - se_u)) } else { f64::NAN };
    let level = ecdf.cdf(u);

    let mut flags = g.flags.clone();
    let step = (opts.upper - opts.lower) / (opts.n_grid - 1) as f64;
    if level <= opts.lower + 0.5 * step || level >= opts.upper - 0.5 * step {
        flags.push(FitFlag::ThresholdOutsideBand { level });
    }
    let mut profile = PlotData::new(&["quantile_level", "loglik"]);
    for (q, _, l) in &trace {
        profile.push(vec![*q, *l]);
    }
    Ok(MixtureFit {
        bandwidth: gamma,
        u,
        sigma_u: g.sigma,
        xi: g.xi,
        phi_u,
        tail_mode,
        loglik,
        se_u,
        quantile_level: level,
        se_level,
        flags,
        profile,
        centres: x,
    })
}

/// Standard error from a least-squares parabola through the profile points
/// nearest the optimum.
fn curvature_se(trace: &[(f64, f64, f64)], u: f64) -> f64 {
    let mut near: Vec<&(f64, f64, f64)> = trace.iter().collect();
    near.sort_by(|a, b| (a.1 - u).abs().total_cmp(&(b.1 - u).abs()));
    near.truncate(7);
    // normal equations for l = c0 + c1 d + c2 d^2
    let mut m = vec![vec![0.0; 3]; 3];
    let mut r = [0.0; 3];
    for p in &near {
        let d = p.1 - u;
        let basis = [1.0, d, d * d];
        for i in 0..3 {
            r[i] += basis[i] * p.2;
            for j in 0..3 {
                m[i][j] += basis[i] * basis[j];
            }
        }
    }
    let Some(inv) = crate::numeric::invert(&m) else { return f64::NAN };
    let c2: f64 = (0..3).map(|j| inv[2][j] * r[j]).sum();
    if c2 < 0.0 {
        (-0.5 / c2).sqrt()
    } else {
        f64::NAN
    }
}

pub fn mixture_cdf(fit: &MixtureFit, x: f64) -> f64 {
    let tail = |x: f64| 1.0 - fit.phi_u * sf_excess(x - fit.u, fit.sigma_u, fit.xi);
    if x > fit.u {
        return tail(x);
    }
    let h = kde_cdf(&fit.centres, fit.bandwidth, x);
    match fit.tail_mode {
        TailMode::BulkBased => h,
        TailMode::Parameterised => (1.0 - fit.phi_u) * h / kde_cdf(&fit.centres, fit.bandwidth, fit.u),
    }
}

pub fn mixture_density(fit: &MixtureFit, x: f64) -> f64 {
    if x > fit.u {
        return fit.phi_u * ln_density_excess(x - fit.u, fit.sigma_u, fit.xi).exp();
    }
    let h = kde_density(&fit.centres, fit.bandwidth, x);
    match fit.tail_mode {
        TailMode::BulkBased => h,
        TailMode::Parameterised => (1.0 - fit.phi_u) * h / kde_cdf(&fit.centres, fit.bandwidth, fit.u),
    }
}

impl MixtureFit {
    /// Upper end of the fitted support.
    pub fn upper_endpoint(&self) -> f64 {
        if self.xi < 0.0 && self.xi.abs() >= XI_ZERO {
            self.u - self.sigma_u / self.xi
        } else {
            f64::INFINITY
        }
    }
}

/// Empirical quantile level of the bulk-based mixture threshold and its
/// standard error.
pub fn suggest_threshold(sample: &[f64]) -> Result<(f64, f64)> {
    suggest_threshold_with(sample, &MixtureOptions::default())
}

pub fn suggest_threshold_with(sample: &[f64], opts: &MixtureOptions) -> Result<(f64, f64)> {
    let f = fit_mixture_with(sample, TailMode::BulkBased, opts)?;
    Ok((f.quantile_level, f.se_level))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::integrate;
    use crate::rng::Philox4x32;
    use crate::simulate::{sim_gpd, sim_spliced};

    fn normals(n: usize, seed: u64) -> Vec<f64> {
        let mut r = Philox4x32::new(seed);
        (0..n).map(|_| r.normal()).collect()
    }

    #[test]
    fn binned_loo_matches_exact() {
        let x = sorted(&normals(400, 3));
        let top = quantile_type7(&x, 0.99);
        let loo = binned_loo(&x, 0.3, top, 2048);
        for i in (0..400).step_by(37) {
            if x[i] <= top {
                assert!((loo[i] - ln_loo_density(&x, 0.3, i)).abs() < 1e-3, "{i}");
            }
        }
    }

    #[test]
    fn density_integrates_to_one() {
        let x = normals(2000, 1);
        for mode in [TailMode::BulkBased, TailMode::Parameterised] {
            let f = fit_mixture(&x, mode).unwrap();
            let lo = f.centres[0] - 10.0 * f.bandwidth;
            let (a, _) = integrate(|t| mixture_density(&f, t), lo, f.u, 1e-10, 1e-10);
            let (b, _) = integrate(|s| mixture_density(&f, f.u + s / (1.0 - s)) / ((1.0 - s) * (1.0 - s)), 0.0, 1.0, 1e-10, 1e-10);
            assert!((a + b - 1.0).abs() < 1e-3, "{mode:?}: {}", a + b);
        }
    }

    #[test]
    fn parameterised_reduces_to_bulk_based() {
        let x = normals(300, 7);
        let (g, u) = (0.4, 0.8);
        let h_u = kde_cdf(&x, g, u);
        let a = mixture_loglik(&x, g, u, 0.5, 0.1, TailMode::BulkBased, None);
        let b = mixture_loglik(&x, g, u, 0.5, 0.1, TailMode::Parameterised, Some(1.0 - h_u));
        assert!((a - b).abs() < 1e-9 * a.abs(), "{a} {b}");
    }

    #[test]
    fn cdf_properties() {
        let x = sim_spliced(5000, 0.9, 1.0, 0.3, 5);
        let f = fit_mixture(&x, TailMode::BulkBased).unwrap();
        assert!((mixture_cdf(&f, f.u) - (1.0 - f.phi_u)).abs() < 1e-12);
        assert!((mixture_cdf(&f, 1e12) - 1.0).abs() < 1e-9);
        let e = EmpiricalCdf::new(&x).unwrap();
        for &t in &[-1.5, -0.5, 0.0, 0.5, 1.0] {
            assert!((mixture_cdf(&f, t) - e.cdf(t)).abs() < 0.03, "{t}");
        }
        let (a, b) = (f.centres[0] - 1.0, f.centres[f.centres.len() - 1] + 1.0);
        let mut prev = 0.0;
        for k in 0..10_000 {
            let t = a + (b - a) * k as f64 / 9999.0;
            let c = mixture_cdf(&f, t);
            assert!(mixture_density(&f, t) >= 0.0);
            assert!(c >= prev - 1e-15, "non-monotone at {t}");
            prev = c;
        }
    }

    #[test]
    fn parameterised_bulk_term_at_threshold() {
        let x = sim_spliced(2000, 0.9, 1.0, 0.3, 8);
        let f = fit_mixture(&x, TailMode::Parameterised).unwrap();
        assert_eq!(mixture_cdf(&f, f.u), (1.0 - f.phi_u) * kde_cdf(&f.centres, f.bandwidth, f.u) / kde_cdf(&f.centres, f.bandwidth, f.u));
        assert!((mixture_cdf(&f, f.u) - (1.0 - f.phi_u)).abs() < 1e-15);
    }

    #[test]
    fn spliced_sample_near_splice() {
        let (q, se) = suggest_threshold(&sim_spliced(5000, 0.9, 1.0, 0.3, 2)).unwrap();
        assert!((0.85..0.95).contains(&q), "{q} ({se})");
    }

    #[test]
    fn pure_gpd_goes_low() {
        let f = fit_mixture(&sim_gpd(1.0, 0.3, 3000, 4), TailMode::BulkBased).unwrap();
        assert!(f.quantile_level < 0.7, "{}", f.quantile_level);
    }

    #[test]
    fn constant_sample_is_degenerate() {
        assert!(fit_mixture(&[2.0; 500], TailMode::BulkBased).is_err());
    }

    #[test]
    fn small_sample_rejected() {
        assert!(fit_mixture(&normals(150, 1), TailMode::BulkBased).is_err());
    }
}
