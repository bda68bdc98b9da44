//! Semiparametric marginal distribution and the Laplace / unit-Fréchet
//! transforms built on it.
//!
//! Below the GPD threshold the interpolated empirical CDF is used; above it
//! the fitted tail `(1 - ϑ) + ϑ G(x)` with `ϑ = 1 - quantile_level`. Because
//! the threshold is the empirical `quantile_level` quantile the two pieces
//! meet continuously.

use serde::{Deserialize, Serialize};

use crate::empirical::EmpiricalCdf;
use crate::error::{Error, Result};
use crate::gpd::{fit_gpd_with, quantile_excess, sf_excess, GpdFit, GpdOptions};
use crate::market_data::ReturnPanel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Laplace,
    Frechet,
}

impl Scale {
    pub fn tag(self) -> &'static str {
        match self {
            Scale::Laplace => "laplace",
            Scale::Frechet => "frechet",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginTransform {
    pub ecdf: EmpiricalCdf,
    pub gpd: GpdFit,
    pub target: Scale,
}

impl MarginTransform {
    /// Pairs an empirical CDF with a tail fit made on the same sample.
    pub fn new(sample: &[f64], gpd: GpdFit, target: Scale) -> Result<Self> {
        let ecdf = EmpiricalCdf::new(sample)?;
        let u = ecdf.quantile(gpd.quantile_level);
        if (u - gpd.threshold).abs() > 1e-12 * (1.0 + u.abs()) {
            return Err(Error::Mismatch(format!(
                "GPD threshold {} is not the sample's {} quantile {u}",
                gpd.threshold, gpd.quantile_level
            )));
        }
        Ok(Self { ecdf, gpd, target })
    }

    /// Fits the tail at `quantile_level` and builds the transform.
    pub fn fit(sample: &[f64], quantile_level: f64, target: Scale, opts: &GpdOptions) -> Result<Self> {
        let gpd = fit_gpd_with(sample, quantile_level, opts)?;
        Self::new(sample, gpd, target)
    }

    fn tail_mass(&self) -> f64 {
        1.0 - self.gpd.quantile_level
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x < self.gpd.threshold {
            self.ecdf.cdf(x)
        } else {
            self.gpd.quantile_level + self.tail_mass() * (1.0 - sf_excess(x - self.gpd.threshold, self.gpd.sigma, self.gpd.xi))
        }
    }

    /// Upper-tail probability, accurate where `cdf` rounds to 1.
    pub fn sf(&self, x: f64) -> f64 {
        if x < self.gpd.threshold {
            1.0 - self.ecdf.cdf(x)
        } else {
            self.tail_mass() * sf_excess(x - self.gpd.threshold, self.gpd.sigma, self.gpd.xi)
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let q = self.gpd.quantile_level;
        if p <= q {
            self.ecdf.quantile(p)
        } else {
            self.gpd.threshold + quantile_excess((p - q) / self.tail_mass(), self.gpd.sigma, self.gpd.xi)
        }
    }

    /// Inverse of `sf`.
    pub fn quantile_sf(&self, s: f64) -> f64 {
        let t = self.tail_mass();
        if s >= t {
            return self.ecdf.quantile(1.0 - s);
        }
        let e = s / t;
        let (sigma, xi) = (self.gpd.sigma, self.gpd.xi);
        let y = if xi.abs() < crate::gpd::XI_ZERO { -sigma * e.ln() } else { sigma * (e.powf(-xi) - 1.0) / xi };
        self.gpd.threshold + y
    }

    pub fn to_laplace(&self, x: f64) -> f64 {
        let p = self.cdf(x);
        if p <= 0.5 {
            (2.0 * p).ln()
        } else {
            -(2.0 * self.sf(x)).ln()
        }
    }

    pub fn from_laplace(&self, y: f64) -> f64 {
        if y <= 0.0 {
            self.quantile(0.5 * y.exp())
        } else {
            self.quantile_sf(0.5 * (-y).exp())
        }
    }

    pub fn to_frechet(&self, x: f64) -> f64 {
        let p = self.cdf(x);
        let ln_p = if p <= 0.5 { p.ln() } else { (-self.sf(x)).ln_1p() };
        -1.0 / ln_p
    }

    pub fn from_frechet(&self, z: f64) -> f64 {
        let ln_p = -1.0 / z;
        if ln_p < -(2f64.ln()) {
            self.quantile(ln_p.exp())
        } else {
            self.quantile_sf(-ln_p.exp_m1())
        }
    }

    /// Forward map to `self.target`.
    pub fn forward(&self, x: f64) -> f64 {
        match self.target {
            Scale::Laplace => self.to_laplace(x),
            Scale::Frechet => self.to_frechet(x),
        }
    }

    pub fn inverse(&self, y: f64) -> f64 {
        match self.target {
            Scale::Laplace => self.from_laplace(y),
            Scale::Frechet => self.from_frechet(y),
        }
    }
}

pub fn semiparametric_cdf(t: &MarginTransform, x: f64) -> f64 {
    t.cdf(x)
}

/// Laplace value of a probability.
pub fn laplace_of_p(p: f64) -> f64 {
    crate::numeric::laplace_quantile(p)
}

/// Unit-Fréchet value of a probability.
pub fn frechet_of_p(p: f64) -> f64 {
    -1.0 / p.ln()
}

/// Fits one transform per panel column with per-column quantile levels.
pub fn fit_panel_margins(panel: &ReturnPanel, levels: &[f64], target: Scale, opts: &GpdOptions) -> Result<Vec<MarginTransform>> {
    if levels.len() != panel.n_markets() {
        return Err(Error::invalid(format!("{} quantile levels for {} markets", levels.len(), panel.n_markets())));
    }
    panel.columns.iter().zip(levels).map(|(c, &q)| MarginTransform::fit(c, q, target, opts)).collect()
}

/// Applies each transform's forward map to its column.
pub fn transform_panel(panel: &ReturnPanel, margins: &[MarginTransform], target: Scale) -> Result<ReturnPanel> {
    if margins.len() != panel.n_markets() {
        return Err(Error::invalid(format!("{} transforms for {} markets", margins.len(), panel.n_markets())));
    }
    let columns = panel
        .columns
        .iter()
        .zip(margins)
        .map(|(c, m)| {
            c.iter()
                .map(|&x| match target {
                    Scale::Laplace => m.to_laplace(x),
                    Scale::Frechet => m.to_frechet(x),
                })
                .collect()
        })
        .collect();
    ReturnPanel::new(panel.market_ids.clone(), panel.dates.clone(), columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::laplace_cdf;
    use crate::rng::Philox4x32;

    fn normal_sample(n: usize, seed: u64) -> Vec<f64> {
        let mut r = Philox4x32::new(seed);
        (0..n).map(|_| r.normal()).collect()
    }

    fn transform(level: f64) -> (Vec<f64>, MarginTransform) {
        let x = normal_sample(2000, 4);
        let t = MarginTransform::fit(&x, level, Scale::Laplace, &GpdOptions::default()).unwrap();
        (x, t)
    }

    #[test]
    fn threshold_maps_to_level() {
        let (_, t) = transform(0.7);
        assert_eq!(t.cdf(t.gpd.threshold), 0.7);
        let below = t.cdf(t.gpd.threshold - 1e-12);
        assert!((below - 0.7).abs() < 1e-9);
    }

    #[test]
    fn minimum_and_tail_median() {
        let (x, t) = transform(0.7);
        let min = x.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((t.cdf(min) - 1.0 / 2001.0).abs() < 1e-15);
        let xm = t.gpd.threshold + quantile_excess(0.5, t.gpd.sigma, t.gpd.xi);
        assert!((t.cdf(xm) - 0.85).abs() < 1e-12);
    }

    #[test]
    fn closed_form_scales() {
        assert_eq!(laplace_of_p(0.5), 0.0);
        assert!((laplace_of_p(0.9) - 1.609438).abs() < 1e-6);
        assert!((laplace_of_p(0.1) + 1.609438).abs() < 1e-6);
        assert!((frechet_of_p((-1f64).exp()) - 1.0).abs() < 1e-15);
        assert!((frechet_of_p(0.5) - std::f64::consts::LOG2_E).abs() < 1e-12);
        assert!((frechet_of_p(0.7) - 2.803673).abs() < 1e-6);
    }

    #[test]
    fn round_trips_on_sample_range() {
        let (x, t) = transform(0.8);
        for &v in &x {
            let l = t.from_laplace(t.to_laplace(v));
            let f = t.from_frechet(t.to_frechet(v));
            let tol = 1e-8 * v.abs().max(1e-3);
            assert!((l - v).abs() < tol, "laplace {v} -> {l}");
            assert!((f - v).abs() < tol, "frechet {v} -> {f}");
        }
    }

    #[test]
    fn strictly_increasing_over_sample() {
        let (x, t) = transform(0.7);
        let s = crate::numeric::sorted(&x);
        let y: Vec<f64> = s.iter().map(|&v| t.to_laplace(v)).collect();
        for (w, v) in y.windows(2).zip(s.windows(2)) {
            if v[1] > v[0] {
                assert!(w[1] > w[0]);
            }
        }
    }

    #[test]
    fn laplace_margin_sup_norm() {
        let x = normal_sample(10_000, 9);
        let t = MarginTransform::fit(&x, 0.9, Scale::Laplace, &GpdOptions::default()).unwrap();
        let y = crate::numeric::sorted(&x.iter().map(|&v| t.to_laplace(v)).collect::<Vec<_>>());
        let n = y.len() as f64;
        let d = y
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let f = laplace_cdf(v);
                (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
            })
            .fold(0.0, f64::max);
        assert!(d < 0.02, "{d}");
    }

    #[test]
    fn threshold_mismatch_rejected() {
        let (x, t) = transform(0.7);
        let mut g = t.gpd.clone();
        g.threshold += 0.1;
        assert!(MarginTransform::new(&x, g, Scale::Frechet).is_err());
    }
}
