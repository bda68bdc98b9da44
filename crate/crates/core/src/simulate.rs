//! Seeded generators used as ground truth.

use chrono::{Datelike, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::bvpp::{DependenceFamily, FamilyTag};
use crate::error::{Error, Result};
use crate::market_data::{PriceSeries, ReturnPanel};
use crate::numeric::{cholesky, normal_cdf, normal_quantile, normal_sf};
use crate::rng::Philox4x32;

/// GPD excesses by inversion: `σ(U^{-ξ} - 1)/ξ`, exponential at ξ = 0.
pub fn sim_gpd(sigma: f64, xi: f64, n: usize, seed: u64) -> Vec<f64> {
    let mut rng = Philox4x32::new(seed);
    (0..n)
        .map(|_| {
            let u = rng.uniform_open();
            if xi.abs() < crate::gpd::XI_ZERO {
                -sigma * u.ln()
            } else {
                sigma * (u.powf(-xi) - 1.0) / xi
            }
        })
        .collect()
}

/// Normal bulk below its `splice_level` quantile joined to a GPD tail above
/// it. The tail starts exactly at the splice point, so the population
/// `splice_level` quantile is the true threshold.
pub fn sim_spliced(n: usize, splice_level: f64, sigma: f64, xi: f64, seed: u64) -> Vec<f64> {
    let mut rng = Philox4x32::new(seed);
    let u = normal_quantile(splice_level);
    (0..n)
        .map(|_| {
            let v = rng.uniform_open();
            if v < splice_level {
                normal_quantile(v)
            } else {
                let w = (1.0 - v) / (1.0 - splice_level);
                u + crate::gpd::quantile_excess(1.0 - w, sigma, xi)
            }
        })
        .collect()
}

/// Bivariate extreme-value pairs with unit-Fréchet margins.
///
/// The logistic family uses positive-stable mixing: with `S` positive
/// α-stable (Kanter's representation) and independent standard exponentials
/// `E_1, E_2`, `(S / E_j)^α` has exponent function `(x^{-1/α} + y^{-1/α})^α`.
/// Other families draw `x` from its margin and `y` by inverting the
/// conditional distribution `C(y | x)` on the log scale.
pub fn sim_bvevd(family: &DependenceFamily, n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    let mut rng = Philox4x32::new(seed);
    if family.tag == FamilyTag::Logistic {
        let a = family.params[0];
        return Ok((0..n)
            .map(|_| {
                if a >= 1.0 {
                    return (1.0 / rng.exponential(), 1.0 / rng.exponential());
                }
                let u = std::f64::consts::PI * rng.uniform_open();
                let w = rng.exponential();
                let s = (a * u).sin() * (((1.0 - a) * u).sin() / w).powf((1.0 - a) / a) / u.sin().powf(1.0 / a);
                ((s / rng.exponential()).powf(a), (s / rng.exponential()).powf(a))
            })
            .collect());
    }
    (0..n)
        .map(|_| {
            let x = -1.0 / rng.uniform_open().ln();
            let p = rng.uniform_open();
            Ok((x, invert_conditional(family, x, p)?))
        })
        .collect()
}

/// Solves `C(y | x) = p` for `y` by Newton steps on `ln y` inside a
/// shrinking bisection bracket, to 1e-10 on the log scale.
fn invert_conditional(family: &DependenceFamily, x: f64, p: f64) -> Result<f64> {
    let c = |t: f64| family.conditional_cdf(t.exp(), x);
    let mut t = (-1.0 / p.ln()).ln();
    let (mut lo, mut hi) = (t - 1.0, t + 1.0);
    let mut k = 0;
    while c(lo)? > p {
        lo -= 2f64.powi(k);
        k += 1;
        if k > 60 {
            return Err(Error::NonConvergence("conditional inversion: lower bracket".into()));
        }
    }
    while c(hi)? < p {
        hi += 2f64.powi(k);
        k += 1;
        if k > 120 {
            return Err(Error::NonConvergence("conditional inversion: upper bracket".into()));
        }
    }
    for _ in 0..200 {
        let f = c(t)? - p;
        if f > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let y = t.exp();
        let d = y * family.conditional_density(y, x)?;
        let newton = t - f / d;
        let next = if d > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - t).abs() < 1e-10 || hi - lo < 1e-10 {
            return Ok(next.exp());
        }
        t = next;
    }
    Err(Error::NonConvergence("conditional inversion did not converge".into()))
}

/// Scale the copula's uniforms are mapped to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CopulaMargin {
    Uniform,
    Normal,
    Laplace,
    Frechet,
    /// Student-t with 4 degrees of freedom.
    StudentT4,
}

/// Student-t(4) quantile in closed form.
pub fn t4_quantile(p: f64) -> f64 {
    let a = 4.0 * p * (1.0 - p);
    let q = ((a.sqrt()).acos() / 3.0).cos() / a.sqrt();
    (p - 0.5).signum() * 2.0 * (q - 1.0).max(0.0).sqrt()
}

/// Gaussian-copula sample, returned column-major.
pub fn sim_gauss_copula(corr: &[Vec<f64>], n: usize, seed: u64, margin: CopulaMargin) -> Result<Vec<Vec<f64>>> {
    let d = corr.len();
    if d == 0 || corr.iter().any(|r| r.len() != d) {
        return Err(Error::invalid("correlation matrix must be square and non-empty"));
    }
    for i in 0..d {
        for j in 0..d {
            if (corr[i][j] - corr[j][i]).abs() > 1e-12 {
                return Err(Error::invalid("correlation matrix must be symmetric"));
            }
        }
    }
    let l = cholesky(corr).ok_or_else(|| Error::invalid("correlation matrix is not positive definite"))?;
    let mut rng = Philox4x32::new(seed);
    let mut cols = vec![Vec::with_capacity(n); d];
    let mut z = vec![0.0; d];
    for _ in 0..n {
        for v in z.iter_mut() {
            *v = rng.normal();
        }
        for i in 0..d {
            let g: f64 = (0..=i).map(|k| l[i][k] * z[k]).sum();
            let value = match margin {
                CopulaMargin::Normal => g,
                CopulaMargin::Uniform => normal_cdf(g),
                CopulaMargin::Laplace => {
                    if g < 0.0 {
                        (2.0 * normal_cdf(g)).ln()
                    } else {
                        -(2.0 * normal_sf(g)).ln()
                    }
                }
                CopulaMargin::Frechet => -1.0 / (-normal_sf(g)).ln_1p(),
                CopulaMargin::StudentT4 => {
                    if g < 0.0 {
                        t4_quantile(normal_cdf(g))
                    } else {
                        -t4_quantile(normal_sf(g))
                    }
                }
            };
            cols[i].push(value);
        }
    }
    Ok(cols)
}

/// `n` weekdays starting at `start`.
pub fn business_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d.succ_opt().expect("date in range");
    }
    out
}

/// Gaussian-copula panel labelled with business days from 2010-01-05.
pub fn sim_gauss_copula_panel(market_ids: &[&str], corr: &[Vec<f64>], n: usize, seed: u64, margin: CopulaMargin) -> Result<ReturnPanel> {
    if market_ids.len() != corr.len() {
        return Err(Error::invalid("one market label per correlation row required"));
    }
    let cols = sim_gauss_copula(corr, n, seed, margin)?;
    let start = NaiveDate::from_ymd_opt(2010, 1, 5).expect("valid date");
    ReturnPanel::new(market_ids.iter().map(|s| s.to_string()).collect(), business_days(start, n), cols)
}

pub const DEMO_SEED: u64 = 20_100_105;
pub const DEMO_MARKETS: [&str; 5] = ["IBOV", "IMOEX", "NIFTY", "SHCOMP", "JALSH"];
pub const DEMO_RETURNS: usize = 2126;

/// Correlation profile of the demo panel: one fairly dependent pair
/// (IBOV–IMOEX), two moderate ones, the rest weak.
pub fn demo_correlation() -> Vec<Vec<f64>> {
    let mut c = vec![vec![0.2; 5]; 5];
    for (i, row) in c.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let mut set = |i: usize, j: usize, v: f64| {
        c[i][j] = v;
        c[j][i] = v;
    };
    set(0, 1, 0.55);
    set(2, 4, 0.5);
    set(0, 3, 0.45);
    c
}

/// Closing prices driven by Student-t(4) daily log returns near 1%
/// volatility, joined by a Gaussian copula, on business days from
/// 2010-01-04. Prices are rounded to 4 decimals, as written on disk.
pub fn copula_prices(market_ids: &[String], corr: &[Vec<f64>], n_returns: usize, seed: u64, start: &[f64]) -> Result<Vec<PriceSeries>> {
    if market_ids.len() != corr.len() || start.len() != corr.len() {
        return Err(Error::invalid("one market label and start price per correlation row required"));
    }
    if start.iter().any(|p| !(*p > 0.0)) {
        return Err(Error::invalid("start prices must be positive"));
    }
    let cols = sim_gauss_copula(corr, n_returns, seed, CopulaMargin::StudentT4)?;
    let first = NaiveDate::from_ymd_opt(2010, 1, 4).expect("valid date");
    let dates = business_days(first, n_returns + 1);
    let scale = 0.01 / 2f64.sqrt();
    Ok(market_ids
        .iter()
        .zip(cols)
        .zip(start)
        .map(|((id, r), &p)| {
            let mut level = p;
            let mut prices = vec![round4(p)];
            for v in r {
                level *= (scale * v).exp();
                prices.push(round4(level));
            }
            PriceSeries { market_id: id.clone(), dates: dates.clone(), prices }
        })
        .collect())
}

pub const DEMO_START_PRICES: [f64; 5] = [68_588.41, 1_422.28, 5_232.20, 3_243.76, 28_497.96];

/// The bundled synthetic demo: 5 markets, 2127 closing prices each
/// (2126 log returns).
pub fn demo_prices(seed: u64) -> Result<Vec<PriceSeries>> {
    let ids: Vec<String> = DEMO_MARKETS.iter().map(|s| s.to_string()).collect();
    copula_prices(&ids, &demo_correlation(), DEMO_RETURNS, seed, &DEMO_START_PRICES)
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corr(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
        let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
        sxy / (sxx * syy).sqrt()
    }

    #[test]
    fn gpd_exponential_mean() {
        let s = sim_gpd(1.0, 0.0, 10_000, 1);
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        assert!((mean - 1.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn gpd_quantile_and_determinism() {
        let mut s = sim_gpd(1.0, 0.5, 10_000, 2);
        assert_eq!(s, sim_gpd(1.0, 0.5, 10_000, 2));
        s.sort_by(f64::total_cmp);
        // σ((1/4)^{-ξ} - 1)/ξ = 2 at ξ = 0.5
        let q = s[7_500];
        assert!((q - 2.0).abs() < 0.1, "{q}");
        assert!((crate::gpd::quantile_excess(0.75, 1.0, 0.5) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn logistic_independence_is_uncorrelated() {
        let (x, y): (Vec<f64>, Vec<f64>) = sim_bvevd(&DependenceFamily::logistic(1.0).unwrap(), 10_000, 3).unwrap().into_iter().unzip();
        let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
        assert!(corr(&lx, &ly).abs() < 0.03);
    }

    #[test]
    fn logistic_near_complete_dependence() {
        let s = sim_bvevd(&DependenceFamily::logistic(0.01).unwrap(), 10_000, 4).unwrap();
        let close = s.iter().filter(|(x, y)| (x / (x + y) - 0.5).abs() <= 0.05).count();
        assert!(close as f64 >= 0.95 * s.len() as f64, "{close}");
    }

    #[test]
    fn margins_are_unit_frechet() {
        let cases: [(FamilyTag, &[f64]); 6] = [
            (FamilyTag::Logistic, &[0.5]),
            (FamilyTag::NegLogistic, &[1.0]),
            (FamilyTag::HuslerReiss, &[1.3]),
            (FamilyTag::Bilogistic, &[0.4, 0.7]),
            (FamilyTag::NegBilogistic, &[1.0, 3.0]),
            (FamilyTag::ColesTawn, &[0.8, 2.0]),
        ];
        for (k, (tag, p)) in cases.into_iter().enumerate() {
            let s = sim_bvevd(&DependenceFamily::new(tag, p).unwrap(), 10_000, 10 + k as u64).unwrap();
            for mut m in [s.iter().map(|p| p.0).collect::<Vec<_>>(), s.iter().map(|p| p.1).collect()] {
                m.sort_by(f64::total_cmp);
                let n = m.len() as f64;
                let d = m
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| {
                        let f = (-1.0 / v).exp();
                        (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
                    })
                    .fold(0.0, f64::max);
                assert!(d < 0.02, "{tag}: {d}");
            }
        }
    }

    #[test]
    fn copula_correlations() {
        let id = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let c = sim_gauss_copula(&id, 10_000, 5, CopulaMargin::Normal).unwrap();
        for i in 0..3 {
            for j in 0..i {
                assert!(corr(&c[i], &c[j]).abs() < 0.03);
            }
        }
        let half = vec![vec![1.0, 0.5], vec![0.5, 1.0]];
        let c = sim_gauss_copula(&half, 10_000, 6, CopulaMargin::Normal).unwrap();
        assert!((corr(&c[0], &c[1]) - 0.5).abs() < 0.03);
    }

    #[test]
    fn copula_rejects_bad_matrices() {
        assert!(sim_gauss_copula(&[vec![1.0, 2.0], vec![2.0, 1.0]], 10, 1, CopulaMargin::Normal).is_err());
        assert!(sim_gauss_copula(&[vec![1.0, 0.3], vec![0.2, 1.0]], 10, 1, CopulaMargin::Normal).is_err());
    }

    #[test]
    fn copula_margins() {
        let c = sim_gauss_copula(&[vec![1.0]], 10_000, 7, CopulaMargin::Laplace).unwrap();
        let above = c[0].iter().filter(|&&v| v > 1.0).count() as f64 / 1e4;
        assert!((above - 0.5 * (-1f64).exp()).abs() < 0.015);
        assert!((t4_quantile(0.975) - 2.776445).abs() < 1e-5);
        assert!(t4_quantile(0.5).abs() < 1e-12);
    }

    #[test]
    fn demo_is_reproducible() {
        let a = demo_prices(DEMO_SEED).unwrap();
        let b = demo_prices(DEMO_SEED).unwrap();
        assert_eq!(a.len(), 5);
        assert!(a.iter().all(|s| s.prices.len() == DEMO_RETURNS + 1 && s.dates.len() == DEMO_RETURNS + 1));
        for (s, t) in a.iter().zip(&b) {
            assert_eq!(s.prices, t.prices);
        }
        assert_ne!(a[0].prices, demo_prices(DEMO_SEED + 1).unwrap()[0].prices);
    }
}
