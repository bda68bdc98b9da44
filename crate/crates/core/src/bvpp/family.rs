//! The six parametric bivariate extreme-value dependence families.
//!
//! Each family is given by its exponent function `V` on unit-Fréchet
//! margins, `G(x, y) = exp(-V(x, y))`, with the spectral density
//! `h(w) = -½ V_xy(w, 1 - w)` in closed form. Bilogistic and negative
//! bilogistic forms depend on an implicit root `q`, solved on the logit
//! scale.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::numeric::{integrate, normal_cdf, normal_ln_pdf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTag {
    Logistic,
    NegLogistic,
    HuslerReiss,
    Bilogistic,
    NegBilogistic,
    ColesTawn,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 6] = [
        FamilyTag::Logistic,
        FamilyTag::NegLogistic,
        FamilyTag::HuslerReiss,
        FamilyTag::Bilogistic,
        FamilyTag::NegBilogistic,
        FamilyTag::ColesTawn,
    ];

    pub fn n_params(self) -> usize {
        match self {
            FamilyTag::Logistic | FamilyTag::NegLogistic | FamilyTag::HuslerReiss => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FamilyTag::Logistic => "logistic",
            FamilyTag::NegLogistic => "neg_logistic",
            FamilyTag::HuslerReiss => "husler_reiss",
            FamilyTag::Bilogistic => "bilogistic",
            FamilyTag::NegBilogistic => "neg_bilogistic",
            FamilyTag::ColesTawn => "coles_tawn",
        }
    }

    /// Parameters restricted to the unit interval (others are positive).
    pub fn unit_interval(self) -> bool {
        matches!(self, FamilyTag::Logistic | FamilyTag::Bilogistic)
    }

    pub fn is_symmetric(self) -> bool {
        self.n_params() == 1
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FamilyTag::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| Error::invalid(format!("unknown dependence family '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceFamily {
    pub tag: FamilyTag,
    pub params: Vec<f64>,
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `(ln q, q)` for `q = 1 / (1 + e^{-s})`.
fn ln_logistic(s: f64) -> (f64, f64) {
    if s > 0.0 {
        let e = (-s).exp();
        (-e.ln_1p(), 1.0 / (1.0 + e))
    } else {
        let e = s.exp();
        (s - e.ln_1p(), e / (1.0 + e))
    }
}

/// Root of a strictly monotone `g` on the logit scale, starting from `s0`.
/// With `|g'| ≥ slope` the root lies within `|g(s0)| / slope` of `s0`; the
/// search is safeguarded Newton inside that bracket.
fn logit_root<G: Fn(f64) -> (f64, f64)>(g: G, s0: f64, slope: f64, increasing: bool) -> Result<f64> {
    let sign = |v: f64| if increasing { v } else { -v };
    let (v0, _) = g(s0);
    if !v0.is_finite() {
        return Err(Error::NonConvergence("implicit root equation not finite".into()));
    }
    let width = v0.abs() / slope * (1.0 + 1e-9) + 1e-12;
    let (mut lo, mut hi) = (s0 - width, s0 + width);
    let mut s = s0;
    for _ in 0..200 {
        let (v, dv) = g(s);
        let v = sign(v);
        if v == 0.0 {
            break;
        }
        if v > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let newton = s - v / sign(dv);
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        let done = (next - s).abs() < 1e-12 * (1.0 + s.abs()) || hi - lo < 1e-12 * (1.0 + s.abs());
        s = next;
        if done {
            break;
        }
    }
    Ok(s)
}

fn ln_q_pair(s: f64) -> (f64, f64) {
    (-softplus(-s), -softplus(s))
}

impl DependenceFamily {
    pub fn new(tag: FamilyTag, params: &[f64]) -> Result<Self> {
        if params.len() != tag.n_params() {
            return Err(Error::invalid(format!("{tag} takes {} parameters, got {}", tag.n_params(), params.len())));
        }
        let ok = match tag {
            FamilyTag::Logistic => params[0] > 0.0 && params[0] <= 1.0,
            FamilyTag::Bilogistic => params.iter().all(|&p| p > 0.0 && p < 1.0),
            _ => params.iter().all(|&p| p > 0.0 && p.is_finite()),
        };
        if !ok {
            return Err(Error::invalid(format!("{tag} parameters {params:?} outside the family domain")));
        }
        Ok(Self { tag, params: params.to_vec() })
    }

    pub fn logistic(alpha: f64) -> Result<Self> {
        Self::new(FamilyTag::Logistic, &[alpha])
    }

    pub fn husler_reiss(alpha: f64) -> Result<Self> {
        Self::new(FamilyTag::HuslerReiss, &[alpha])
    }

    fn a(&self) -> f64 {
        self.params[0]
    }

    fn b(&self) -> f64 {
        self.params[1]
    }

    fn bilog_root(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        self.bilog_logit(x, y, f64::NAN).map(ln_q_pair)
    }

    fn negbilog_root(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        self.negbilog_logit(x, y, f64::NAN).map(ln_q_pair)
    }

    /// Logit of the bilogistic root at `(x, y)`, searched from `hint` when finite.
    fn bilog_logit(&self, x: f64, y: f64, hint: f64) -> Result<f64> {
        let (a, b) = (self.a(), self.b());
        let c = ((1.0 - a) / (1.0 - b)).ln() + y.ln() - x.ln();
        // (1-a)(1-q)^b / x = (1-b) q^a / y, decreasing in logit q
        let s0 = if hint.is_finite() {
            hint
        } else if c > 0.0 {
            c / b
        } else {
            c / a
        };
        logit_root(
            |s| {
                let (lq, q) = ln_logistic(s);
                (c + b * (lq - s) - a * lq, -b * q - a * (1.0 - q))
            },
            s0,
            a.min(b),
            false,
        )
    }

    fn negbilog_logit(&self, x: f64, y: f64, hint: f64) -> Result<f64> {
        let (a, b) = (self.a(), self.b());
        let c = ((1.0 + a) / (1.0 + b)).ln() + y.ln() - x.ln();
        // (1+a) q^a / x = (1+b)(1-q)^b / y, increasing in logit q
        let s0 = if hint.is_finite() {
            hint
        } else if c < 0.0 {
            -c / b
        } else {
            -c / a
        };
        logit_root(
            |s| {
                let (lq, q) = ln_logistic(s);
                (c + a * lq - b * (lq - s), a * (1.0 - q) + b * q)
            },
            s0,
            a.min(b),
            true,
        )
    }

    fn check_xy(x: f64, y: f64) -> Result<()> {
        if x > 0.0 && y > 0.0 {
            Ok(())
        } else {
            Err(Error::domain(format!("exponent arguments must be positive, got ({x}, {y})")))
        }
    }

    /// Exponent function `V(x, y)`.
    pub fn exponent_v(&self, x: f64, y: f64) -> Result<f64> {
        Self::check_xy(x, y)?;
        Ok(match self.tag {
            FamilyTag::Logistic => {
                let a = self.a();
                let (lx, ly) = (-x.ln() / a, -y.ln() / a);
                let m = lx.max(ly);
                (a * (m + ((lx - m).exp() + (ly - m).exp()).ln())).exp()
            }
            FamilyTag::NegLogistic => {
                let a = self.a();
                1.0 / x + 1.0 / y - (x.powf(a) + y.powf(a)).powf(-1.0 / a)
            }
            FamilyTag::HuslerReiss => {
                let a = self.a();
                let l = (y / x).ln();
                normal_cdf(1.0 / a + 0.5 * a * l) / x + normal_cdf(1.0 / a - 0.5 * a * l) / y
            }
            FamilyTag::Bilogistic => {
                let (a, b) = (self.a(), self.b());
                let (lq, l1q) = self.bilog_root(x, y)?;
                ((1.0 - a) * lq).exp() / x + ((1.0 - b) * l1q).exp() / y
            }
            FamilyTag::NegBilogistic => {
                let (a, b) = (self.a(), self.b());
                let (lq, l1q) = self.negbilog_root(x, y)?;
                1.0 / x + 1.0 / y - ((1.0 + a) * lq).exp() / x - ((1.0 + b) * l1q).exp() / y
            }
            FamilyTag::ColesTawn => {
                let (a, b) = (self.a(), self.b());
                let q = a * x / (a * x + b * y);
                let p = b * y / (a * x + b * y);
                beta_reg(b, a + 1.0, p) / x + beta_reg(a, b + 1.0, q) / y
            }
        })
    }

    /// Partial derivative `∂V/∂x`.
    pub fn v_x(&self, x: f64, y: f64) -> Result<f64> {
        Self::check_xy(x, y)?;
        Ok(match self.tag {
            FamilyTag::Logistic => {
                let a = self.a();
                let (lx, ly) = (-x.ln() / a, -y.ln() / a);
                let m = lx.max(ly);
                let ls = m + ((lx - m).exp() + (ly - m).exp()).ln();
                -(lx - x.ln() + (a - 1.0) * ls).exp()
            }
            FamilyTag::NegLogistic => {
                let a = self.a();
                let t = x.powf(a) + y.powf(a);
                -1.0 / (x * x) + t.powf(-1.0 / a - 1.0) * x.powf(a - 1.0)
            }
            FamilyTag::HuslerReiss => {
                let a = self.a();
                -normal_cdf(1.0 / a + 0.5 * a * (y / x).ln()) / (x * x)
            }
            FamilyTag::Bilogistic => {
                let (lq, _) = self.bilog_root(x, y)?;
                -((1.0 - self.a()) * lq).exp() / (x * x)
            }
            FamilyTag::NegBilogistic => {
                let (lq, _) = self.negbilog_root(x, y)?;
                ((1.0 + self.a()) * lq).exp_m1() / (x * x)
            }
            FamilyTag::ColesTawn => {
                let (a, b) = (self.a(), self.b());
                let p = b * y / (a * x + b * y);
                -beta_reg(b, a + 1.0, p) / (x * x)
            }
        })
    }

    /// Log spectral density at `w ∈ (0, 1)`.
    pub fn ln_h(&self, w: f64) -> Result<f64> {
        let mut hint = f64::NAN;
        self.ln_h_hinted(w, &mut hint)
    }

    /// As [`Self::ln_h`], reusing and updating the logit of the implicit root
    /// for the bilogistic families. Repeated evaluation at nearby
    /// parameters then needs only a Newton step or two.
    pub fn ln_h_hinted(&self, w: f64, hint: &mut f64) -> Result<f64> {
        if !(w > 0.0 && w < 1.0) {
            return Err(Error::domain(format!("angular coordinate {w} outside (0, 1)")));
        }
        let (x, y) = (w, 1.0 - w);
        let (lx, ly) = (x.ln(), y.ln());
        Ok(match self.tag {
            FamilyTag::Logistic => {
                let a = self.a();
                if a >= 1.0 {
                    return Ok(f64::NEG_INFINITY);
                }
                let (ex, ey) = (-lx / a, -ly / a);
                let m = ex.max(ey);
                let ls = m + ((ex - m).exp() + (ey - m).exp()).ln();
                (0.5 * (1.0 / a - 1.0)).ln() + (-1.0 - 1.0 / a) * (lx + ly) + (a - 2.0) * ls
            }
            FamilyTag::NegLogistic => {
                let a = self.a();
                let (ex, ey) = (a * lx, a * ly);
                let m = ex.max(ey);
                let ls = m + ((ex - m).exp() + (ey - m).exp()).ln();
                (0.5 * (1.0 + a)).ln() + (a - 1.0) * (lx + ly) + (-1.0 / a - 2.0) * ls
            }
            FamilyTag::HuslerReiss => {
                let a = self.a();
                a.ln() + normal_ln_pdf(1.0 / a + 0.5 * a * (ly - lx)) - 4f64.ln() - 2.0 * lx - ly
            }
            FamilyTag::Bilogistic => {
                let (a, b) = (self.a(), self.b());
                let root = self.bilog_logit(x, y, *hint)?;
                *hint = root;
                let (lq, l1q) = ln_q_pair(root);
                let q = lq.exp();
                let ln_k = (1.0 - b).ln() + a * lq - ly;
                (0.5 * (1.0 - a) * (1.0 - b)).ln() - 2.0 * (lx + ly) - ln_k - (b * q + a * (1.0 - q)).ln() + lq + l1q
            }
            FamilyTag::NegBilogistic => {
                let (a, b) = (self.a(), self.b());
                let root = self.negbilog_logit(x, y, *hint)?;
                *hint = root;
                let (lq, l1q) = ln_q_pair(root);
                let fq = (1.0 + a) * a * ((a - 1.0) * lq - lx).exp() + (1.0 + b) * b * ((b - 1.0) * l1q - ly).exp();
                (0.5 * (1.0 + a) * (1.0 + b)).ln() + a * lq + b * l1q - 2.0 * (lx + ly) - fq.ln()
            }
            FamilyTag::ColesTawn => {
                let (a, b) = (self.a(), self.b());
                0.5f64.ln() + ln_gamma(a + b + 1.0) - ln_gamma(a) - ln_gamma(b) + a * a.ln() + b * b.ln() + (a - 1.0) * lx + (b - 1.0) * ly
                    - (a + b + 1.0) * (a * x + b * y).ln()
            }
        })
    }

    pub fn h(&self, w: f64) -> Result<f64> {
        Ok(self.ln_h(w)?.exp())
    }

    /// `∂V/∂y` from Euler's relation `x V_x + y V_y = -V`.
    pub fn v_y(&self, x: f64, y: f64) -> Result<f64> {
        Ok((-self.exponent_v(x, y)? - x * self.v_x(x, y)?) / y)
    }

    /// Mixed partial `∂²V/∂x∂y = -2 h(w) / r³`.
    pub fn v_xy(&self, x: f64, y: f64) -> Result<f64> {
        let r = x + y;
        Ok(-2.0 * self.h(x / r)? / (r * r * r))
    }

    /// `P(Y ≤ y | X = x)` for the unit-Fréchet bivariate law.
    pub fn conditional_cdf(&self, y: f64, x: f64) -> Result<f64> {
        let v = self.exponent_v(x, y)?;
        Ok((-self.v_x(x, y)? * x * x * (1.0 / x - v).exp()).clamp(0.0, 1.0))
    }

    /// Derivative of `conditional_cdf` in `y`.
    pub fn conditional_density(&self, y: f64, x: f64) -> Result<f64> {
        let v = self.exponent_v(x, y)?;
        let vx = self.v_x(x, y)?;
        let vy = (-v - x * vx) / y;
        Ok(x * x * (1.0 / x - v).exp() * (vx * vy - self.v_xy(x, y)?))
    }

    /// `-½ V_xy(w, 1 - w)` by a fourth-order central difference of `V` with
    /// step `rel_step · min(w, 1 - w)`. Independent of the closed-form density.
    pub fn h_finite_difference(&self, w: f64, rel_step: f64) -> Result<f64> {
        const C: [(f64, f64); 4] = [(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)];
        let e = rel_step * w.min(1.0 - w);
        let mut s = 0.0;
        for (i, ci) in C {
            for (j, cj) in C {
                s += ci * cj * self.exponent_v(w + i * e, 1.0 - w + j * e)?;
            }
        }
        Ok(-0.5 * s / (e * e))
    }

    /// The same law with the two margins exchanged.
    pub fn swapped(&self) -> Self {
        let mut params = self.params.clone();
        params.reverse();
        Self { tag: self.tag, params }
    }

    /// `∫ w^k dH(w)` by adaptive quadrature. Each half of (0, 1) is
    /// integrated on `w = e^{-t}`, the upper half through the swapped law, so
    /// edge singularities are resolved without rounding `1 - w`. Breakpoints
    /// crowd towards `w = 1/2` so mass concentrated there is not missed.
    pub fn spectral_moment(&self, k: i32) -> Result<f64> {
        const OFFSETS: [f64; 12] = [0.0, 1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0, 3.0, 10.0, 40.0, 739.0];
        let other = self.swapped();
        let failure = std::cell::RefCell::new(None);
        let g = |t: f64| {
            let w = (-t).exp();
            let a = self.h(w).map(|h| w.powi(k) * h);
            let b = other.h(w).map(|h| (1.0 - w).powi(k) * h);
            match (a, b) {
                (Ok(a), Ok(b)) => (a + b) * w,
                (Err(e), _) | (_, Err(e)) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            }
        };
        let t0 = 2f64.ln();
        let v: f64 = OFFSETS.windows(2).map(|p| integrate(g, t0 + p[0], t0 + p[1], 1e-14, 1e-12).0).sum();
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }

    /// Extremal coefficient summary `χ = 2 - V(1, 1)`, from 0 (independence) to 1.
    pub fn chi(&self) -> f64 {
        2.0 - self.exponent_v(1.0, 1.0).expect("unit arguments are valid")
    }
}

/// Pseudo-polar coordinates `(r, w) = (x + y, x / (x + y))`.
pub fn pseudo_polar(x: f64, y: f64) -> Result<(f64, f64)> {
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::domain(format!("pseudo-polar coordinates need positive input, got ({x}, {y})")));
    }
    let r = x + y;
    Ok((r, x / r))
}

pub fn from_pseudo_polar(r: f64, w: f64) -> (f64, f64) {
    (r * w, r * (1.0 - w))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn grid() -> Vec<DependenceFamily> {
        let mut out = Vec::new();
        for &a in &[0.2, 0.5, 0.8] {
            out.push(DependenceFamily::new(FamilyTag::Logistic, &[a]).unwrap());
        }
        for &a in &[0.3, 1.0, 3.0] {
            out.push(DependenceFamily::new(FamilyTag::NegLogistic, &[a]).unwrap());
            out.push(DependenceFamily::new(FamilyTag::HuslerReiss, &[a]).unwrap());
        }
        for p in [[0.2, 0.7], [0.5, 0.5], [0.8, 0.3]] {
            out.push(DependenceFamily::new(FamilyTag::Bilogistic, &p).unwrap());
        }
        for p in [[0.5, 2.0], [1.2, 0.6], [3.0, 3.0]] {
            out.push(DependenceFamily::new(FamilyTag::NegBilogistic, &p).unwrap());
            out.push(DependenceFamily::new(FamilyTag::ColesTawn, &p).unwrap());
        }
        out
    }

    #[test]
    fn closed_form_values() {
        let l1 = DependenceFamily::logistic(1.0).unwrap();
        assert!((l1.exponent_v(1.0, 1.0).unwrap() - 2.0).abs() < 1e-14);
        let l = DependenceFamily::logistic(0.5).unwrap();
        assert!((l.exponent_v(1.0, 1.0).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        let hr = DependenceFamily::husler_reiss(1e-4).unwrap();
        assert!((hr.exponent_v(1.0, 1.0).unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn bilogistic_reduces_to_logistic() {
        let b = DependenceFamily::new(FamilyTag::Bilogistic, &[0.4, 0.4]).unwrap();
        let l = DependenceFamily::logistic(0.4).unwrap();
        for &(x, y) in &[(0.3, 2.0), (1.0, 1.0), (5.0, 0.7)] {
            let (vb, vl) = (b.exponent_v(x, y).unwrap(), l.exponent_v(x, y).unwrap());
            assert!((vb - vl).abs() < 1e-12 * vl);
        }
    }

    #[test]
    fn symmetric_families_are_exchangeable() {
        for f in grid().iter().filter(|f| f.tag.is_symmetric()) {
            for k in 1..20 {
                let w = k as f64 / 20.0;
                let (a, b) = (f.h(w).unwrap(), f.h(1.0 - w).unwrap());
                assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-300), "{f:?} at {w}");
            }
        }
    }

    #[test]
    fn homogeneous_of_order_minus_one() {
        for f in grid() {
            for &(x, y) in &[(0.3, 2.0), (1.0, 1.0), (5.0, 0.7), (0.01, 0.02)] {
                let v = f.exponent_v(x, y).unwrap();
                for t in [0.5, 2.0, 10.0] {
                    let vt = t * f.exponent_v(t * x, t * y).unwrap();
                    assert!((vt - v).abs() < 1e-9 * v, "{f:?} ({x},{y}) t={t}");
                }
            }
        }
    }

    #[test]
    fn marginal_consistency() {
        for f in grid() {
            for &x in &[0.5, 1.0, 3.0] {
                let v = f.exponent_v(x, 1e8).unwrap();
                assert!((v - 1.0 / x).abs() < 1e-6, "{f:?} x={x}: {v}");
            }
        }
    }

    #[test]
    fn mass_and_mean_constraint() {
        for f in grid() {
            let m0 = f.spectral_moment(0).unwrap();
            let m1 = f.spectral_moment(1).unwrap();
            assert!((m0 - 1.0).abs() < 1e-6 && (m1 - 0.5).abs() < 1e-6, "{f:?}: {m0} {m1}");
        }
    }

    #[test]
    fn concentrated_mass_is_found() {
        for f in [DependenceFamily::logistic(0.1).unwrap(), DependenceFamily::husler_reiss(5.0).unwrap()] {
            assert!((f.spectral_moment(0).unwrap() - 1.0).abs() < 1e-9, "{f:?}");
        }
    }

    #[test]
    fn density_matches_finite_difference() {
        let moderate = [
            DependenceFamily::new(FamilyTag::Logistic, &[0.5]).unwrap(),
            DependenceFamily::new(FamilyTag::NegLogistic, &[1.0]).unwrap(),
            DependenceFamily::new(FamilyTag::HuslerReiss, &[1.3]).unwrap(),
            DependenceFamily::new(FamilyTag::Bilogistic, &[0.4, 0.7]).unwrap(),
            DependenceFamily::new(FamilyTag::NegBilogistic, &[1.2, 0.6]).unwrap(),
            DependenceFamily::new(FamilyTag::ColesTawn, &[0.8, 2.0]).unwrap(),
        ];
        for f in moderate {
            for k in (1..100).step_by(7) {
                let w = k as f64 / 100.0;
                let (h, fd) = (f.h(w).unwrap(), f.h_finite_difference(w, 1e-2).unwrap());
                assert!(((h - fd) / h).abs() < 1e-4, "{f:?} at {w}: {h} vs {fd}");
            }
        }
    }

    #[test]
    fn partials_match_differences() {
        for f in grid() {
            let (x, y, e) = (0.7, 1.9, 1e-6);
            let fd = (f.exponent_v(x + e, y).unwrap() - f.exponent_v(x - e, y).unwrap()) / (2.0 * e);
            let vx = f.v_x(x, y).unwrap();
            assert!((fd - vx).abs() < 1e-7 * vx.abs(), "{f:?}");
        }
    }

    #[test]
    fn chi_decreases_with_logistic_alpha() {
        let chis: Vec<f64> = (1..=20).map(|k| DependenceFamily::logistic(k as f64 / 20.0).unwrap().chi()).collect();
        assert!(chis.windows(2).all(|p| p[1] < p[0]));
        assert!(chis[19].abs() < 1e-12);
    }

    #[test]
    fn pseudo_polar_round_trip() {
        assert_eq!(pseudo_polar(3.0, 1.0).unwrap(), (4.0, 0.75));
        assert_eq!(pseudo_polar(2.5, 2.5).unwrap().1, 0.5);
        assert!(pseudo_polar(0.0, 1.0).is_err());
        for &(x, y) in &[(0.1, 0.2), (3.0, 7.0), (1e-3, 5.0)] {
            let (r, w) = pseudo_polar(x, y).unwrap();
            let (a, b) = from_pseudo_polar(r, w);
            let (r2, w2) = pseudo_polar(a, b).unwrap();
            assert!((r2 - r).abs() <= 1e-15 * r && (w2 - w).abs() <= 1e-15);
        }
    }

    #[test]
    fn domain_checks() {
        assert!(DependenceFamily::logistic(0.0).is_err());
        assert!(DependenceFamily::logistic(1.2).is_err());
        assert!(DependenceFamily::new(FamilyTag::Bilogistic, &[0.5]).is_err());
        assert!(DependenceFamily::new(FamilyTag::ColesTawn, &[1.0, -1.0]).is_err());
        assert_eq!("husler_reiss".parse::<FamilyTag>().unwrap(), FamilyTag::HuslerReiss);
    }
}
