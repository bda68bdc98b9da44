//! Interpolated empirical distribution function.
//!
//! Knots sit at the distinct sample values with plotting position
//! `rank / (n + 1)`, ties taking their averaged rank. Between knots the CDF is
//! linear; beyond the extreme knots it decays exponentially towards 0 and 1
//! with slopes matched to the adjacent segment, so the map is continuous,
//! strictly increasing and valued strictly inside (0, 1).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    knots: Vec<f64>,
    probs: Vec<f64>,
    n: usize,
    lower_scale: f64,
    upper_scale: f64,
}

impl EmpiricalCdf {
    pub fn new(sample: &[f64]) -> Result<Self> {
        if sample.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("sample contains non-finite values"));
        }
        let mut s = sample.to_vec();
        s.sort_by(f64::total_cmp);
        let n = s.len();
        let mut knots = Vec::new();
        let mut probs = Vec::new();
        let mut i = 0;
        while i < n {
            let mut j = i;
            while j + 1 < n && s[j + 1] == s[i] {
                j += 1;
            }
            // ranks i+1 ..= j+1, averaged
            let rank = 0.5 * ((i + 1) + (j + 1)) as f64;
            knots.push(s[i]);
            probs.push(rank / (n + 1) as f64);
            i = j + 1;
        }
        if knots.len() < 2 {
            return Err(Error::Degenerate("fewer than two distinct values".into()));
        }
        let k = knots.len();
        let lower_scale = probs[0] * (knots[1] - knots[0]) / (probs[1] - probs[0]);
        let upper_scale = (1.0 - probs[k - 1]) * (knots[k - 1] - knots[k - 2]) / (probs[k - 1] - probs[k - 2]);
        Ok(Self { knots, probs, n, lower_scale, upper_scale })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn min(&self) -> f64 {
        self.knots[0]
    }

    pub fn max(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.knots.len();
        if x <= self.knots[0] {
            return self.probs[0] * ((x - self.knots[0]) / self.lower_scale).exp();
        }
        if x >= self.knots[k - 1] {
            return 1.0 - (1.0 - self.probs[k - 1]) * (-(x - self.knots[k - 1]) / self.upper_scale).exp();
        }
        let hi = self.knots.partition_point(|&v| v <= x);
        let lo = hi - 1;
        let t = (x - self.knots[lo]) / (self.knots[hi] - self.knots[lo]);
        self.probs[lo] + t * (self.probs[hi] - self.probs[lo])
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let k = self.knots.len();
        if p <= self.probs[0] {
            return self.knots[0] + self.lower_scale * (p / self.probs[0]).ln();
        }
        if p >= self.probs[k - 1] {
            return self.knots[k - 1] - self.upper_scale * ((1.0 - p) / (1.0 - self.probs[k - 1])).ln();
        }
        let hi = self.probs.partition_point(|&v| v <= p);
        let lo = hi - 1;
        let t = (p - self.probs[lo]) / (self.probs[hi] - self.probs[lo]);
        self.knots[lo] + t * (self.knots[hi] - self.knots[lo])
    }
}
