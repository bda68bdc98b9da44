//! Verbal dependence-strength labels and the CMEV / point-process comparison.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::family::{DependenceFamily, FamilyTag};
use super::fit::PpFit;
use crate::error::{Error, Result};
use crate::numeric::normal_cdf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strength {
    Independent,
    WeakToIndependent,
    Weak,
    FairlyStrong,
    Strong,
}

impl Strength {
    pub fn label(self) -> &'static str {
        match self {
            Strength::Independent => "independent",
            Strength::WeakToIndependent => "weak-to-independent",
            Strength::Weak => "weak",
            Strength::FairlyStrong => "fairly strong",
            Strength::Strong => "strong",
        }
    }

    /// Pair label from the two directional CMEV slopes: the larger |a| decides.
    pub fn from_cmev(a_ij: f64, a_ji: f64) -> Self {
        let m = a_ij.abs().max(a_ji.abs());
        if m == 0.0 {
            Strength::Independent
        } else if m < 0.3 {
            Strength::Weak
        } else if m < 0.6 {
            Strength::FairlyStrong
        } else {
            Strength::Strong
        }
    }
}

impl fmt::Display for Strength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Strength {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['_', '-'], " ").as_str() {
            "independent" | "independence" => Ok(Strength::Independent),
            "weak to independent" => Ok(Strength::WeakToIndependent),
            "weak" | "nearly weak" | "very weak" => Ok(Strength::Weak),
            "fairly strong" => Ok(Strength::FairlyStrong),
            "strong" => Ok(Strength::Strong),
            other => Err(Error::invalid(format!("unknown strength label '{other}'"))),
        }
    }
}

/// Cut points for the strength labels. Hüsler–Reiss fits are classified on
/// α directly; other families on `χ = 2 - V(1, 1)` with the cut points the
/// Hüsler–Reiss bands imply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrengthBands {
    pub husler_reiss: [f64; 3],
}

impl Default for StrengthBands {
    fn default() -> Self {
        Self { husler_reiss: [1.0, 1.32, 1.6] }
    }
}

impl StrengthBands {
    pub fn chi_cuts(&self) -> [f64; 3] {
        self.husler_reiss.map(|a| 2.0 - 2.0 * normal_cdf(1.0 / a))
    }

    fn band(cuts: &[f64; 3], v: f64) -> Strength {
        if v < cuts[0] {
            Strength::WeakToIndependent
        } else if v < cuts[1] {
            Strength::Weak
        } else if v < cuts[2] {
            Strength::FairlyStrong
        } else {
            Strength::Strong
        }
    }

    pub fn classify(&self, family: &DependenceFamily) -> Strength {
        let chi = family.chi();
        if chi.abs() < 1e-9 {
            return Strength::Independent;
        }
        match family.tag {
            FamilyTag::HuslerReiss => Self::band(&self.husler_reiss, family.params[0]),
            _ => Self::band(&self.chi_cuts(), chi),
        }
    }
}

pub fn classify_pp_strength(fit: &PpFit) -> Strength {
    StrengthBands::default().classify(&fit.family)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Agreement {
    Agree,
    /// Adjacent labels.
    Near,
    Disagree,
}

/// A: both weak (or weaker); B: agreeing on a stronger label; C: mismatched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Panel {
    A,
    B,
    C,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub pair: String,
    pub cmev: Strength,
    pub pp: Strength,
    pub agreement: Agreement,
    pub panel: Panel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub agree: usize,
    pub near: usize,
    pub disagree: usize,
    /// Row counts in panels A, B and C.
    pub panels: [usize; 3],
}

impl Comparison {
    pub fn agreement_rate(&self) -> f64 {
        self.agree as f64 / self.rows.len() as f64
    }
}

/// Joins the two label sets by pair name; row order follows `cmev`.
pub fn compare_models(cmev: &[(String, Strength)], pp: &[(String, Strength)]) -> Result<Comparison> {
    if cmev.is_empty() || pp.is_empty() {
        return Err(Error::invalid("comparison needs at least one market pair"));
    }
    let lookup: HashMap<&str, Strength> = pp.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    if lookup.len() != pp.len() || cmev.len() != pp.len() {
        return Err(Error::Mismatch("CMEV and point-process pair sets differ".into()));
    }
    let mut rows = Vec::with_capacity(cmev.len());
    let mut panels = [0; 3];
    for (pair, c) in cmev {
        let p = *lookup.get(pair.as_str()).ok_or_else(|| Error::Mismatch(format!("pair '{pair}' missing from point-process labels")))?;
        let gap = (*c as i32 - p as i32).abs();
        let agreement = match gap {
            0 => Agreement::Agree,
            1 => Agreement::Near,
            _ => Agreement::Disagree,
        };
        let panel = if gap != 0 {
            Panel::C
        } else if *c <= Strength::Weak {
            Panel::A
        } else {
            Panel::B
        };
        panels[panel as usize] += 1;
        rows.push(ComparisonRow { pair: pair.clone(), cmev: *c, pp: p, agreement, panel });
    }
    let count = |a: Agreement| rows.iter().filter(|r| r.agreement == a).count();
    Ok(Comparison { agree: count(Agreement::Agree), near: count(Agreement::Near), disagree: count(Agreement::Disagree), panels, rows })
}
