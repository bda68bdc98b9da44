//! Plain-text tables laid out like the published ones. Estimates use 4
//! decimals with standard errors in parentheses; AIC uses 2.

use std::fmt::Write;

use extremal_core::bvpp::{Comparison, FamilyTag, Panel, PpFit, Strength};
use extremal_core::cmev::{HtFit, PredictionResult};
use extremal_core::gpd::GpdFit;

use crate::pipeline::{MarketGpd, MarketThreshold, PairSelection};

pub fn est(v: f64) -> String {
    format!("{v:.4}")
}

pub fn est_se(v: f64, se: f64) -> String {
    if se.is_finite() {
        format!("{v:.4} ({se:.4})")
    } else {
        format!("{v:.4} (NA)")
    }
}

pub fn family_label(tag: FamilyTag) -> &'static str {
    match tag {
        FamilyTag::Logistic => "Logistic",
        FamilyTag::NegLogistic => "Negative logistic",
        FamilyTag::HuslerReiss => "Husler-Reiss",
        FamilyTag::Bilogistic => "Bilogistic",
        FamilyTag::NegBilogistic => "Negative bilogistic",
        FamilyTag::ColesTawn => "ct (or Dirichlet)",
    }
}

fn capitalised(s: Strength) -> String {
    let l = s.label();
    let mut c = l.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn row(out: &mut String, cells: &[String], widths: &[usize]) {
    let line: Vec<String> = cells.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
    writeln!(out, "{}", line.join("  ").trim_end()).unwrap();
}

/// Conditioning market by target, rows `a` and `b`.
pub fn cmev_table(fits: &[HtFit]) -> String {
    let mut out = String::from("Dependence structure parameter estimates of the CMEV model\n");
    for f in fits {
        writeln!(out, "\nConditioning on: {}", f.conditioning_market).unwrap();
        let w = [22, 9, 9, 9, 9, 9, 9];
        let mut head = vec!["Dependence parameters".to_string()];
        head.extend(f.targets.iter().map(|t| t.market.clone()));
        row(&mut out, &head, &w);
        let mut a = vec!["a".to_string()];
        a.extend(f.targets.iter().map(|t| est(t.a)));
        row(&mut out, &a, &w);
        let mut b = vec!["b".to_string()];
        b.extend(f.targets.iter().map(|t| est(t.b)));
        row(&mut out, &b, &w);
    }
    out
}

pub fn prediction_table(preds: &[PredictionResult]) -> String {
    let mut out = String::from("Predicted conditional probability of threshold exceedance\n");
    for p in preds {
        writeln!(out, "\nConditioning on: {}", p.conditioning_market).unwrap();
        let w = [9; 8];
        row(&mut out, &p.targets, &w);
        row(&mut out, &p.probabilities.iter().map(|&v| est(v)).collect::<Vec<_>>(), &w);
    }
    out
}

/// One block per pair, families in their fixed order regardless of rank.
pub fn pp_table(pairs: &[PairSelection]) -> String {
    let mut out = String::from("Estimates of the point process dependence modelling\n");
    let w = [20, 17, 17, 10];
    for p in pairs {
        writeln!(out, "\n{} and {}", p.markets.0, p.markets.1).unwrap();
        row(&mut out, &["Parametric model".into(), "alpha".into(), "beta".into(), "AIC".into()], &w);
        for tag in FamilyTag::ALL {
            let cells = match p.ranked.iter().find(|f| f.family.tag == tag) {
                Some(f) => {
                    let beta = if tag.n_params() == 1 { "Nil".to_string() } else { est_se(f.family.params[1], f.se[1]) };
                    vec![family_label(tag).into(), est_se(f.family.params[0], f.se[0]), beta, format!("{:.2}", f.aic)]
                }
                None if p.failures.iter().any(|(t, _)| *t == tag) => {
                    vec![family_label(tag).into(), "failed".into(), "failed".into(), "NA".into()]
                }
                None => continue,
            };
            row(&mut out, &cells, &w);
        }
    }
    out
}

pub fn selection_table(pairs: &[PairSelection], strengths: &[Strength]) -> String {
    let mut out = String::from("Point-process family selection by AIC\n\n");
    let w = [18, 20, 10, 10, 20];
    row(&mut out, &["Pair".into(), "Selected model".into(), "AIC".into(), "Points".into(), "Strength".into()], &w);
    for (p, s) in pairs.iter().zip(strengths) {
        let best: Option<&PpFit> = p.ranked.first();
        let cells = match best {
            Some(f) => vec![p.label(), family_label(f.family.tag).into(), format!("{:.2}", f.aic), f.n_points.to_string(), capitalised(*s)],
            None => vec![p.label(), "none".into(), "NA".into(), "0".into(), "NA".into()],
        };
        row(&mut out, &cells, &w);
    }
    out
}

pub fn comparison_table(c: &Comparison) -> String {
    let mut out = String::from("Extremal dependence structures of the CMEV and point process models\n");
    let w = [18, 16, 30];
    for (panel, name) in [(Panel::A, "Panel A"), (Panel::B, "Panel B"), (Panel::C, "Panel C")] {
        let rows: Vec<_> = c.rows.iter().filter(|r| r.panel == panel).collect();
        if rows.is_empty() {
            continue;
        }
        writeln!(out, "\n{name}").unwrap();
        row(&mut out, &["Paired markets".into(), "CMEV model".into(), "Bivariate point process model".into()], &w);
        for r in rows {
            row(&mut out, &[r.pair.replace('-', " and "), capitalised(r.cmev), capitalised(r.pp)], &w);
        }
    }
    writeln!(out, "\nAgree {} / near {} / disagree {} of {} pairs", c.agree, c.near, c.disagree, c.rows.len()).unwrap();
    out
}

pub fn gpd_table(markets: &[MarketGpd]) -> String {
    let mut out = String::from("Generalized Pareto fits across threshold quantiles\n");
    let w = [10, 10, 17, 17, 8];
    for m in markets {
        writeln!(out, "\n{}", m.market).unwrap();
        row(&mut out, &["Quantile".into(), "Threshold".into(), "sigma".into(), "xi".into(), "Exceed".into()], &w);
        for (level, fit) in &m.fits {
            let cells = match fit {
                Ok(f) => gpd_cells(*level, f),
                Err(e) => vec![format!("{level:.2}"), format!("failed: {e}")],
            };
            row(&mut out, &cells, &w[..cells.len()]);
        }
    }
    out
}

fn gpd_cells(level: f64, f: &GpdFit) -> Vec<String> {
    vec![format!("{level:.2}"), est(f.threshold), est_se(f.sigma, f.se_sigma), est_se(f.xi, f.se_xi), f.n_exceed.to_string()]
}

pub fn threshold_table(markets: &[MarketThreshold]) -> String {
    let mut out = String::from("Mixture-model threshold suggestions\n\n");
    let w = [10, 10, 17, 10, 10, 10];
    row(&mut out, &["Market".into(), "u".into(), "Quantile".into(), "sigma_u".into(), "xi".into(), "Flags".into()], &w);
    for m in markets {
        let cells = match &m.fit {
            Ok(f) => vec![
                m.market.clone(),
                est(f.u),
                est_se(f.quantile_level, f.se_level.unwrap_or(f64::NAN)),
                est(f.sigma_u),
                est(f.xi),
                f.flags.len().to_string(),
            ],
            Err(e) => vec![m.market.clone(), format!("failed: {e}")],
        };
        row(&mut out, &cells, &w[..cells.len()]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use extremal_core::bvpp::compare_models;

    #[test]
    fn estimate_formatting() {
        assert_eq!(est_se(1.34127, 0.03449), "1.3413 (0.0345)");
        assert_eq!(est(-0.04081), "-0.0408");
        assert_eq!(est_se(0.5, f64::NAN), "0.5000 (NA)");
    }

    #[test]
    fn comparison_panels_render_in_order() {
        let pairs = |v: &[(&str, Strength)]| v.iter().map(|(p, s)| (p.to_string(), *s)).collect::<Vec<_>>();
        let c = compare_models(
            &pairs(&[("IBOV-IMOEX", Strength::FairlyStrong), ("IBOV-NIFTY", Strength::Weak), ("IBOV-SHCOMP", Strength::FairlyStrong)]),
            &pairs(&[("IBOV-IMOEX", Strength::FairlyStrong), ("IBOV-NIFTY", Strength::Weak), ("IBOV-SHCOMP", Strength::Weak)]),
        )
        .unwrap();
        let t = comparison_table(&c);
        let a = t.find("Panel A").unwrap();
        let b = t.find("Panel B").unwrap();
        let cc = t.find("Panel C").unwrap();
        assert!(a < b && b < cc);
        assert!(t.contains("IBOV and SHCOMP     Fairly strong     Weak"));
    }
}
