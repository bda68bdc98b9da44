//! Pipeline stages. Each stage reads its inputs from the output directory and
//! persists its results there, so stages can be rerun on their own.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use extremal_core::bvpp::{
    classify_pp_strength, compare_models, fit_pp_with, rank_fits, Comparison, FamilyTag, PpFit, PpOptions, Strength,
};
use extremal_core::cmev::{fit_ht_with, ht_diagnostics, predict_exceedance_prob, HtFit, HtOptions, PredictOptions, PredictionResult};
use extremal_core::gpd::{fit_gpd_with, gpd_diagnostics, GpdFit, GpdOptions};
use extremal_core::margins::{transform_panel, MarginTransform, Scale};
use extremal_core::market_data::{align, load_prices, log_returns, read_panel, write_panel, write_prices, ReturnPanel};
use extremal_core::plot::PlotData;
use extremal_core::simulate::copula_prices;
use extremal_core::threshold_mix::{fit_mixture_with, MixtureOptions, TailMode};
use extremal_core::FitFlag;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::error::{CliError, Result};
use crate::tables;

pub const DEMO_PRICES: &str = include_str!("../data/demo_prices.csv");

pub const PRICES: &str = "prices.csv";
pub const RETURNS: &str = "returns.csv";
pub const LAPLACE: &str = "laplace.csv";
pub const FRECHET: &str = "frechet.csv";
pub const MARGINS: &str = "margins.json";
pub const GPD_FITS: &str = "gpd_fits.json";
pub const THRESHOLDS: &str = "thresholds.json";
pub const CMEV_FITS: &str = "cmev_fits.json";
pub const PREDICTIONS: &str = "predictions.json";
pub const PP_FITS: &str = "pp_fits.json";
pub const COMPARISON: &str = "comparison.json";
pub const REPORT: &str = "report.md";
pub const MANIFEST: &str = "manifest.json";
pub const PLOT_SCRIPT: &str = "plot.py";
pub const CONFIG_COPY: &str = "config.toml";

pub const TABLE_GPD: &str = "tables/gpd.txt";
pub const TABLE_THRESHOLDS: &str = "tables/thresholds.txt";
pub const TABLE_CMEV: &str = "tables/cmev.txt";
pub const TABLE_PREDICTION: &str = "tables/prediction.txt";
pub const TABLE_PP: &str = "tables/pp.txt";
pub const TABLE_SELECTION: &str = "tables/selection.txt";
pub const TABLE_COMPARISON: &str = "tables/comparison.txt";

/// Worker count from `EXTREMAL_WORKERS`, else the available parallelism.
pub fn workers() -> usize {
    std::env::var("EXTREMAL_WORKERS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Order-preserving parallel map on a bounded pool.
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers()).build().expect("thread pool");
    pool.install(|| items.par_iter().map(f).collect())
}

/// The output directory.
pub struct Outputs {
    root: PathBuf,
}

impl Outputs {
    pub fn new(root: &Path) -> Self {
        Self { root: root.to_path_buf() }
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    pub fn exists(&self, rel: &str) -> bool {
        self.path(rel).exists()
    }

    pub fn write(&self, rel: &str, bytes: &[u8]) -> Result<()> {
        let p = self.path(rel);
        if let Some(dir) = p.parent() {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        fs::write(&p, bytes).map_err(|e| CliError::io(&p, e))
    }

    pub fn read_string(&self, rel: &str, missing: &str) -> Result<String> {
        let p = self.path(rel);
        if !p.exists() {
            return Err(CliError::MissingInput(missing.to_string()));
        }
        fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))
    }

    pub fn write_json<T: Serialize>(&self, rel: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Json { path: self.path(rel), source: e })?;
        self.write(rel, text.as_bytes())
    }

    pub fn read_json<T: DeserializeOwned>(&self, rel: &str, missing: &str) -> Result<T> {
        let text = self.read_string(rel, missing)?;
        serde_json::from_str(&text).map_err(|e| CliError::Json { path: self.path(rel), source: e })
    }

    fn write_panel(&self, rel: &str, panel: &ReturnPanel, scale: Option<&str>, stage: &'static str) -> Result<()> {
        let mut buf = Vec::new();
        write_panel(&mut buf, panel, b',', scale).map_err(CliError::stage(stage))?;
        self.write(rel, &buf)
    }

    fn read_panel(&self, rel: &str, missing: &str, stage: &'static str) -> Result<ReturnPanel> {
        let text = self.read_string(rel, missing)?;
        Ok(read_panel(text.as_bytes(), b',').map_err(CliError::stage(stage))?.0)
    }

    fn write_plot(&self, rel: &str, data: &PlotData, stage: &'static str) -> Result<()> {
        let mut buf = Vec::new();
        data.write_csv(&mut buf).map_err(CliError::stage(stage))?;
        self.write(rel, &buf)
    }
}

const MISSING_RETURNS: &str = "missing return panel (run `ingest` first)";
const MISSING_LAPLACE: &str = "missing Laplace panel (run `ingest` first)";
const MISSING_FRECHET: &str = "missing Fréchet panel (run `ingest` first)";
const MISSING_MARGINS: &str = "missing marginal transforms (run `ingest` first)";
const MISSING_CMEV: &str = "missing CMEV fits (run `fit-cmev` first)";
const MISSING_PP: &str = "missing point-process fits (run `fit-pp` first)";

fn outputs(cfg: &PipelineConfig) -> Outputs {
    Outputs::new(&cfg.out_dir)
}

/// Writes simulated closing prices to `prices.csv`.
pub fn simulate(cfg: &PipelineConfig) -> Result<()> {
    const STAGE: &str = "simulate";
    let s = &cfg.simulate;
    let series = copula_prices(&s.markets, &s.correlation, s.n_returns, cfg.seed, &s.start_prices).map_err(CliError::stage(STAGE))?;
    let mut buf = Vec::new();
    write_prices(&mut buf, &series, b',').map_err(CliError::stage(STAGE))?;
    outputs(cfg).write(PRICES, &buf)
}

/// Loads prices, forms aligned log returns, fits the marginal transforms and
/// writes the return, Laplace and Fréchet panels with pairwise scatter data.
pub fn ingest(cfg: &PipelineConfig) -> Result<()> {
    const STAGE: &str = "ingest";
    let out = outputs(cfg);
    let delimiter = u8::try_from(cfg.input.delimiter).map_err(|_| CliError::Config("delimiter must be ASCII".into()))?;
    let series = match &cfg.input.prices {
        Some(path) => {
            let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
            load_prices(file, delimiter)
        }
        None => load_prices(DEMO_PRICES.as_bytes(), b','),
    }
    .map_err(CliError::stage(STAGE))?;
    let returns: Vec<_> = series.iter().map(log_returns).collect::<std::result::Result<_, _>>().map_err(CliError::stage(STAGE))?;
    let panel = align(&returns).map_err(CliError::stage(STAGE))?;
    out.write_panel(RETURNS, &panel, None, STAGE)?;

    let opts = GpdOptions { seed: cfg.seed, ..Default::default() };
    let margins: Vec<MarginTransform> = par_map(&panel.market_ids, |m| {
        let col = panel.column(m).expect("market in panel");
        MarginTransform::fit(col, cfg.margin_level(m), Scale::Laplace, &opts)
    })
    .into_iter()
    .collect::<std::result::Result<_, _>>()
    .map_err(CliError::stage(STAGE))?;
    out.write_json(MARGINS, &margins)?;
    let laplace = transform_panel(&panel, &margins, Scale::Laplace).map_err(CliError::stage(STAGE))?;
    out.write_panel(LAPLACE, &laplace, Some(Scale::Laplace.tag()), STAGE)?;
    let frechet = transform_panel(&panel, &margins, Scale::Frechet).map_err(CliError::stage(STAGE))?;
    out.write_panel(FRECHET, &frechet, Some(Scale::Frechet.tag()), STAGE)?;

    for (i, j) in pairs(panel.n_markets()) {
        let (a, b) = (&panel.market_ids[i], &panel.market_ids[j]);
        let mut data = PlotData::new(&[a, b]);
        for (x, y) in panel.columns[i].iter().zip(&panel.columns[j]) {
            data.push(vec![*x, *y]);
        }
        out.write_plot(&format!("plots/scatter/{a}_{b}.csv"), &data, STAGE)?;
    }
    Ok(())
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarketGpd {
    pub market: String,
    pub fits: Vec<(f64, std::result::Result<GpdFit, String>)>,
}

/// GPD fits on the configured quantile grid, with diagnostic plot data.
pub fn fit_gpd(cfg: &PipelineConfig) -> Result<()> {
    const STAGE: &str = "fit-gpd";
    let out = outputs(cfg);
    let panel = out.read_panel(RETURNS, MISSING_RETURNS, STAGE)?;
    let opts = GpdOptions { seed: cfg.seed, ..Default::default() };
    let results: Vec<(MarketGpd, Vec<(String, PlotData)>)> = par_map(&panel.market_ids, |m| {
        let col = panel.column(m).expect("market in panel");
        let mut plots = Vec::new();
        let mut fits = Vec::new();
        for &level in &cfg.margins.grid {
            let fit = fit_gpd_with(col, level, &opts);
            if let Ok(Ok(d)) = fit.as_ref().map(|f| gpd_diagnostics(f, col, cfg.margins.histogram_bins)) {
                for (kind, data) in
                    [("probability", d.probability), ("quantile", d.quantile), ("return_level", d.return_level), ("density", d.density)]
                {
                    plots.push((format!("plots/gpd/{m}_{level:.2}_{kind}.csv"), data));
                }
            }
            fits.push((level, fit.map_err(|e| e.to_string())));
        }
        (MarketGpd { market: m.clone(), fits }, plots)
    });
    let mut summary = Vec::new();
    for (m, plots) in results {
        for (rel, data) in plots {
            out.write_plot(&rel, &data, STAGE)?;
        }
        summary.push(m);
    }
    out.write_json(GPD_FITS, &summary)?;
    out.write(TABLE_GPD, tables::gpd_table(&summary).as_bytes())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdSummary {
    pub u: f64,
    pub quantile_level: f64,
    pub se_level: Option<f64>,
    pub sigma_u: f64,
    pub xi: f64,
    pub bandwidth: f64,
    pub loglik: f64,
    pub flags: Vec<FitFlag>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarketThreshold {
    pub market: String,
    pub fit: std::result::Result<ThresholdSummary, String>,
}

/// Advisory thresholds from the kernel-bulk / GPD-tail mixture.
pub fn thresholds(cfg: &PipelineConfig) -> Result<()> {
    const STAGE: &str = "thresholds";
    let out = outputs(cfg);
    let panel = out.read_panel(RETURNS, MISSING_RETURNS, STAGE)?;
    let opts = MixtureOptions { seed: cfg.seed, ..Default::default() };
    let results = par_map(&panel.market_ids, |m| {
        let col = panel.column(m).expect("market in panel");
        match fit_mixture_with(col, TailMode::BulkBased, &opts) {
            Ok(f) => {
                let s = ThresholdSummary {
                    u: f.u,
                    quantile_level: f.quantile_level,
                    se_level: f.se_level.is_finite().then_some(f.se_level),
                    sigma_u: f.sigma_u,
                    xi: f.xi,
                    bandwidth: f.bandwidth,
                    loglik: f.loglik,
                    flags: f.flags,
                };
                (MarketThreshold { market: m.clone(), fit: Ok(s) }, Some(f.profile))
            }
            Err(e) => (MarketThreshold { market: m.clone(), fit: Err(e.to_string()) }, None),
        }
    });
    let mut summary = Vec::new();
    for (t, profile) in results {
        if let Some(p) = profile {
            out.write_plot(&format!("plots/mixture/{}_profile.csv", t.market), &p, STAGE)?;
        }
        summary.push(t);
    }
    out.write_json(THRESHOLDS, &summary)?;
    out.write(TABLE_THRESHOLDS, tables::threshold_table(&summary).as_bytes())
}

/// Conditional extremes fits, one per conditioning market.
pub fn fit_cmev(cfg: &PipelineConfig) -> Result<()> {
    const STAGE: &str = "fit-cmev";
    let out = outputs(cfg);
    let panel = out.read_panel(LAPLACE, MISSING_LAPLACE, STAGE)?;
    let opts = HtOptions { seed: cfg.seed, ..Default::default() };
    let fits: Vec<HtFit> = par_map(&panel.market_ids, |m| fit_ht_with(&panel, m, cfg.cmev.dep_quantile, &opts))
        .into_iter()
        .collect::<std::result::Result<_, _>>()
        .map_err(CliError::stage(STAGE))?;
    for f in &fits {
        for d in ht_diagnostics(f) {
            let base = format!("plots/cmev/{}_{}", f.conditioning_market, d.market);
            out.write_plot(&format!("{base}_residuals.csv"), &d.residuals, STAGE)?;
            out.write_plot(&format!("{base}_spread.csv"), &d.spread, STAGE)?;
            out.write_plot(&format!("{base}_scatter.csv"), &d.scatter, STAGE)?;
            out.write_plot(&format!("{base}_curves.csv"), &d.curves, STAGE)?;
        }
    }
    out.write_json(CMEV_FITS, &fits)?;
    out.write(TABLE_CMEV, tables::cmev_table(&fits).as_bytes())
}

/// Conditional exceedance probabilities for every conditioning market.
pub fn predict(cfg: &PipelineConfig) -> Result<()> {
    const STAGE: &str = "predict";
    let out = outputs(cfg);
    let fits: Vec<HtFit> = out.read_json(CMEV_FITS, MISSING_CMEV)?;
    let margins: Option<Vec<MarginTransform>> = match cfg.cmev.target {
        extremal_core::cmev::TargetThreshold::Returns(_) => Some(out.read_json(MARGINS, MISSING_MARGINS)?),
        _ => None,
    };
    let markets: Vec<String> = read_market_order(&out)?;
    let indexed: Vec<(usize, &HtFit)> = fits.iter().enumerate().collect();
    let preds: Vec<PredictionResult> = par_map(&indexed, |&(k, f)| {
        let target_margins: Option<Vec<MarginTransform>> = margins
            .as_ref()
            .map(|all| f.targets.iter().filter_map(|t| markets.iter().position(|m| *m == t.market).map(|i| all[i].clone())).collect());
        let opts = PredictOptions {
            pred_quantile: cfg.cmev.pred_quantile,
            n_importance: cfg.cmev.n_importance,
            seed: cfg.seed.wrapping_add(k as u64),
            target: cfg.cmev.target.clone(),
        };
        predict_exceedance_prob(f, target_margins.as_deref(), &opts)
    })
    .into_iter()
    .collect::<std::result::Result<_, _>>()
    .map_err(CliError::stage(STAGE))?;
    out.write_json(PREDICTIONS, &preds)?;
    out.write(TABLE_PREDICTION, tables::prediction_table(&preds).as_bytes())
}

fn read_market_order(out: &Outputs) -> Result<Vec<String>> {
    let text = out.read_string(LAPLACE, MISSING_LAPLACE)?;
    let header = text.lines().next().unwrap_or_default();
    Ok(header.split(',').skip(1).map(|h| h.split(':').next().unwrap_or(h).to_string()).collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairSelection {
    pub markets: (String, String),
    /// Successful fits, best AIC first.
    pub ranked: Vec<PpFit>,
    pub failures: Vec<(FamilyTag, String)>,
}

impl PairSelection {
    pub fn label(&self) -> String {
        format!("{}-{}", self.markets.0, self.markets.1)
    }
}

/// Point-process fits of every configured family for every market pair.
pub fn fit_pp(cfg: &PipelineConfig) -> Result<()> {
    const STAGE: &str = "fit-pp";
    let out = outputs(cfg);
    let panel = out.read_panel(FRECHET, MISSING_FRECHET, STAGE)?;
    let opts = PpOptions { seed: cfg.seed, ..Default::default() };
    let jobs: Vec<((usize, usize), FamilyTag)> =
        pairs(panel.n_markets()).into_iter().flat_map(|p| cfg.pp.families.iter().map(move |&t| (p, t))).collect();
    let fitted = par_map(&jobs, |&((i, j), tag)| (tag, fit_pp_with(&panel.columns[i], &panel.columns[j], tag, cfg.pp.quantile, &opts)));
    let mut fitted = fitted.into_iter();
    let mut selections = Vec::new();
    for (i, j) in pairs(panel.n_markets()) {
        let sel = rank_fits(fitted.by_ref().take(cfg.pp.families.len()).collect()).map_err(CliError::stage(STAGE))?;
        selections.push(PairSelection {
            markets: (panel.market_ids[i].clone(), panel.market_ids[j].clone()),
            ranked: sel.ranked,
            failures: sel.failures,
        });
    }
    let strengths: Vec<Strength> = selections.iter().map(|s| classify_pp_strength(&s.ranked[0])).collect();
    out.write_json(PP_FITS, &selections)?;
    out.write(TABLE_PP, tables::pp_table(&selections).as_bytes())?;
    out.write(TABLE_SELECTION, tables::selection_table(&selections, &strengths).as_bytes())
}

/// Pair labels from both models and their agreement panels.
pub fn compare(cfg: &PipelineConfig) -> Result<()> {
    const STAGE: &str = "compare";
    let out = outputs(cfg);
    let fits: Vec<HtFit> = out.read_json(CMEV_FITS, MISSING_CMEV)?;
    let pp: Vec<PairSelection> = out.read_json(PP_FITS, MISSING_PP)?;
    let slope = |cond: &str, target: &str| -> Result<f64> {
        fits.iter()
            .find(|f| f.conditioning_market == cond)
            .and_then(|f| f.target(target))
            .map(|t| t.a)
            .ok_or_else(|| CliError::MissingInput(format!("no CMEV fit for {cond} -> {target}")))
    };
    let mut cmev_labels = Vec::new();
    let mut pp_labels = Vec::new();
    for p in &pp {
        let (a, b) = (&p.markets.0, &p.markets.1);
        cmev_labels.push((p.label(), Strength::from_cmev(slope(a, b)?, slope(b, a)?)));
        let best = p.ranked.first().ok_or_else(|| CliError::MissingInput(format!("no point-process fit for {}", p.label())))?;
        pp_labels.push((p.label(), classify_pp_strength(best)));
    }
    let c: Comparison = compare_models(&cmev_labels, &pp_labels).map_err(CliError::stage(STAGE))?;
    out.write_json(COMPARISON, &c)?;
    out.write(TABLE_COMPARISON, tables::comparison_table(&c).as_bytes())
}

/// Collects the rendered tables into one markdown document.
pub fn report(cfg: &PipelineConfig) -> Result<()> {
    let out = outputs(cfg);
    let sections = [
        ("Marginal GPD fits", TABLE_GPD, "fit-gpd"),
        ("Mixture-model thresholds", TABLE_THRESHOLDS, "thresholds"),
        ("CMEV dependence parameters", TABLE_CMEV, "fit-cmev"),
        ("CMEV predictions", TABLE_PREDICTION, "predict"),
        ("Point-process fits", TABLE_PP, "fit-pp"),
        ("Family selection", TABLE_SELECTION, "fit-pp"),
        ("Model comparison", TABLE_COMPARISON, "compare"),
    ];
    let mut doc = format!("# Extremal dependence report\n\nSeed: {}\nConfig sha256: {}\n", cfg.seed, config_hash(cfg));
    for (title, rel, stage) in sections {
        let body = out.read_string(rel, &format!("missing {rel} (run `{stage}` first)"))?;
        doc.push_str(&format!("\n## {title}\n\n```\n{}```\n", body));
    }
    out.write(REPORT, doc.as_bytes())
}

pub fn config_hash(cfg: &PipelineConfig) -> String {
    hex(&Sha256::digest(cfg.to_toml().as_bytes()))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub config_sha256: String,
    /// Relative path to sha256 of every output file.
    pub files: BTreeMap<String, String>,
}

const PLOT_STUB: &str = r#"#!/usr/bin/env python3
"""Renders the plot-data files under plots/ with matplotlib."""
import csv
import pathlib
import sys

import matplotlib.pyplot as plt


def load(path):
    with open(path) as f:
        rows = list(csv.reader(f))
    header, body = rows[0], rows[1:]
    cols = list(zip(*[[float(v) for v in r] for r in body])) if body else [[] for _ in header]
    return header, cols


def main(root):
    root = pathlib.Path(root)
    for path in sorted((root / "plots").rglob("*.csv")):
        header, cols = load(path)
        fig, ax = plt.subplots()
        for name, ys in zip(header[1:], cols[1:]):
            ax.plot(cols[0], ys, ".", label=name, markersize=2)
        ax.set_xlabel(header[0])
        ax.legend()
        fig.savefig(path.with_suffix(".png"), dpi=120)
        plt.close(fig)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else ".")
"#;

fn list_files(dir: &Path, base: &Path, acc: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let entry = entry.map_err(|e| CliError::io(dir, e))?;
        let p = entry.path();
        if p.is_dir() {
            list_files(&p, base, acc)?;
        } else {
            acc.push(p.strip_prefix(base).expect("under base").to_path_buf());
        }
    }
    Ok(())
}

pub fn write_manifest(cfg: &PipelineConfig) -> Result<Manifest> {
    let out = outputs(cfg);
    let mut paths = Vec::new();
    list_files(&cfg.out_dir, &cfg.out_dir, &mut paths)?;
    let mut files = BTreeMap::new();
    for rel in paths {
        let key = rel.to_string_lossy().replace('\\', "/");
        if key == MANIFEST {
            continue;
        }
        let p = cfg.out_dir.join(&rel);
        let bytes = fs::read(&p).map_err(|e| CliError::io(&p, e))?;
        files.insert(key, hex(&Sha256::digest(&bytes)));
    }
    let m = Manifest { seed: cfg.seed, config_sha256: config_hash(cfg), files };
    out.write_json(MANIFEST, &m)?;
    Ok(m)
}

/// Every stage in order, then the plotting stub and the manifest.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<Manifest> {
    cfg.validate()?;
    let out = outputs(cfg);
    out.write(CONFIG_COPY, cfg.to_toml().as_bytes())?;
    ingest(cfg)?;
    fit_gpd(cfg)?;
    thresholds(cfg)?;
    fit_cmev(cfg)?;
    predict(cfg)?;
    fit_pp(cfg)?;
    compare(cfg)?;
    report(cfg)?;
    out.write(PLOT_SCRIPT, PLOT_STUB.as_bytes())?;
    write_manifest(cfg)
}
