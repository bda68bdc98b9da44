//! Price ingestion, log returns and date alignment.

use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DATE_FMT: &str = "%Y-%m-%d";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    pub market_id: String,
    pub dates: Vec<NaiveDate>,
    pub prices: Vec<f64>,
}

/// Dated values for one market; the output of [`log_returns`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub market_id: String,
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

/// Aligned returns, one column per market, no missing cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnPanel {
    pub market_ids: Vec<String>,
    pub dates: Vec<NaiveDate>,
    /// Column-major: `columns[j][t]` is market `j` on `dates[t]`.
    pub columns: Vec<Vec<f64>>,
}

impl ReturnPanel {
    pub fn new(market_ids: Vec<String>, dates: Vec<NaiveDate>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if market_ids.len() != columns.len() {
            return Err(Error::invalid("column count differs from label count"));
        }
        if columns.iter().any(|c| c.len() != dates.len()) {
            return Err(Error::invalid("column length differs from date count"));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("panel dates not strictly increasing"));
        }
        Ok(Self { market_ids, dates, columns })
    }

    pub fn n_rows(&self) -> usize {
        self.dates.len()
    }

    pub fn n_markets(&self) -> usize {
        self.market_ids.len()
    }

    pub fn column(&self, market: &str) -> Option<&[f64]> {
        self.index_of(market).map(|i| self.columns[i].as_slice())
    }

    pub fn index_of(&self, market: &str) -> Option<usize> {
        self.market_ids.iter().position(|m| m == market)
    }

    pub fn to_series(&self) -> Vec<ReturnSeries> {
        self.market_ids
            .iter()
            .zip(&self.columns)
            .map(|(m, c)| ReturnSeries { market_id: m.clone(), dates: self.dates.clone(), values: c.clone() })
            .collect()
    }

    /// Multiply every cell by `factor` (e.g. 100 for percent returns).
    pub fn scaled(&self, factor: f64) -> Self {
        Self { columns: self.columns.iter().map(|c| c.iter().map(|v| v * factor).collect()).collect(), ..self.clone() }
    }
}

fn parse_date(s: &str, line: usize) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(s.trim(), DATE_FMT).map_err(|e| Error::Parse { line, msg: format!("bad date {s:?}: {e}") })
}

/// Read delimiter-separated prices: a header with a `date` column and one
/// column per market. Empty cells mean the market did not trade that day.
pub fn load_prices<R: Read>(source: R, delimiter: u8) -> Result<Vec<PriceSeries>> {
    let mut rdr = csv::ReaderBuilder::new().delimiter(delimiter).has_headers(true).trim(csv::Trim::All).from_reader(source);
    let header = rdr.headers()?.clone();
    let date_col =
        header.iter().position(|h| h.eq_ignore_ascii_case("date")).ok_or_else(|| Error::MalformedHeader("no date column".into()))?;
    let markets: Vec<(usize, String)> =
        header.iter().enumerate().filter(|(i, _)| *i != date_col).map(|(i, h)| (i, h.to_string())).collect();
    if markets.is_empty() {
        return Err(Error::MalformedHeader("no market columns".into()));
    }
    if markets.iter().any(|(_, h)| h.is_empty()) {
        return Err(Error::MalformedHeader("empty market name".into()));
    }
    let mut out: Vec<PriceSeries> =
        markets.iter().map(|(_, m)| PriceSeries { market_id: m.clone(), dates: vec![], prices: vec![] }).collect();

    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        let date = parse_date(rec.get(date_col).unwrap_or(""), line)?;
        for ((col, market), series) in markets.iter().zip(out.iter_mut()) {
            let cell = rec.get(*col).unwrap_or("");
            if cell.is_empty() {
                continue;
            }
            let price: f64 = cell.parse().map_err(|_| Error::Parse { line, msg: format!("bad price {cell:?} for {market}") })?;
            if !(price > 0.0) || !price.is_finite() {
                return Err(Error::NonPositivePrice { market: market.clone(), row: line, price });
            }
            if series.dates.last().is_some_and(|d| *d >= date) {
                return Err(Error::NonMonotoneDates { row: line });
            }
            series.dates.push(date);
            series.prices.push(price);
        }
    }
    if let Some(empty) = out.iter().find(|s| s.prices.is_empty()) {
        return Err(Error::EmptySeries(empty.market_id.clone()));
    }
    Ok(out)
}

/// `r_t = ln(P_t / P_{t-1})`, dated at `t`.
pub fn log_returns(s: &PriceSeries) -> Result<ReturnSeries> {
    if s.prices.len() < 2 {
        return Err(Error::invalid(format!("{}: need at least 2 prices", s.market_id)));
    }
    Ok(ReturnSeries {
        market_id: s.market_id.clone(),
        dates: s.dates[1..].to_vec(),
        values: s.prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect(),
    })
}

/// Inner join on dates, columns in input order.
pub fn align(series: &[ReturnSeries]) -> Result<ReturnPanel> {
    if series.len() < 2 {
        return Err(Error::invalid("align needs at least two series"));
    }
    let mut common: Vec<NaiveDate> = series[0].dates.clone();
    for s in &series[1..] {
        common.retain(|d| s.dates.binary_search(d).is_ok());
    }
    if common.is_empty() {
        return Err(Error::EmptyIntersection);
    }
    let columns =
        series.iter().map(|s| common.iter().map(|d| s.values[s.dates.binary_search(d).expect("date in intersection")]).collect()).collect();
    ReturnPanel::new(series.iter().map(|s| s.market_id.clone()).collect(), common, columns)
}

/// Write a panel in the ingest format. A non-empty `scale` tag is appended to
/// every market header as `MARKET:scale`.
pub fn write_panel<W: Write>(sink: W, panel: &ReturnPanel, delimiter: u8, scale: Option<&str>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(sink);
    let mut header = vec!["date".to_string()];
    header.extend(panel.market_ids.iter().map(|m| match scale {
        Some(tag) => format!("{m}:{tag}"),
        None => m.clone(),
    }));
    w.write_record(&header)?;
    for (t, d) in panel.dates.iter().enumerate() {
        let mut rec = vec![d.format(DATE_FMT).to_string()];
        rec.extend(panel.columns.iter().map(|c| c[t].to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a panel written by [`write_panel`]; returns the scale tag if present.
pub fn read_panel<R: Read>(source: R, delimiter: u8) -> Result<(ReturnPanel, Option<String>)> {
    let mut rdr = csv::ReaderBuilder::new().delimiter(delimiter).from_reader(source);
    let header = rdr.headers()?.clone();
    if header.get(0).map(|h| h.eq_ignore_ascii_case("date")) != Some(true) {
        return Err(Error::MalformedHeader("first column must be date".into()));
    }
    let mut scale = None;
    let mut ids = Vec::new();
    for h in header.iter().skip(1) {
        match h.split_once(':') {
            Some((m, tag)) => {
                ids.push(m.to_string());
                scale = Some(tag.to_string());
            }
            None => ids.push(h.to_string()),
        }
    }
    let mut dates = Vec::new();
    let mut columns = vec![Vec::new(); ids.len()];
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = row + 2;
        dates.push(parse_date(rec.get(0).unwrap_or(""), line)?);
        for (j, col) in columns.iter_mut().enumerate() {
            let cell = rec.get(j + 1).unwrap_or("");
            let v: f64 = cell.parse().map_err(|_| Error::Parse { line, msg: format!("bad value {cell:?}") })?;
            col.push(v);
        }
    }
    Ok((ReturnPanel::new(ids, dates, columns)?, scale))
}

/// Write price series sharing one date index.
pub fn write_prices<W: Write>(sink: W, series: &[PriceSeries], delimiter: u8) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(sink);
    let mut header = vec!["date".to_string()];
    header.extend(series.iter().map(|s| s.market_id.clone()));
    w.write_record(&header)?;
    let dates = &series[0].dates;
    if series.iter().any(|s| &s.dates != dates) {
        return Err(Error::invalid("price series must share dates"));
    }
    for (t, d) in dates.iter().enumerate() {
        let mut rec = vec![d.format(DATE_FMT).to_string()];
        rec.extend(series.iter().map(|s| format!("{:.4}", s.prices[t])));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
