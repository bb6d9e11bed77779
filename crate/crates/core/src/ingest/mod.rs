//! Market data acquisition and alignment.
//!
//! Candles arrive either from an exchange REST endpoint (see [`fetch`])
//! or from a local CSV, and are aligned into a rectangular price matrix
//! by intersecting timestamps across assets. Forward-filling is
//! deliberately avoided: fabricated flat prices turn into zero returns
//! and bias the correlation matrix.

pub mod fetch;

use std::collections::BTreeSet;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// One OHLCV candle. Prices are in the quote currency, volume in base
/// units, timestamp in UTC epoch seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candle {
    pub timestamp: i64,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
}

impl Candle {
    /// Validate the OHLC ordering invariants.
    pub fn validate(&self) -> Result<()> {
        if self.close <= 0.0 {
            return Err(Error::Domain(format!(
                "close {} must be positive at ts {}",
                self.close, self.timestamp
            )));
        }
        if self.low > self.open.min(self.close) || self.high < self.open.max(self.close) {
            return Err(Error::Domain(format!(
                "inconsistent OHLC at ts {}: low {} high {} open {} close {}",
                self.timestamp, self.low, self.high, self.open, self.close
            )));
        }
        if self.volume < 0.0 {
            return Err(Error::Domain(format!(
                "negative volume at ts {}",
                self.timestamp
            )));
        }
        Ok(())
    }
}

/// Aligned closing prices: M assets by N+1 strictly increasing
/// timestamps, every cell present and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceMatrix {
    symbols: Vec<String>,
    timestamps: Vec<i64>,
    prices: DMatrix<f64>,
}

impl PriceMatrix {
    pub fn new(symbols: Vec<String>, timestamps: Vec<i64>, prices: DMatrix<f64>) -> Result<Self> {
        if prices.nrows() != symbols.len() {
            return Err(Error::DimensionMismatch {
                expected: prices.nrows(),
                actual: symbols.len(),
            });
        }
        if prices.ncols() != timestamps.len() {
            return Err(Error::DimensionMismatch {
                expected: prices.ncols(),
                actual: timestamps.len(),
            });
        }
        for w in timestamps.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::NonMonotoneTimestamps { row: 0 });
            }
        }
        for i in 0..prices.nrows() {
            for j in 0..prices.ncols() {
                if !(prices[(i, j)] > 0.0) {
                    return Err(Error::NonPositivePrice {
                        row: j,
                        column: symbols[i].clone(),
                    });
                }
            }
        }
        Ok(Self {
            symbols,
            timestamps,
            prices,
        })
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn timestamps(&self) -> &[i64] {
        &self.timestamps
    }

    pub fn prices(&self) -> &DMatrix<f64> {
        &self.prices
    }

    pub fn assets(&self) -> usize {
        self.symbols.len()
    }
}

/// Outcome of aligning several candle series: the matrix plus the names
/// of assets dropped for insufficient coverage.
#[derive(Debug, Clone)]
pub struct AlignReport {
    pub matrix: PriceMatrix,
    pub dropped: Vec<String>,
}

/// Intersect candle series into a rectangular price matrix.
///
/// Series with fewer than `min_length` candles are dropped (and
/// reported); the retained series contribute the intersection of their
/// timestamps. An empty intersection, or one shorter than `min_length`,
/// is a no-common-range error.
pub fn align_series(
    series: &[(String, Vec<Candle>)],
    min_length: usize,
) -> Result<AlignReport> {
    let mut retained: Vec<(&String, &Vec<Candle>)> = Vec::new();
    let mut dropped = Vec::new();
    for (symbol, candles) in series {
        if candles.len() >= min_length {
            retained.push((symbol, candles));
        } else {
            dropped.push(symbol.clone());
        }
    }
    if retained.is_empty() {
        return Err(Error::NoCommonRange);
    }
    let mut common: BTreeSet<i64> = retained[0].1.iter().map(|c| c.timestamp).collect();
    for (_, candles) in retained.iter().skip(1) {
        let ts: BTreeSet<i64> = candles.iter().map(|c| c.timestamp).collect();
        common = common.intersection(&ts).copied().collect();
        if common.is_empty() {
            return Err(Error::NoCommonRange);
        }
    }
    if common.len() < min_length {
        return Err(Error::NoCommonRange);
    }
    let timestamps: Vec<i64> = common.into_iter().collect();
    let mut prices = DMatrix::zeros(retained.len(), timestamps.len());
    for (i, (_, candles)) in retained.iter().enumerate() {
        let by_ts: std::collections::HashMap<i64, f64> =
            candles.iter().map(|c| (c.timestamp, c.close)).collect();
        for (j, ts) in timestamps.iter().enumerate() {
            prices[(i, j)] = by_ts[ts];
        }
    }
    let symbols = retained.iter().map(|(s, _)| (*s).clone()).collect();
    Ok(AlignReport {
        matrix: PriceMatrix::new(symbols, timestamps, prices)?,
        dropped,
    })
}

/// Load a price matrix from CSV: header `timestamp,SYM1,SYM2,...`,
/// integer epoch seconds, positive numeric prices, strictly increasing
/// rows.
pub fn load_csv(path: impl AsRef<Path>) -> Result<PriceMatrix> {
    let (symbols, timestamps, values) = read_timeseries_csv(path)?;
    PriceMatrix::new(symbols, timestamps, values)
}

/// Write a price matrix back to CSV. Prices are rendered with the
/// shortest representation that parses back to the identical float, so
/// a write/load round trip is bit-exact.
pub fn write_csv(matrix: &PriceMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_timeseries_csv(
        path,
        matrix.symbols(),
        matrix.timestamps(),
        matrix.prices(),
    )
}

/// Shared reader for `timestamp,SYM...` tables (prices, returns).
pub fn read_timeseries_csv(
    path: impl AsRef<Path>,
) -> Result<(Vec<String>, Vec<i64>, DMatrix<f64>)> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.is_empty() || headers.get(0) != Some("timestamp") {
        return Err(Error::CsvRow {
            row: 0,
            message: "header must start with `timestamp`".into(),
        });
    }
    let symbols: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    if symbols.is_empty() {
        return Err(Error::CsvRow {
            row: 0,
            message: "no asset columns".into(),
        });
    }
    let mut timestamps: Vec<i64> = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record?;
        if record.len() != symbols.len() + 1 {
            return Err(Error::CsvRow {
                row,
                message: format!(
                    "expected {} fields, got {}",
                    symbols.len() + 1,
                    record.len()
                ),
            });
        }
        let ts: i64 = record[0].parse().map_err(|_| Error::CsvRow {
            row,
            message: format!("bad timestamp `{}`", &record[0]),
        })?;
        if let Some(&last) = timestamps.last() {
            if ts <= last {
                return Err(Error::NonMonotoneTimestamps { row });
            }
        }
        let mut vals = Vec::with_capacity(symbols.len());
        for (k, field) in record.iter().skip(1).enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::CsvRow {
                row,
                message: format!("bad number `{field}` for {}", symbols[k]),
            })?;
            vals.push(v);
        }
        timestamps.push(ts);
        rows.push(vals);
    }
    if rows.is_empty() {
        return Err(Error::CsvRow {
            row: 1,
            message: "empty body".into(),
        });
    }
    let m = symbols.len();
    let values = DMatrix::from_fn(m, rows.len(), |i, j| rows[j][i]);
    Ok((symbols, timestamps, values))
}

/// Shared writer for `timestamp,SYM...` tables.
pub fn write_timeseries_csv(
    path: impl AsRef<Path>,
    symbols: &[String],
    timestamps: &[i64],
    values: &DMatrix<f64>,
) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let mut header = vec!["timestamp".to_string()];
        header.extend(symbols.iter().cloned());
        w.write_record(&header)?;
        for (j, ts) in timestamps.iter().enumerate() {
            let mut rec = vec![ts.to_string()];
            for i in 0..symbols.len() {
                rec.push(format!("{}", values[(i, j)]));
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    crate::io::write_atomic(path, &buf)
}
