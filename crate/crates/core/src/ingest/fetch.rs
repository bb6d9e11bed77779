//! Exchange candle client.
//!
//! The client assembles paginated JSON candle arrays into one ascending,
//! gapless series. Transport is a trait so tests replay recorded
//! responses; the live implementation (feature `http`) is a thin
//! blocking GET. Exchange schemas drift, so the JSON field names are a
//! configurable mapping rather than hardcoded.

use std::collections::HashMap;
use std::time::Duration;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::ingest::Candle;

/// JSON field names for one candle object.
#[derive(Debug, Clone)]
pub struct CandleFieldMap {
    pub timestamp: String,
    pub open: String,
    pub close: String,
    pub low: String,
    pub high: String,
    pub volume: String,
}

impl Default for CandleFieldMap {
    // HitBTC-style names: "min"/"max" for the extremes.
    fn default() -> Self {
        Self {
            timestamp: "timestamp".into(),
            open: "open".into(),
            close: "close".into(),
            low: "min".into(),
            high: "max".into(),
            volume: "volume".into(),
        }
    }
}

/// Client configuration: base URL, page size, inter-request delay.
#[derive(Debug, Clone)]
pub struct FetchConfig {
    pub base_url: String,
    /// Candles requested per page.
    pub page_limit: usize,
    /// Fixed delay between consecutive requests (exchanges throttle).
    pub delay: Duration,
    pub fields: CandleFieldMap,
}

impl Default for FetchConfig {
    fn default() -> Self {
        Self {
            base_url: "https://api.hitbtc.com/api/2/public".into(),
            page_limit: 1000,
            delay: Duration::from_millis(100),
            fields: CandleFieldMap::default(),
        }
    }
}

/// Blocking GET returning the response body, or a typed failure.
pub trait CandleTransport {
    fn get(&self, url: &str) -> Result<String>;
}

/// Replay transport: answers from a recorded URL -> body map. Unknown
/// URLs are non-retriable transport errors, which keeps fixtures honest.
#[derive(Debug, Default, Clone)]
pub struct FixtureTransport {
    responses: HashMap<String, String>,
}

impl FixtureTransport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, url: impl Into<String>, body: impl Into<String>) {
        self.responses.insert(url.into(), body.into());
    }
}

impl CandleTransport for FixtureTransport {
    fn get(&self, url: &str) -> Result<String> {
        self.responses.get(url).cloned().ok_or_else(|| Error::Transport {
            message: format!("no fixture recorded for {url}"),
            retriable: false,
        })
    }
}

/// Live transport over a blocking HTTP client.
#[cfg(feature = "http")]
pub struct HttpTransport {
    client: reqwest::blocking::Client,
}

#[cfg(feature = "http")]
impl HttpTransport {
    pub fn new() -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| Error::Transport {
                message: e.to_string(),
                retriable: false,
            })?;
        Ok(Self { client })
    }
}

#[cfg(feature = "http")]
impl CandleTransport for HttpTransport {
    fn get(&self, url: &str) -> Result<String> {
        let resp = self.client.get(url).send().map_err(|e| Error::Transport {
            message: e.to_string(),
            retriable: true,
        })?;
        let status = resp.status();
        let body = resp.text().map_err(|e| Error::Transport {
            message: e.to_string(),
            retriable: true,
        })?;
        if status.is_client_error() {
            // Exchanges answer unknown symbols with 400/404 error bodies.
            return Err(Error::SymbolNotFound {
                symbol: format!("{url} ({status}): {body}"),
            });
        }
        if !status.is_success() {
            return Err(Error::Transport {
                message: format!("{status}: {body}"),
                retriable: status.is_server_error(),
            });
        }
        Ok(body)
    }
}

fn candle_url(cfg: &FetchConfig, symbol: &str, period: &str, limit: usize, offset: usize) -> String {
    format!(
        "{}/candles/{}?period={}&limit={}&offset={}",
        cfg.base_url.trim_end_matches('/'),
        symbol,
        period,
        limit,
        offset
    )
}

fn field<'a>(obj: &'a serde_json::Map<String, Value>, name: &str) -> Result<&'a Value> {
    obj.get(name).ok_or_else(|| Error::MalformedPayload {
        field: name.to_string(),
        detail: "missing".into(),
    })
}

fn parse_price(v: &Value, name: &str) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| Error::MalformedPayload {
            field: name.to_string(),
            detail: format!("not representable as f64: {n}"),
        }),
        Value::String(s) => s.parse().map_err(|_| Error::MalformedPayload {
            field: name.to_string(),
            detail: format!("not numeric: `{s}`"),
        }),
        other => Err(Error::MalformedPayload {
            field: name.to_string(),
            detail: format!("unexpected type: {other}"),
        }),
    }
}

fn parse_timestamp(v: &Value, name: &str) -> Result<i64> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(i)
            } else if let Some(f) = n.as_f64() {
                Ok(f as i64)
            } else {
                Err(Error::MalformedPayload {
                    field: name.to_string(),
                    detail: format!("bad epoch: {n}"),
                })
            }
        }
        Value::String(s) => {
            if let Ok(i) = s.parse::<i64>() {
                return Ok(i);
            }
            chrono::DateTime::parse_from_rfc3339(s)
                .map(|dt| dt.timestamp())
                .map_err(|e| Error::MalformedPayload {
                    field: name.to_string(),
                    detail: format!("bad timestamp `{s}`: {e}"),
                })
        }
        other => Err(Error::MalformedPayload {
            field: name.to_string(),
            detail: format!("unexpected type: {other}"),
        }),
    }
}

fn parse_candles(body: &str, fields: &CandleFieldMap) -> Result<Vec<Candle>> {
    let parsed: Value = serde_json::from_str(body).map_err(|e| Error::MalformedPayload {
        field: "<root>".into(),
        detail: e.to_string(),
    })?;
    if let Some(obj) = parsed.as_object() {
        // Error envelope, e.g. {"error": {"code": 2001, "message": "Symbol not found"}}.
        if let Some(err) = obj.get("error") {
            let msg = err
                .get("message")
                .and_then(Value::as_str)
                .unwrap_or("unknown error");
            if msg.to_ascii_lowercase().contains("symbol") {
                return Err(Error::SymbolNotFound {
                    symbol: msg.to_string(),
                });
            }
            return Err(Error::Transport {
                message: msg.to_string(),
                retriable: false,
            });
        }
    }
    let arr = parsed.as_array().ok_or_else(|| Error::MalformedPayload {
        field: "<root>".into(),
        detail: "expected a JSON array of candles".into(),
    })?;
    let mut out = Vec::with_capacity(arr.len());
    for item in arr {
        let obj = item.as_object().ok_or_else(|| Error::MalformedPayload {
            field: "<candle>".into(),
            detail: "expected an object".into(),
        })?;
        let candle = Candle {
            timestamp: parse_timestamp(field(obj, &fields.timestamp)?, &fields.timestamp)?,
            open: parse_price(field(obj, &fields.open)?, &fields.open)?,
            close: parse_price(field(obj, &fields.close)?, &fields.close)?,
            low: parse_price(field(obj, &fields.low)?, &fields.low)?,
            high: parse_price(field(obj, &fields.high)?, &fields.high)?,
            volume: parse_price(field(obj, &fields.volume)?, &fields.volume)?,
        };
        candle.validate()?;
        out.push(candle);
    }
    Ok(out)
}

/// Fetch up to `limit` candles for `symbol`, stitching pages of
/// `cfg.page_limit` into one ascending series without duplicates.
/// Pagination stops early when the exchange returns a short page.
pub fn fetch_candles(
    transport: &impl CandleTransport,
    cfg: &FetchConfig,
    symbol: &str,
    period: &str,
    limit: usize,
) -> Result<Vec<Candle>> {
    if limit < 1 {
        return Err(Error::Argument("limit must be >= 1".into()));
    }
    let mut all: Vec<Candle> = Vec::with_capacity(limit);
    let mut offset = 0usize;
    let mut first = true;
    while all.len() < limit {
        if !first && !cfg.delay.is_zero() {
            std::thread::sleep(cfg.delay);
        }
        first = false;
        let page_size = cfg.page_limit.min(limit - all.len());
        let url = candle_url(cfg, symbol, period, page_size, offset);
        let body = transport.get(&url)?;
        let page = parse_candles(&body, &cfg.fields)?;
        let got = page.len();
        all.extend(page);
        offset += got;
        if got < page_size {
            break; // history exhausted
        }
    }
    all.sort_by_key(|c| c.timestamp);
    all.dedup_by_key(|c| c.timestamp);
    all.truncate(limit);
    if all.is_empty() {
        return Err(Error::SymbolNotFound {
            symbol: symbol.to_string(),
        });
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn candle_json(ts: i64, close: f64) -> String {
        format!(
            r#"{{"timestamp":{ts},"open":{close},"close":{close},"min":{close},"max":{close},"volume":"3.5"}}"#
        )
    }

    fn page_body(start: i64, count: usize) -> String {
        let items: Vec<String> = (0..count as i64)
            .map(|k| candle_json(start + 60 * k, 100.0 + (start / 60 + k) as f64))
            .collect();
        format!("[{}]", items.join(","))
    }

    fn cfg() -> FetchConfig {
        FetchConfig {
            base_url: "http://x.test".into(),
            page_limit: 1000,
            delay: Duration::ZERO,
            fields: CandleFieldMap::default(),
        }
    }

    #[test]
    fn single_page_ascending() {
        let cfg = cfg();
        let mut t = FixtureTransport::new();
        t.record(
            candle_url(&cfg, "BTCUSD", "M1", 100, 0),
            page_body(0, 100),
        );
        let candles = fetch_candles(&t, &cfg, "BTCUSD", "M1", 100).unwrap();
        assert_eq!(candles.len(), 100);
        assert!(candles.windows(2).all(|w| w[0].timestamp < w[1].timestamp));
    }

    #[test]
    fn paginates_and_stitches_without_duplicates() {
        // 2500 candles across three pages of 1000/1000/500.
        let cfg = cfg();
        let mut t = FixtureTransport::new();
        t.record(candle_url(&cfg, "BTCUSD", "M1", 1000, 0), page_body(0, 1000));
        t.record(
            candle_url(&cfg, "BTCUSD", "M1", 1000, 1000),
            page_body(60_000, 1000),
        );
        t.record(
            candle_url(&cfg, "BTCUSD", "M1", 500, 2000),
            page_body(120_000, 500),
        );
        let candles = fetch_candles(&t, &cfg, "BTCUSD", "M1", 2500).unwrap();
        assert_eq!(candles.len(), 2500);
        let mut ts: Vec<i64> = candles.iter().map(|c| c.timestamp).collect();
        ts.dedup();
        assert_eq!(ts.len(), 2500);
        assert!(ts.windows(2).all(|w| w[1] - w[0] == 60));
    }

    #[test]
    fn idempotent_against_fixture() {
        let cfg = cfg();
        let mut t = FixtureTransport::new();
        t.record(candle_url(&cfg, "ETHUSD", "M1", 50, 0), page_body(0, 50));
        let a = fetch_candles(&t, &cfg, "ETHUSD", "M1", 50).unwrap();
        let b = fetch_candles(&t, &cfg, "ETHUSD", "M1", 50).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn short_final_page_ends_pagination() {
        let cfg = cfg();
        let mut t = FixtureTransport::new();
        t.record(candle_url(&cfg, "DOGEUSD", "M1", 1000, 0), page_body(0, 400));
        let candles = fetch_candles(&t, &cfg, "DOGEUSD", "M1", 5000).unwrap();
        assert_eq!(candles.len(), 400);
    }

    #[test]
    fn symbol_not_found_envelope() {
        let cfg = cfg();
        let mut t = FixtureTransport::new();
        t.record(
            candle_url(&cfg, "NOTACOIN", "M1", 10, 0),
            r#"{"error":{"code":2001,"message":"Symbol not found"}}"#,
        );
        let err = fetch_candles(&t, &cfg, "NOTACOIN", "M1", 10).unwrap_err();
        assert!(matches!(err, Error::SymbolNotFound { .. }), "{err}");
    }

    #[test]
    fn malformed_payload_names_field() {
        let cfg = cfg();
        let mut t = FixtureTransport::new();
        t.record(
            candle_url(&cfg, "BTCUSD", "M1", 1, 0),
            r#"[{"timestamp":60,"open":1.0,"close":"abc","min":1.0,"max":1.0,"volume":0}]"#,
        );
        let err = fetch_candles(&t, &cfg, "BTCUSD", "M1", 1).unwrap_err();
        match err {
            Error::MalformedPayload { field, .. } => assert_eq!(field, "close"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn rfc3339_timestamps_accepted() {
        let cfg = cfg();
        let mut t = FixtureTransport::new();
        t.record(
            candle_url(&cfg, "BTCUSD", "M1", 1, 0),
            r#"[{"timestamp":"2019-08-12T00:00:00.000Z","open":"1.0","close":"2.0","min":"0.5","max":"2.5","volume":"9"}]"#,
        );
        let candles = fetch_candles(&t, &cfg, "BTCUSD", "M1", 1).unwrap();
        assert_eq!(candles[0].timestamp, 1_565_568_000);
        assert_eq!(candles[0].close, 2.0);
    }

    #[test]
    fn custom_field_mapping() {
        let mut cfg = cfg();
        cfg.fields = CandleFieldMap {
            timestamp: "t".into(),
            open: "o".into(),
            close: "c".into(),
            low: "l".into(),
            high: "h".into(),
            volume: "v".into(),
        };
        let mut t = FixtureTransport::new();
        t.record(
            candle_url(&cfg, "BTCUSD", "M1", 1, 0),
            r#"[{"t":60,"o":1.0,"c":2.0,"l":0.5,"h":2.5,"v":1.25}]"#,
        );
        let candles = fetch_candles(&t, &cfg, "BTCUSD", "M1", 1).unwrap();
        assert_eq!(candles[0].high, 2.5);
    }
}
