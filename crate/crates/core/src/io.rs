//! Text formats: epsilon-grid specs, run manifests, and the CSV layouts for
//! curves, histogram laws and samples.
//!
//! Numbers are written in the shortest form that parses back to the same
//! `f64`, with a `.` decimal point regardless of locale.

use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::exact_dist::{HistogramLaw, PrivacyCurve, TradeoffCurve};

pub const DEFAULT_EPS_GRID: &str = "log:1e-3:10:64";

/// Formats a float so that `s.parse::<f64>()` returns it bit for bit.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if x.is_finite() && (1e-4..1e16).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Parses `"0,0.5,1"` or `"log:lo:hi:count"` (log-spaced, inclusive).
pub fn parse_eps_grid(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    let grid = if let Some(rest) = spec.strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::validation(format!(
                "grid spec '{spec}' is not log:lo:hi:count"
            )));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::validation(format!("bad number '{s}' in grid spec")))
        };
        let (lo, hi) = (num(parts[0])?, num(parts[1])?);
        let count: usize = parts[2]
            .parse()
            .map_err(|_| Error::validation(format!("bad count '{}' in grid spec", parts[2])))?;
        if !(lo > 0.0) || !(hi >= lo) || count < 2 {
            return Err(Error::validation(format!(
                "log grid needs 0 < lo <= hi and count >= 2 (got {lo}, {hi}, {count})"
            )));
        }
        let (a, b) = (lo.ln(), hi.ln());
        (0..count)
            .map(|i| {
                if i == 0 {
                    lo
                } else if i == count - 1 {
                    hi
                } else {
                    (a + (b - a) * i as f64 / (count - 1) as f64).exp()
                }
            })
            .collect()
    } else {
        spec.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::validation(format!("bad epsilon '{s}'")))
            })
            .collect::<Result<Vec<f64>>>()?
    };
    crate::exact_dist::check_eps_grid(&grid)?;
    Ok(grid)
}

/// Provenance block written as `#` lines at the top of every output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: Vec<(String, String)>,
    pub channel_fingerprint: String,
    pub version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, channel_bytes: &[u8], timestamp: String) -> Self {
        RunManifest {
            command: command.to_string(),
            params: Vec::new(),
            channel_fingerprint: fingerprint(channel_bytes),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn header(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# command={}", self.command);
        for (k, v) in &self.params {
            let _ = writeln!(s, "# {k}={v}");
        }
        let _ = writeln!(s, "# channel_sha256={}", self.channel_fingerprint);
        let _ = writeln!(s, "# version={}", self.version);
        let _ = writeln!(s, "# timestamp={}", self.timestamp);
        s
    }
}

/// Hex SHA-256 of the channel file.
pub fn fingerprint(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn pairs_csv(header: &str, columns: &str, rows: &[(f64, f64)]) -> String {
    let mut s = String::from(header);
    s.push_str(columns);
    s.push('\n');
    for (a, b) in rows {
        let _ = writeln!(s, "{},{}", fmt_f64(*a), fmt_f64(*b));
    }
    s
}

/// `epsilon,delta` CSV, preceded by the given `#` header block.
pub fn privacy_curve_csv(curve: &PrivacyCurve, header: &str) -> String {
    pairs_csv(header, "epsilon,delta", &curve.points)
}

pub fn tradeoff_curve_csv(curve: &TradeoffCurve, header: &str) -> String {
    pairs_csv(header, "alpha,beta", &curve.vertices)
}

/// `h_0,...,h_{d-1},prob`
pub fn histogram_law_csv(law: &HistogramLaw, header: &str) -> String {
    let mut s = String::from(header);
    let cols: Vec<String> = (0..law.d).map(|y| format!("h_{y}")).collect();
    let _ = writeln!(s, "{},prob", cols.join(","));
    for (h, p) in &law.atoms {
        let counts: Vec<String> = h.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(s, "{},{}", counts.join(","), fmt_f64(*p));
    }
    s
}

/// Parses a two-column CSV written by this module (comments and header skipped).
pub fn parse_pairs_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut rows = Vec::new();
    let mut seen_header = false;
    for line in text.lines() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !seen_header {
            seen_header = true;
            continue;
        }
        let mut it = line.split(',');
        let parse = |s: Option<&str>| -> Result<f64> {
            s.and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::validation(format!("malformed CSV row '{line}'")))
        };
        rows.push((parse(it.next())?, parse(it.next())?));
    }
    Ok(rows)
}
