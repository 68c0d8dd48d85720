//! CSV input and output.
//!
//! Numbers are written as `{:.16e}` (17 significant digits), so every value
//! re-parses to the identical `f64`. Missing values are empty cells.
//! Metadata travels in leading `# key: value` lines, which every reader
//! skips as comments.

use std::collections::BTreeMap;
use std::io::Write;

use crate::bounds::BoundResult;
use crate::dist::{make_dist, ProbDist, ProductDistStats};
use crate::error::{Error, Result};
use crate::experiment::GECurve;
use crate::verify::ClaimResult;

/// Full-precision decimal form of `x`.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn parse_num(s: &str, line: usize) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse {
        line,
        message: format!("`{}`: {e}", s.trim()),
    })
}

/// Parses one real per line. Blank lines and lines starting with `#` are
/// skipped; a trailing `#` comment after a value is allowed.
pub fn parse_prob_list(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let body = body.strip_suffix(',').unwrap_or(body);
        out.push(parse_num(body, i + 1)?);
    }
    Ok(out)
}

/// Parses a probability list and normalizes it into a distribution.
pub fn read_prob_dist(text: &str) -> Result<ProbDist<f64>> {
    make_dist(&parse_prob_list(text)?)
}

pub fn write_prob_list<W: Write>(mut w: W, d: &ProbDist<f64>) -> Result<()> {
    for &p in d.probs() {
        writeln!(w, "{}", fmt_num(p))?;
    }
    Ok(())
}

pub const BOUNDS_HEADER: [&str; 6] = [
    "method",
    "value",
    "value_log2_bits",
    "applicable",
    "alpha_star",
    "condition_note",
];

pub fn write_bounds_csv<W: Write>(w: W, results: &[BoundResult<f64>]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(BOUNDS_HEADER)?;
    for r in results {
        out.write_record([
            r.method.id().to_string(),
            fmt_opt(r.value),
            fmt_num(r.value_log2_bits),
            r.applicable.to_string(),
            fmt_opt(r.alpha_star),
            r.condition_note.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `key,value` table of product statistics.
pub fn write_stats_csv<W: Write>(
    w: W,
    s: &ProductDistStats<f64>,
    extra: &[(&str, String)],
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["key", "value"])?;
    out.write_record(["factor_count", &s.factor_count.to_string()])?;
    out.write_record(["entropy_bits", &fmt_num(s.entropy_bits)])?;
    out.write_record(["log2_min_prob", &fmt_num(s.log2_min_prob)])?;
    out.write_record(["log2_support", &fmt_num(s.log2_support)])?;
    for (k, v) in extra {
        out.write_record([*k, v.as_str()])?;
    }
    out.flush()?;
    Ok(())
}

/// Column name of an externally supplied comparison bound in curve output.
pub const CHES17_COLUMN: &str = "ches17_log2";

/// Column names of a curve file, in order.
pub fn curve_header(curve: &GECurve, with_ches17: bool) -> Vec<String> {
    let mut h: Vec<String> = ["n_traces", "log2_ge_exact", "entropy_bits", "log2_min_prob"]
        .map(String::from)
        .to_vec();
    for m in &curve.methods {
        h.push(format!("{}_log2", m.id()));
        h.push(format!("{}_applicable", m.id()));
    }
    if with_ches17 {
        h.push(CHES17_COLUMN.into());
    }
    h
}

/// Writes an averaged curve. `ches17` maps trace counts to an external
/// bound (log2 bits); counts it lacks are left blank.
pub fn write_curve_csv<W: Write>(
    mut w: W,
    curve: &GECurve,
    ches17: Option<&BTreeMap<usize, f64>>,
) -> Result<()> {
    let m = &curve.meta;
    writeln!(w, "# seed: {}", m.seed)?;
    writeln!(w, "# sigma: {}", fmt_num(m.sigma))?;
    writeln!(w, "# key_byte: {}", m.key_byte)?;
    writeln!(w, "# experiments: {}", m.n_experiments)?;
    writeln!(w, "# bytes: {}", m.n_bytes)?;
    writeln!(w, "# profiling_traces: {}", m.profiling_traces)?;
    writeln!(
        w,
        "# max_materialize_support: {}",
        m.max_materialize_support
    )?;
    writeln!(w, "# averaging: {}", m.averaging)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(curve_header(curve, ches17.is_some()))?;
    for row in &curve.rows {
        let mut rec = vec![
            row.n_traces.to_string(),
            fmt_opt(row.log2_ge_exact),
            fmt_num(row.entropy_bits),
            fmt_num(row.log2_min_prob),
        ];
        for &method in &curve.methods {
            match row.bound(method) {
                Some(p) => {
                    rec.push(fmt_num(p.log2_bits));
                    rec.push(p.applicable.to_string());
                }
                None => rec.extend([String::new(), String::new()]),
            }
        }
        if let Some(c) = ches17 {
            rec.push(fmt_opt(c.get(&row.n_traces).copied()));
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads an external bound column: a header naming `n_traces` and at least
/// one other column, of which the first is taken as log2 bits.
pub fn read_ches17_csv(text: &str) -> Result<BTreeMap<usize, f64>> {
    let table = CsvTable::parse(text)?;
    let value_col = table
        .header
        .iter()
        .position(|h| h != "n_traces")
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: "no value column next to n_traces".into(),
        })?;
    let n_col = table.index("n_traces")?;
    table
        .records
        .iter()
        .map(|(line, rec)| {
            let n = rec[n_col]
                .trim()
                .parse::<usize>()
                .map_err(|e| Error::Parse {
                    line: *line,
                    message: format!("n_traces `{}`: {e}", rec[n_col]),
                })?;
            Ok((n, parse_num(&rec[value_col], *line)?))
        })
        .collect()
}

pub const REPORT_HEADER: [&str; 5] = ["claim_id", "status", "witness", "margin", "detail"];

pub fn write_report_csv<W: Write>(w: W, claims: &[ClaimResult]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(REPORT_HEADER)?;
    for c in claims {
        out.write_record([
            c.id.clone(),
            c.status.to_string(),
            fmt_opt(c.witness),
            fmt_opt(c.margin),
            c.detail.clone(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// A parsed CSV file: `#` metadata, header and records with line numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub meta: BTreeMap<String, String>,
    pub header: Vec<String>,
    pub records: Vec<(usize, Vec<String>)>,
}

impl CsvTable {
    pub fn parse(text: &str) -> Result<Self> {
        let meta = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .filter_map(|l| {
                let (k, v) = l.trim_start_matches('#').split_once(':')?;
                Some((k.trim().to_string(), v.trim().to_string()))
            })
            .collect();
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let header = rdr.headers()?.iter().map(String::from).collect();
        let mut records = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            records.push((line, rec.iter().map(String::from).collect()));
        }
        Ok(Self {
            meta,
            header,
            records,
        })
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("missing column `{name}`"),
            })
    }

    /// Numeric column; empty cells become `None`.
    pub fn column_f64(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let i = self.index(name)?;
        self.records
            .iter()
            .map(|(line, r)| {
                let cell = r[i].trim();
                if cell.is_empty() {
                    Ok(None)
                } else {
                    parse_num(cell, *line).map(Some)
                }
            })
            .collect()
    }

    pub fn column_bool(&self, name: &str) -> Result<Vec<bool>> {
        let i = self.index(name)?;
        self.records
            .iter()
            .map(|(line, r)| match r[i].trim() {
                "true" => Ok(true),
                "false" => Ok(false),
                other => Err(Error::Parse {
                    line: *line,
                    message: format!("expected true/false, got `{other}`"),
                }),
            })
            .collect()
    }

    pub fn column_str(&self, name: &str) -> Result<Vec<&str>> {
        let i = self.index(name)?;
        Ok(self.records.iter().map(|(_, r)| r[i].as_str()).collect())
    }

    /// Value of a `key,value` table.
    pub fn lookup(&self, key: &str) -> Option<&str> {
        self.records
            .iter()
            .find(|(_, r)| r.first().map(String::as_str) == Some(key))
            .and_then(|(_, r)| r.get(1).map(String::as_str))
    }
}
