use std::cmp::Ordering;

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 12] =
    ["n", "model", "method", "alpha", "k0", "k", "mean", "bias", "mse", "coverage", "avg_length", "failures"];

/// One aggregated cell of a simulation: a method at a fixed `(n, alpha, k0, k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub n: usize,
    pub model: String,
    pub method: String,
    /// `None` for methods without a tuning parameter. In plug-in mode this is
    /// the mean `alpha0` used across replications.
    pub alpha: Option<f64>,
    pub k0: usize,
    pub k: usize,
    pub mean: f64,
    pub bias: f64,
    pub mse: f64,
    pub coverage: Option<f64>,
    /// Mean length over bounded intervals; `None` if every interval was unbounded.
    pub avg_length: Option<f64>,
    pub failures: usize,
}

impl ReportRow {
    pub fn variance(&self) -> f64 {
        self.mse - self.bias * self.bias
    }

    fn order(&self, other: &Self) -> Ordering {
        let alpha = |a: Option<f64>| a.unwrap_or(f64::NEG_INFINITY);
        self.n
            .cmp(&other.n)
            .then_with(|| self.method.cmp(&other.method))
            .then_with(|| alpha(self.alpha).total_cmp(&alpha(other.alpha)))
            .then_with(|| self.k0.cmp(&other.k0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
    pub seed: u64,
    pub schema_version: u32,
}

impl ExperimentReport {
    pub fn new(mut rows: Vec<ReportRow>, seed: u64) -> Self {
        rows.sort_by(ReportRow::order);
        Self { rows, seed, schema_version: super::config::SCHEMA_VERSION }
    }

    pub fn rows_for<'a>(&'a self, method: &'a str) -> impl Iterator<Item = &'a ReportRow> + 'a {
        self.rows.iter().filter(move |r| r.method == method)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("in-memory write");
        for r in &self.rows {
            let opt = |v: Option<f64>| v.map(format_sig10).unwrap_or_default();
            w.write_record([
                r.n.to_string(),
                r.model.clone(),
                r.method.clone(),
                opt(r.alpha),
                r.k0.to_string(),
                r.k.to_string(),
                format_sig10(r.mean),
                format_sig10(r.bias),
                format_sig10(r.mse),
                opt(r.coverage),
                opt(r.avg_length),
                r.failures.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    /// Parses CSV produced by [`to_csv`](Self::to_csv). The seed is not part
    /// of the CSV and must be supplied (it lives in the run manifest).
    pub fn from_csv(text: &str, seed: u64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let header = rdr.headers().map_err(|e| Error::Config(e.to_string()))?;
        if header.iter().ne(CSV_HEADER) {
            return Err(Error::Config(format!("unexpected CSV header {:?}", header)));
        }
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Config(e.to_string()))?;
            let bad = |field: &str| Error::Config(format!("row {}: bad {field}", line + 2));
            let int = |i: usize, name: &str| rec[i].parse::<usize>().map_err(|_| bad(name));
            let float = |i: usize, name: &str| rec[i].parse::<f64>().map_err(|_| bad(name));
            let opt = |i: usize, name: &str| -> Result<Option<f64>> {
                if rec[i].is_empty() {
                    Ok(None)
                } else {
                    float(i, name).map(Some)
                }
            };
            rows.push(ReportRow {
                n: int(0, "n")?,
                model: rec[1].to_string(),
                method: rec[2].to_string(),
                alpha: opt(3, "alpha")?,
                k0: int(4, "k0")?,
                k: int(5, "k")?,
                mean: float(6, "mean")?,
                bias: float(7, "bias")?,
                mse: float(8, "mse")?,
                coverage: opt(9, "coverage")?,
                avg_length: opt(10, "avg_length")?,
                failures: int(11, "failures")?,
            });
        }
        Ok(Self { rows, seed, schema_version: super::config::SCHEMA_VERSION })
    }

    /// Every float rounded to the precision written to CSV.
    pub fn rounded(&self) -> Self {
        let r = |x: f64| round_sig10(x);
        let o = |x: Option<f64>| x.map(round_sig10);
        let rows = self
            .rows
            .iter()
            .map(|row| ReportRow {
                alpha: o(row.alpha),
                mean: r(row.mean),
                bias: r(row.bias),
                mse: r(row.mse),
                coverage: o(row.coverage),
                avg_length: o(row.avg_length),
                ..row.clone()
            })
            .collect();
        Self { rows, ..self.clone() }
    }

    /// Wide table for plotting: a `k0` column, then one `<series>_mean` and
    /// one `<series>_mse` column per method/alpha. Rows with a single `n` only.
    pub fn to_plot_csv(&self) -> String {
        let label = |r: &ReportRow| match r.alpha {
            Some(a) => format!("{}_{}", r.method, format_sig10(a)),
            None => r.method.clone(),
        };
        let mut series: Vec<String> = Vec::new();
        let mut k0s: Vec<usize> = Vec::new();
        for r in &self.rows {
            let l = label(r);
            if !series.contains(&l) {
                series.push(l);
            }
            if !k0s.contains(&r.k0) {
                k0s.push(r.k0);
            }
        }
        k0s.sort_unstable();
        let mut out = String::from("k0");
        for s in &series {
            out.push_str(&format!(",{s}_mean,{s}_mse"));
        }
        out.push('\n');
        for k0 in k0s {
            out.push_str(&k0.to_string());
            for s in &series {
                match self.rows.iter().find(|r| r.k0 == k0 && &label(r) == s) {
                    Some(r) => out.push_str(&format!(",{},{}", format_sig10(r.mean), format_sig10(r.mse))),
                    None => out.push_str(",,"),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Shortest-form rendering with 10 significant digits (like C's `%.10g`).
pub fn format_sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.9e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..10).contains(&exp) {
        let fixed = format!("{:.*}", (9 - exp).max(0) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mant))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn round_sig10(x: f64) -> f64 {
    format_sig10(x).parse().expect("formatted float parses")
}
