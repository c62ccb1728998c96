//! The per-method results table and its text, CSV and JSON renderings.

use serde::{Serialize, Serializer};
use thetapair::{CiKind, ConfidenceInterval, Method, ResamplingScheme};

use crate::config::OutputFormat;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalCell {
    pub kind: CiKind,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub interval: Option<Bounds>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
    pub outside_unit: bool,
}

impl IntervalCell {
    pub fn from_result(kind: CiKind, r: thetapair::Result<ConfidenceInterval>) -> Self {
        match r {
            Ok(ci) => Self {
                kind,
                interval: Some(Bounds {
                    lo: ci.lo,
                    hi: ci.hi,
                    outside_unit: ci.outside_unit,
                }),
                note: ci.warning,
            },
            Err(e) => Self {
                kind,
                interval: None,
                note: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    #[serde(serialize_with = "method_label")]
    pub method: Method,
    pub scheme: ResamplingScheme,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<f64>,
    pub intervals: Vec<IntervalCell>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn method_label<S: Serializer>(m: &Method, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(m.label())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThetaReport {
    pub n: usize,
    pub replicates: usize,
    pub level: f64,
    pub seed: u64,
    pub rows: Vec<ReportRow>,
}

impl ThetaReport {
    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Text => self.to_text(),
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
        }
    }

    fn to_text(&self) -> String {
        let mut out = format!(
            "theta = P(X < Y)   n = {}   B = {}   level = {}   seed = {}\n\n",
            self.n, self.replicates, self.level, self.seed
        );
        let mut table = vec![["Method", "Estimate", "Normal", "Basic", "Percentile", "BCa"]
            .map(String::from)
            .to_vec()];
        let mut notes = Vec::new();
        let mut flagged = false;
        for row in &self.rows {
            let mut cells = vec![row.method.label().to_string()];
            match row.estimate {
                None => {
                    cells.extend(std::iter::repeat_n("-".to_string(), 5));
                    notes.push(format!(
                        "{}: {}",
                        row.method,
                        row.error.as_deref().unwrap_or("no estimate")
                    ));
                }
                Some(v) => {
                    cells.push(format!("{v:.3}"));
                    for cell in &row.intervals {
                        cells.push(match cell.interval {
                            Some(b) => {
                                flagged |= b.outside_unit;
                                format!("({:.3}, {:.3}){}", b.lo, b.hi, if b.outside_unit { "*" } else { "" })
                            }
                            None => "-".to_string(),
                        });
                        if let Some(note) = &cell.note {
                            notes.push(format!("{} {}: {note}", row.method, cell.kind.label()));
                        }
                    }
                }
            }
            table.push(cells);
        }
        let widths: Vec<usize> = (0..table[0].len())
            .map(|c| {
                table
                    .iter()
                    .map(|r| r.get(c).map_or(0, |s| s.chars().count()))
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        for row in &table {
            let line: Vec<String> = row.iter().zip(&widths).map(|(cell, w)| format!("{cell:<w$}")).collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        if flagged {
            out.push_str("\n* interval extends outside [0, 1]\n");
        }
        if !notes.is_empty() {
            out.push('\n');
            for n in notes {
                out.push_str(&n);
                out.push('\n');
            }
        }
        out
    }

    fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["method".to_string(), "estimate".to_string()];
        for kind in CiKind::ALL {
            let k = kind.label().to_ascii_lowercase();
            header.push(format!("{k}_lo"));
            header.push(format!("{k}_hi"));
        }
        header.push("error".into());
        w.write_record(&header).expect("in-memory write");
        for row in &self.rows {
            let mut rec = vec![row.method.slug().to_string(), opt(row.estimate)];
            for kind in CiKind::ALL {
                let b = row.intervals.iter().find(|c| c.kind == kind).and_then(|c| c.interval);
                rec.push(opt(b.map(|b| b.lo)));
                rec.push(opt(b.map(|b| b.hi)));
            }
            rec.push(row.error.clone().unwrap_or_default());
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}
