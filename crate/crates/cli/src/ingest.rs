//! Two-column CSV input.

use std::path::Path;

use thetapair::PairedSample;

use crate::error::CliError;

/// Reads `(x, y)` couples from a two-column CSV file.
///
/// A first row that does not parse as numbers is taken as a header. Rows are
/// reported by line number, counting the header.
pub fn ingest_csv(path: &Path) -> Result<PairedSample, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    parse_csv(&text)
}

pub fn parse_csv(text: &str) -> Result<PairedSample, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut pairs = Vec::new();
    for (index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Data(format!("malformed CSV: {e}")))?;
        let row = record.position().map_or(index as u64 + 1, |p| p.line());
        if record.len() != 2 {
            return Err(CliError::Data(format!(
                "row {row}: expected 2 columns, found {}",
                record.len()
            )));
        }
        let parsed: Vec<Option<f64>> = record.iter().map(|cell| cell.parse::<f64>().ok()).collect();
        match (parsed[0], parsed[1]) {
            (Some(x), Some(y)) if x.is_finite() && y.is_finite() => pairs.push((x, y)),
            (Some(_), Some(_)) => return Err(CliError::Data(format!("row {row}: non-finite value"))),
            _ if index == 0 && parsed.iter().all(Option::is_none) => continue,
            _ => {
                let cell = record
                    .iter()
                    .zip(&parsed)
                    .find(|(_, p)| p.is_none())
                    .map(|(c, _)| c)
                    .unwrap_or("");
                return Err(CliError::Data(format!("row {row}: cannot parse {cell:?} as a number")));
            }
        }
    }
    if pairs.len() < 2 {
        return Err(CliError::Data(format!(
            "need at least 2 data rows, found {}",
            pairs.len()
        )));
    }
    Ok(PairedSample::new(&pairs)?)
}
