//! CSV layouts for the tabulated outputs.
//!
//! Every CSV ends with `# key=value` comment lines recording the seed and
//! sample count so a table can be regenerated from the file alone.

use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::simulation::{DisagreementTable, ImportanceTable};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Trailing comment lines of a CSV file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Footer {
    pub seed: Option<u64>,
    pub samples: Option<u64>,
}

impl Footer {
    pub fn new(seed: Option<u64>, samples: Option<u64>) -> Self {
        Self { seed, samples }
    }

    fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        let show = |v: Option<u64>| v.map_or_else(|| "none".to_string(), |v| v.to_string());
        writeln!(w, "# seed={}", show(self.seed))?;
        writeln!(w, "# samples={}", show(self.samples))
    }
}

/// Write `rows` with a header line, followed by the footer.
pub fn write_csv<W, R>(
    mut w: W,
    rows: impl IntoIterator<Item = R>,
    footer: &Footer,
) -> Result<(), ReportError>
where
    W: Write,
    R: Serialize,
{
    {
        let mut writer = csv::Writer::from_writer(&mut w);
        for row in rows {
            writer.serialize(row)?;
        }
        writer.flush()?;
    }
    footer.write_to(&mut w)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisagreementCsvRow {
    pub expected_eta: f64,
    pub b1s1: f64,
    pub b2s2: f64,
    pub pair: &'static str,
    pub sign_pct: Option<f64>,
    pub top_pct: Option<f64>,
    pub top_signed_pct: Option<f64>,
}

pub fn disagreement_rows(table: &DisagreementTable) -> Vec<DisagreementCsvRow> {
    let c = &table.config;
    table
        .rows
        .iter()
        .map(|r| DisagreementCsvRow {
            expected_eta: c.expected_eta,
            b1s1: c.scaled_sigmas[0],
            b2s2: c.scaled_sigmas[1],
            pair: r.pair.as_str(),
            sign_pct: r.sign_disagree_pct,
            top_pct: r.top_feature_disagree_pct,
            top_signed_pct: r.signed_top_feature_disagree_pct,
        })
        .collect()
}

/// Importance row; `excess` is in percent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceCsvRow {
    pub expected_eta: f64,
    pub b1s1: f64,
    pub b2s2: f64,
    pub outcome: &'static str,
    #[serde(rename = "I1")]
    pub i1: Option<f64>,
    #[serde(rename = "I2")]
    pub i2: Option<f64>,
    pub relative: Option<f64>,
    pub excess: Option<f64>,
}

pub fn importance_rows(table: &ImportanceTable) -> Vec<ImportanceCsvRow> {
    let c = &table.config;
    table
        .rows
        .iter()
        .map(|r| ImportanceCsvRow {
            expected_eta: c.expected_eta,
            b1s1: c.scaled_sigmas[0],
            b2s2: c.scaled_sigmas[1],
            outcome: r.outcome.as_str(),
            i1: r.importance.map(|i| i[0]),
            i2: r.importance.map(|i| i[1]),
            relative: r.relative,
            excess: r.excess_relative.map(|e| 100.0 * e),
        })
        .collect()
}
