//! Report rows and their CSV / JSON encodings.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::config::SimulationConfig;
use super::stats::{compare, compare_bound, Comparison};
use crate::error::Result;

/// One grid point. Column order is the CSV header order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub experiment: String,
    pub snr: f64,
    pub snr_convention: String,
    pub l: Option<usize>,
    pub k: Option<usize>,
    pub d: Option<usize>,
    pub n_codewords: Option<usize>,
    pub trials: u64,
    pub seed: u64,
    pub empirical_p: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub analytic_p: f64,
    pub analytic_ref: String,
    pub z_score: f64,
}

pub const CSV_HEADER: &str = "experiment,snr,snr_convention,l,k,d,n_codewords,trials,seed,empirical_p,ci_low,ci_high,analytic_p,analytic_ref,z_score";

impl Row {
    /// Upper-bound references end in `-bound` and are checked one-sided.
    pub fn is_bound(&self) -> bool {
        self.analytic_ref.ends_with("-bound")
    }

    pub fn comparison(&self) -> Comparison {
        if self.is_bound() {
            compare_bound(self.empirical_p, self.analytic_p, self.trials)
        } else {
            compare(self.empirical_p, self.analytic_p, self.trials)
        }
    }

    pub fn passes(&self) -> bool {
        self.comparison().pass
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorRateReport {
    pub rows: Vec<Row>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    config: &'a SimulationConfig,
    rows: &'a [Row],
}

#[derive(Deserialize)]
struct OwnedJsonReport {
    config: SimulationConfig,
    rows: Vec<Row>,
}

impl ErrorRateReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(Row::passes)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.passes())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        w.write_record(CSV_HEADER.split(','))?;
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let rows = r.deserialize().collect::<std::result::Result<_, _>>()?;
        Ok(Self { rows })
    }

    /// Rows plus an echo of the configuration that produced them.
    pub fn to_json(&self, config: &SimulationConfig) -> Result<String> {
        Ok(serde_json::to_string_pretty(&JsonReport {
            config,
            rows: &self.rows,
        })?)
    }

    pub fn from_json(text: &str) -> Result<(SimulationConfig, Self)> {
        let r: OwnedJsonReport = serde_json::from_str(text)?;
        Ok((r.config, Self { rows: r.rows }))
    }
}
