//! Machine-readable result records with a stable schema.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Fixed CSV column order; JSON uses the same field names.
pub const CSV_COLUMNS: [&str; 15] = [
    "experiment_id",
    "q",
    "epsilon",
    "r",
    "p_acc",
    "se_acc",
    "p_gpass",
    "p_psipass",
    "alpha",
    "beta1",
    "beta2",
    "beta3",
    "delta",
    "q_star",
    "gap",
];

/// One experiment's aggregate result plus its bound table. Wall time is
/// tracked for the log but excluded from the serialized record so that
/// identical configurations produce identical bytes.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ResultRecord {
    pub experiment_id: String,
    pub q: f64,
    pub epsilon: f64,
    pub r: u32,
    pub p_acc: f64,
    pub se_acc: f64,
    pub p_gpass: Option<f64>,
    pub se_gpass: Option<f64>,
    pub p_psipass: Option<f64>,
    pub se_psipass: Option<f64>,
    pub p_compute: Option<f64>,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub delta: f64,
    pub q_star: Option<f64>,
    pub gap: Option<f64>,
    pub trials: usize,
    pub compute_trials: usize,
    pub stab_trials: usize,
    pub input_trials: usize,
    #[serde(skip)]
    pub wall_time_ms: u128,
}

fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => String::new(),
    }
}

impl ResultRecord {
    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.experiment_id.clone(),
            format!("{}", self.q),
            format!("{}", self.epsilon),
            format!("{}", self.r),
            format!("{}", self.p_acc),
            format!("{}", self.se_acc),
            cell(self.p_gpass),
            cell(self.p_psipass),
            format!("{}", self.alpha),
            format!("{}", self.beta1),
            format!("{}", self.beta2),
            format!("{}", self.beta3),
            format!("{}", self.delta),
            cell(self.q_star),
            cell(self.gap),
        ]
    }
}

pub fn write_csv<W: Write>(records: &[ResultRecord], mut out: W) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_writer(&mut out);
    writer
        .write_record(CSV_COLUMNS)
        .and_then(|_| {
            for r in records {
                writer.write_record(r.csv_row())?;
            }
            writer.flush().map_err(csv::Error::from)
        })
        .map_err(|e| CliError::config(format!("cannot write CSV: {e}")))
}

pub fn write_json<W: Write>(records: &[ResultRecord], mut out: W) -> Result<(), CliError> {
    let text = if records.len() == 1 {
        serde_json::to_string_pretty(&records[0])
    } else {
        serde_json::to_string_pretty(records)
    }
    .map_err(|e| CliError::config(format!("cannot serialize JSON: {e}")))?;
    writeln!(out, "{text}").map_err(|e| CliError::config(format!("cannot write output: {e}")))
}
