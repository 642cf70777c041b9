//! Rendering of sweep results into the report files.
//!
//! Four artifacts per run: `summary.csv` (one row per cell), `winners.csv`
//! (best algorithm per design/subject/size), `accuracies.csv` (every
//! retained repetition, plot-ready), and `summary.txt` (the same table
//! rounded to one decimal for reading). Full precision lives only in the
//! CSVs. All four are deterministic functions of the outcomes, so identical
//! runs produce byte-identical files.

use std::path::Path;

use crate::classify::Algorithm;
use crate::error::{Error, Result};
use crate::eval::{CellOutcome, DesignRun};
use crate::select::SelectionMode;

/// Bumped when any report schema changes shape.
pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportSet {
    pub summary_csv: String,
    pub winners_csv: String,
    pub accuracies_csv: String,
    pub summary_txt: String,
}

fn subject_column(outcome: &CellOutcome) -> &str {
    outcome.cell().design.subject().unwrap_or("-")
}

/// Renders all report bodies from one or more design sweeps.
///
/// Cells that collapsed (too many training failures) keep their row in
/// `summary.csv` with `NA` statistics; they never compete for a winner and
/// contribute nothing to `accuracies.csv`.
pub fn render_reports(runs: &[&DesignRun], mode: SelectionMode) -> ReportSet {
    let outcomes: Vec<&CellOutcome> = runs.iter().flat_map(|r| r.outcomes.iter()).collect();

    let mut summary = String::from("design,subject,algorithm,n,mean,std,reps,failures,mode\n");
    let mut txt = String::from(
        "design  subject  algorithm     n     mean    std   reps  failures\n",
    );
    for outcome in &outcomes {
        let cell = outcome.cell();
        let subject = subject_column(outcome);
        let algo = cell.algorithm.as_str();
        match outcome {
            CellOutcome::Done(s) => {
                summary.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    cell.design.tag(),
                    subject,
                    algo,
                    cell.n,
                    s.mean,
                    s.std,
                    s.accuracies.len(),
                    s.failures.len(),
                    mode.as_str(),
                ));
                txt.push_str(&format!(
                    "{:<6}  {:<7}  {:<9}  {:>4}  {:>7.1}  {:>5.1}  {:>5}  {:>8}\n",
                    cell.design.tag(),
                    subject,
                    algo,
                    cell.n,
                    s.mean,
                    s.std,
                    s.accuracies.len(),
                    s.failures.len(),
                ));
            }
            CellOutcome::Failed { reason, .. } => {
                summary.push_str(&format!(
                    "{},{},{},{},NA,NA,0,{},{}\n",
                    cell.design.tag(),
                    subject,
                    algo,
                    cell.n,
                    cell.repetitions,
                    mode.as_str(),
                ));
                txt.push_str(&format!(
                    "{:<6}  {:<7}  {:<9}  {:>4}  failed: {}\n",
                    cell.design.tag(),
                    subject,
                    algo,
                    cell.n,
                    reason,
                ));
            }
        }
    }

    // Winner per (design, subject, n). Outcomes arrive algorithm-major from
    // the sweep, so group members are not adjacent; group keys keep first-
    // appearance order. Strict > keeps the alphabetically first algorithm
    // on tied means.
    let mut keys: Vec<(String, String, usize)> = Vec::new();
    for outcome in &outcomes {
        let cell = outcome.cell();
        let key = (
            cell.design.tag().to_string(),
            subject_column(outcome).to_string(),
            cell.n,
        );
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let mut winners = String::from("design,subject,n,algorithm,mean\n");
    for (design, subject, n) in &keys {
        let mut best: Option<(Algorithm, f64)> = None;
        for outcome in &outcomes {
            let cell = outcome.cell();
            if cell.design.tag() != design || subject_column(outcome) != subject || cell.n != *n {
                continue;
            }
            if let CellOutcome::Done(s) = outcome {
                let better = match best {
                    None => true,
                    Some((a, m)) => s.mean > m || (s.mean == m && cell.algorithm < a),
                };
                if better {
                    best = Some((cell.algorithm, s.mean));
                }
            }
        }
        if let Some((algo, mean)) = best {
            winners.push_str(&format!(
                "{design},{subject},{n},{},{mean}\n",
                algo.as_str()
            ));
        }
    }

    let mut accuracies = String::from("design,subject,algorithm,n,rep,accuracy\n");
    for outcome in &outcomes {
        if let CellOutcome::Done(s) = outcome {
            let cell = &s.cell;
            let subject = subject_column(outcome);
            for (rep, acc) in &s.accuracies {
                accuracies.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    cell.design.tag(),
                    subject,
                    cell.algorithm.as_str(),
                    cell.n,
                    rep,
                    acc,
                ));
            }
        }
    }

    ReportSet {
        summary_csv: summary,
        winners_csv: winners,
        accuracies_csv: accuracies,
        summary_txt: txt,
    }
}

/// Assembles `run-meta.txt`: everything needed to reproduce the run.
/// Deliberately free of timestamps so reruns stay byte-identical.
pub fn run_meta(master_seed: u64, config_snapshot: &str) -> String {
    format!(
        "master_seed = {master_seed}\n\
         trial_format = {} v{}\n\
         report_format = {REPORT_FORMAT_VERSION}\n\
         \n\
         # effective configuration\n\
         {config_snapshot}",
        String::from_utf8_lossy(crate::data::MAGIC),
        crate::data::FORMAT_VERSION,
    )
}

/// Writes the four report files plus `run-meta.txt` into `dir`, creating it
/// if needed.
pub fn write_reports(dir: &Path, set: &ReportSet, meta: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let put = |name: &str, body: &str| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(path, e))
    };
    put("summary.csv", &set.summary_csv)?;
    put("winners.csv", &set.winners_csv)?;
    put("accuracies.csv", &set.accuracies_csv)?;
    put("summary.txt", &set.summary_txt)?;
    put("run-meta.txt", meta)
}
