//! Result export: per-run CSV and a JSON summary that embeds the analysis
//! and, when available, the exact oracle numbers next to the empirical ones.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::chain::AnalysisReport;
use crate::error::{Error, Result};
use crate::game::StateBasedGame;
use crate::harness::BatchResult;
use crate::meta::OracleSummary;

/// Round to 12 significant digits.
pub fn round12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.11e}").parse().expect("formatted float parses")
}

/// Decimal text with at most 12 significant digits.
pub fn fmt12(v: f64) -> String {
    round12(v).to_string()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportPaths {
    pub runs_csv: PathBuf,
    pub summary_json: PathBuf,
}

/// Summary JSON without touching the file system.
pub fn summary_json(
    game: &StateBasedGame,
    batch: &BatchResult,
    analysis: &AnalysisReport,
    oracle: Option<&OracleSummary>,
) -> Result<Value> {
    if batch.records.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if batch.game_id != analysis.game_id {
        return Err(Error::GameMismatch {
            batch: batch.game_id.clone(),
            analysis: analysis.game_id.clone(),
        });
    }
    let game_id = game.fingerprint();
    if game_id != batch.game_id {
        return Err(Error::GameMismatch {
            batch: batch.game_id.clone(),
            analysis: game_id,
        });
    }
    let mut warnings = Vec::new();
    if !analysis.trap_set.is_empty() {
        let states: Vec<String> = analysis.trap_set.iter().map(|x| (x + 1).to_string()).collect();
        warnings.push(format!(
            "trap set {{{}}}: it is closed under every action and hosts no RSE, so no uncoupled \
             learning algorithm can converge to an RSE once the state enters it",
            states.join(",")
        ));
    }
    let comparison = oracle.map(|o| {
        let (label, exact) = match o.truncated {
            Some((t, p)) if t == batch.horizon => ("lockin_probability_by_horizon", p),
            _ => ("absorption_probability", o.absorption),
        };
        let empirical = batch.lockin_frequency;
        json!({
            "exact_quantity": label,
            "exact": round12(exact),
            "empirical": round12(empirical),
            "abs_deviation": round12((empirical - exact).abs()),
        })
    });
    Ok(json!({
        "game_id": batch.game_id,
        "analysis": analysis.to_json(game),
        "batch": batch.aggregates_json(game),
        "oracle": oracle.map(OracleSummary::to_json),
        "comparison": comparison,
        "warnings": warnings,
    }))
}

/// Write `runs.csv` and `summary.json` into `dir`.
pub fn report(
    game: &StateBasedGame,
    batch: &BatchResult,
    analysis: &AnalysisReport,
    oracle: Option<&OracleSummary>,
    dir: &Path,
) -> Result<ReportPaths> {
    let summary = summary_json(game, batch, analysis, oracle)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let runs_csv = dir.join("runs.csv");
    let file = fs::File::create(&runs_csv).map_err(|e| Error::io(&runs_csv, e))?;
    batch.write_csv(game, file)?;
    let summary_json = dir.join("summary.json");
    fs::write(&summary_json, serde_json::to_string_pretty(&summary)?)
        .map_err(|e| Error::io(&summary_json, e))?;
    Ok(ReportPaths {
        runs_csv,
        summary_json,
    })
}
