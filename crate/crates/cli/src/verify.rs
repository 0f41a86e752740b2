//! Verification of user-supplied boxes: parse a 16-entry probability
//! table, check validity, and evaluate every principle residual set
//! that applies.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use nsbound_core::boxes::TABLE_ORDER;
use nsbound_core::{
    check_box, fit_cabello, fit_hardy, ic_residuals, lo_cabello_residuals, lo_hardy_residuals,
    marginals, ml_residual, tol, JointBox64, ResidualSet64,
};

/// Validity numbers with the overall verdict.
#[derive(Debug, Clone, Serialize)]
pub struct Validity {
    pub max_positivity_violation: f64,
    pub max_normalization_residual: f64,
    pub max_ns_residual: f64,
    pub valid: bool,
}

/// One-party outcome distributions.
#[derive(Debug, Clone, Serialize)]
pub struct MarginalsOut {
    /// `alice[x][a] = P(a|x)`.
    pub alice: [[f64; 2]; 2],
    /// `bob[y][b] = P(b|y)`.
    pub bob: [[f64; 2]; 2],
}

/// A principle residual set evaluated on the box (satisfied iff every
/// residual ≤ 0 within tolerance).
#[derive(Debug, Clone, Serialize)]
pub struct ResidualOut {
    pub name: String,
    pub satisfied: bool,
    pub max_residual: f64,
    pub values: Vec<f64>,
}

impl ResidualOut {
    fn from_set(set: &ResidualSet64) -> Self {
        ResidualOut {
            name: set.name.to_string(),
            satisfied: set.feasible(tol::CONSTRAINT),
            max_residual: set.max_residual(),
            values: set.values.clone(),
        }
    }
}

/// Everything the verify subcommand reports about one box.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub path: String,
    /// Row-major entries in the fixed table order.
    pub entries: Vec<f64>,
    pub validity: Validity,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub marginals: Option<MarginalsOut>,
    pub residual_sets: Vec<ResidualOut>,
    pub notes: Vec<String>,
}

/// Parses a 16-entry row-major box file: either a JSON array or
/// whitespace-separated numbers.
pub fn parse_box_file(path: &Path) -> Result<JointBox64> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let trimmed = text.trim_start();
    let entries: Vec<f64> = if trimmed.starts_with('[') {
        serde_json::from_str(&text)
            .with_context(|| format!("{}: JSON box file", path.display()))?
    } else {
        let mut v = Vec::new();
        for (i, token) in text.split_whitespace().enumerate() {
            let x: f64 = token
                .parse()
                .with_context(|| format!("{}: entry {}: invalid number {token:?}", path.display(), i + 1))?;
            v.push(x);
        }
        v
    };
    if entries.len() != 16 {
        bail!("{}: expected 16 entries ({}), found {}", path.display(), TABLE_ORDER, entries.len());
    }
    let mut flat = [0.0; 16];
    flat.copy_from_slice(&entries);
    Ok(JointBox64::from_flat(flat))
}

/// Builds the verify report for one parsed box.
pub fn verify_box(path: &Path, bx: &JointBox64) -> VerifyReport {
    let mut notes = Vec::new();
    let mut residual_sets = Vec::new();

    let report = check_box(bx);
    let validity = Validity {
        max_positivity_violation: report.max_positivity_violation,
        max_normalization_residual: report.max_normalization_residual,
        max_ns_residual: report.max_ns_residual,
        valid: report.is_valid(tol::CONSTRAINT),
    };

    let margs = match marginals(bx) {
        Ok(m) => Some(MarginalsOut { alice: m.pa, bob: m.pb }),
        Err(_) => {
            notes.push(
                "box signals beyond tolerance: one-party marginals are input-dependent; \
                 marginals and the information-causality set are not evaluated"
                    .to_string(),
            );
            None
        }
    };

    if let Ok(set) = ic_residuals(bx) {
        residual_sets.push(ResidualOut::from_set(&set));
    }
    residual_sets.push(ResidualOut::from_set(&ml_residual(bx)));

    let mut any_fit = false;
    if let Some(coeffs) = fit_hardy(bx) {
        any_fit = true;
        residual_sets.push(ResidualOut::from_set(&lo_hardy_residuals(&coeffs)));
    }
    if let Some(coeffs) = fit_cabello(bx) {
        any_fit = true;
        residual_sets.push(ResidualOut::from_set(&lo_cabello_residuals(&coeffs)));
    }
    if !any_fit {
        notes.push(
            "box lies outside both mixture families (it lacks their zero patterns); \
             the reduced orthogonality sets do not apply"
                .to_string(),
        );
    }

    VerifyReport {
        path: path.display().to_string(),
        entries: bx.as_flat().to_vec(),
        validity,
        marginals: margs,
        residual_sets,
        notes,
    }
}

/// Markdown section for the verify body.
pub fn render_markdown(out: &mut String, report: &VerifyReport) {
    out.push_str(&format!("box file: {}\n\n", report.path));
    out.push_str(&format!("entries ({TABLE_ORDER}):\n\n"));
    out.push_str("| x y | ab=00 | ab=01 | ab=10 | ab=11 |\n|---|---:|---:|---:|---:|\n");
    for (r, xy) in ["0 0", "0 1", "1 0", "1 1"].iter().enumerate() {
        out.push_str(&format!(
            "| {} | {:.6} | {:.6} | {:.6} | {:.6} |\n",
            xy,
            report.entries[4 * r],
            report.entries[4 * r + 1],
            report.entries[4 * r + 2],
            report.entries[4 * r + 3]
        ));
    }
    let v = &report.validity;
    out.push_str(&format!(
        "\nvalidity: {} (positivity {:.2e}, normalization {:.2e}, no-signaling {:.2e})\n",
        if v.valid { "ok" } else { "INVALID" },
        v.max_positivity_violation,
        v.max_normalization_residual,
        v.max_ns_residual
    ));
    if let Some(m) = &report.marginals {
        out.push_str("\nmarginals:\n\n| input | P(outcome 0) | P(outcome 1) |\n|---|---:|---:|\n");
        for (x, row) in m.alice.iter().enumerate() {
            out.push_str(&format!("| x={x} | {:.6} | {:.6} |\n", row[0], row[1]));
        }
        for (y, row) in m.bob.iter().enumerate() {
            out.push_str(&format!("| y={y} | {:.6} | {:.6} |\n", row[0], row[1]));
        }
    }
    out.push_str(
        "\nresidual sets (satisfied iff every residual ≤ 0 within tolerance):\n\n\
         | set | satisfied | max residual | residuals |\n|---|---|---:|---|\n",
    );
    for set in &report.residual_sets {
        let values: Vec<String> = set.values.iter().map(|r| format!("{r:+.3e}")).collect();
        out.push_str(&format!(
            "| {} | {} | {:+.3e} | {} |\n",
            set.name,
            if set.satisfied { "yes" } else { "NO" },
            set.max_residual,
            values.join(" ")
        ));
    }
    if !report.notes.is_empty() {
        out.push_str("\nnotes:\n");
        for n in &report.notes {
            out.push_str(&format!("- {n}\n"));
        }
    }
}

/// Flat (field, value) pairs for CSV output.
pub fn csv_pairs(report: &VerifyReport) -> Vec<(String, String)> {
    let mut pairs = vec![
        ("path".to_string(), report.path.clone()),
        (
            "entries".to_string(),
            report
                .entries
                .iter()
                .map(|e| format!("{e:.6}"))
                .collect::<Vec<_>>()
                .join(" "),
        ),
        ("valid".to_string(), report.validity.valid.to_string()),
        (
            "max_positivity_violation".to_string(),
            format!("{:.3e}", report.validity.max_positivity_violation),
        ),
        (
            "max_normalization_residual".to_string(),
            format!("{:.3e}", report.validity.max_normalization_residual),
        ),
        ("max_ns_residual".to_string(), format!("{:.3e}", report.validity.max_ns_residual)),
    ];
    for set in &report.residual_sets {
        pairs.push((
            format!("{} (satisfied)", set.name),
            format!("{} (max {:+.3e})", set.satisfied, set.max_residual),
        ));
    }
    for note in &report.notes {
        pairs.push(("note".to_string(), note.clone()));
    }
    pairs
}
