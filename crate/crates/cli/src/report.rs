//! Report model and rendering. Every numeric cell carries a source
//! label (computed vs published reference) so emitted reports stay
//! traceable; rendering is free of timestamps and environment state so
//! identical configs produce byte-identical output.

use serde::Serialize;

use nsbound_core::SolverConfig;

use crate::config::Format;
use crate::verify::VerifyReport;

/// Source label for solver results.
pub const COMPUTED: &str = "computed";
/// Source label for the sampling oracle.
pub const SAMPLED: &str = "computed (sampling oracle)";
/// Source label for bundled published values.
pub const PUBLISHED: &str = "published reference";

/// A numeric value together with where it came from.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Sourced {
    pub value: f64,
    pub source: &'static str,
}

impl Sourced {
    pub fn computed(value: f64) -> Self {
        Sourced { value, source: COMPUTED }
    }
    pub fn published(value: f64) -> Self {
        Sourced { value, source: PUBLISHED }
    }
    pub fn sampled(value: f64) -> Self {
        Sourced { value, source: SAMPLED }
    }
}

/// Sampling-oracle outcome attached to a cell.
#[derive(Debug, Clone, Serialize)]
pub struct OracleCell {
    /// Best feasible objective found, if any sample survived the filters.
    pub best_value: Option<Sourced>,
    pub samples: usize,
    pub feasible_fraction: f64,
    /// solver − oracle; positive means the sampler sits below the
    /// solver, as a lower-bound witness should.
    pub gap_to_solver: Option<f64>,
}

/// One solved (argument, principle, case) cell.
#[derive(Debug, Clone, Serialize)]
pub struct CellReport {
    pub argument: &'static str,
    pub principle: &'static str,
    pub case_index: usize,
    pub lr: String,
    pub computed: Sourced,
    pub feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<Sourced>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleCell>,
}

/// One principle entry of the two-row summary table.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryCell {
    pub principle: &'static str,
    pub computed: Sourced,
    pub reference: Sourced,
    pub delta: f64,
    /// Second published value where the sources disagree (the Cabello
    /// orthogonality summary).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alternate_reference: Option<Sourced>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alternate_delta: Option<f64>,
}

/// One argument row of the summary table.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub argument: &'static str,
    /// Classical (locally deterministic) maximum; identically zero.
    pub lhvt: Sourced,
    /// Published quantum maximum.
    pub qm: Sourced,
    pub cells: Vec<SummaryCell>,
}

/// One computed-column-to-quantum-column distance.
#[derive(Debug, Clone, Serialize)]
pub struct DistanceRow {
    pub argument: &'static str,
    pub principle: &'static str,
    pub computed: Sourced,
    pub reference: Sourced,
    pub delta: f64,
}

/// Report payload variants.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Body {
    Cells { rows: Vec<CellReport> },
    Summary { rows: Vec<SummaryRow> },
    Distances { rows: Vec<DistanceRow> },
    Verify { report: VerifyReport },
}

/// A complete, renderable report.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_samples: Option<usize>,
    pub notes: Vec<String>,
    pub body: Body,
}

/// Acceptance thresholds for strict mode, matching the published-table
/// comparison rules used by the test suite.
pub mod strict {
    /// Summary (no-LR) cells.
    pub const SUMMARY: f64 = 0.003;
    /// Per-case cells under IC, ML, LO.
    pub const CELL: f64 = 0.005;
    /// Relaxed bound for the mirror-symmetric ML cases whose published
    /// values differ between symmetric partners.
    pub const CELL_RELAXED: f64 = 0.01;
    /// Case indices getting the relaxed ML bound.
    pub const RELAXED_ML_CASES: [usize; 4] = [2, 4, 6, 7];
    /// NS column for the Hardy argument (exactly 0.5 up to solver noise).
    pub const NS_HNA: f64 = 1e-6;
    /// NS column for the Cabello argument; the q1 floor trims the
    /// optimum by up to twice the floor, so allow three times.
    pub const NS_CNA: f64 = 3.0 * nsbound_core::tol::EPS_Q;
    /// Column-distance cells.
    pub const DISTANCE: f64 = 0.02;
    /// A sampler witness may never exceed the solver value by more.
    pub const ORACLE_EXCESS: f64 = 1e-6;
    /// ... and should come within this of the solver value.
    pub const ORACLE_GAP: f64 = 0.02;
}

/// Threshold for one solved cell's delta in strict mode.
fn cell_threshold(principle: &str, case_index: usize, argument: &str) -> f64 {
    match principle {
        "NS" if argument == "HNA" => strict::NS_HNA,
        "NS" => strict::NS_CNA,
        "ML" if strict::RELAXED_ML_CASES.contains(&case_index) => strict::CELL_RELAXED,
        _ => strict::CELL,
    }
}

/// Lists every strict-mode violation in the report; empty means pass.
pub fn strict_violations(report: &Report) -> Vec<String> {
    let mut v = Vec::new();
    match &report.body {
        Body::Cells { rows } => {
            for row in rows {
                let cell = format!("{} {} case {}", row.argument, row.principle, row.case_index);
                if !row.feasible {
                    v.push(format!("{cell}: no feasible point found"));
                }
                if let Some(delta) = row.delta {
                    let thr = cell_threshold(row.principle, row.case_index, row.argument);
                    if delta.abs() > thr {
                        v.push(format!(
                            "{cell}: delta {delta:+.4} exceeds ±{thr} against the published value"
                        ));
                    }
                }
                if let Some(oracle) = &row.oracle {
                    match &oracle.best_value {
                        Some(w) => {
                            if w.value > row.computed.value + strict::ORACLE_EXCESS {
                                v.push(format!(
                                    "{cell}: sampler witness {:.7} exceeds the solver value {:.7}",
                                    w.value, row.computed.value
                                ));
                            }
                            if w.value < row.computed.value - strict::ORACLE_GAP {
                                v.push(format!(
                                    "{cell}: sampler witness {:.7} sits more than {} below the solver value {:.7}",
                                    w.value,
                                    strict::ORACLE_GAP,
                                    row.computed.value
                                ));
                            }
                        }
                        None => v.push(format!("{cell}: sampler found no feasible point")),
                    }
                }
            }
        }
        Body::Summary { rows } => {
            for row in rows {
                for cell in &row.cells {
                    let best = cell
                        .alternate_delta
                        .map_or(cell.delta.abs(), |a| cell.delta.abs().min(a.abs()));
                    if best > strict::SUMMARY {
                        v.push(format!(
                            "{} {} summary: delta {best:+.4} exceeds ±{}",
                            row.argument,
                            cell.principle,
                            strict::SUMMARY
                        ));
                    }
                }
            }
        }
        Body::Distances { rows } => {
            for row in rows {
                if row.delta.abs() > strict::DISTANCE {
                    v.push(format!(
                        "{} {} distance: delta {:+.4} exceeds ±{}",
                        row.argument, row.principle, row.delta, strict::DISTANCE
                    ));
                }
            }
        }
        Body::Verify { report } => {
            if !report.validity.valid {
                v.push("box fails validity checks".to_string());
            }
        }
    }
    v
}

/// Renders the report in the requested encoding.
pub fn render(report: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Markdown => render_markdown(report),
        Format::Csv => render_csv(report),
    }
}

fn solver_line(report: &Report) -> String {
    let mut line = String::new();
    if let Some(s) = &report.solver {
        line.push_str(&format!(
            "solver: starts={} seed={} max_iter={} tol={:e}",
            s.starts, s.seed, s.max_iter, s.tol
        ));
    }
    if let Some(n) = report.oracle_samples {
        if !line.is_empty() {
            line.push_str("  ");
        }
        line.push_str(&format!("oracle samples: {n}"));
    }
    line
}

fn push_notes(out: &mut String, notes: &[String]) {
    if notes.is_empty() {
        return;
    }
    out.push_str("\nnotes:\n");
    for n in notes {
        out.push_str(&format!("- {n}\n"));
    }
}

fn render_markdown(report: &Report) -> String {
    let mut out = format!("# nsbound {}\n\n", report.command);
    let line = solver_line(report);
    if !line.is_empty() {
        out.push_str(&line);
        out.push_str("\n\n");
    }
    match &report.body {
        Body::Cells { rows } => {
            if is_full_single_argument_table(rows) {
                render_cells_pivot(&mut out, rows);
            } else {
                render_cells_long(&mut out, rows);
            }
        }
        Body::Summary { rows } => render_summary_markdown(&mut out, rows),
        Body::Distances { rows } => render_distances_markdown(&mut out, rows),
        Body::Verify { report } => crate::verify::render_markdown(&mut out, report),
    }
    push_notes(&mut out, &report.notes);
    out
}

/// A pivot (case × principle) layout is used when the rows form the
/// complete 4-principle × 16-case grid of one argument.
fn is_full_single_argument_table(rows: &[CellReport]) -> bool {
    rows.len() == 64 && rows.iter().all(|r| r.argument == rows[0].argument)
}

fn fmt_delta(d: Option<f64>) -> String {
    d.map_or_else(|| "-".to_string(), |d| format!("{d:+.4}"))
}

fn render_cells_long(out: &mut String, rows: &[CellReport]) {
    let with_oracle = rows.iter().any(|r| r.oracle.is_some());
    out.push_str(
        "Each row: computed optimum for one cell, with the published reference value \
         and computed − published delta where a reference exists.\n\n",
    );
    out.push_str("| argument | principle | case | local randomness | computed | published | delta |");
    if with_oracle {
        out.push_str(" oracle best | oracle gap | feasible share |");
    }
    out.push('\n');
    out.push_str("|---|---|---:|---|---:|---:|---:|");
    if with_oracle {
        out.push_str("---:|---:|---:|");
    }
    out.push('\n');
    for r in rows {
        let feas = if r.feasible { "" } else { " !" };
        out.push_str(&format!(
            "| {} | {} | {} | {} | {:.7}{} | {} | {} |",
            r.argument,
            r.principle,
            r.case_index,
            r.lr,
            r.computed.value,
            feas,
            r.reference.map_or_else(|| "-".to_string(), |s| format!("{:.4}", s.value)),
            fmt_delta(r.delta),
        ));
        if with_oracle {
            match &r.oracle {
                Some(o) => out.push_str(&format!(
                    " {} | {} | {:.4} |",
                    o.best_value.map_or_else(|| "none".to_string(), |s| format!("{:.7}", s.value)),
                    fmt_delta(o.gap_to_solver),
                    o.feasible_fraction
                )),
                None => out.push_str(" - | - | - |"),
            }
        }
        out.push('\n');
    }
    if rows.iter().any(|r| !r.feasible) {
        out.push_str("\n`!` marks a cell where no start reached feasibility.\n");
    }
}

fn render_cells_pivot(out: &mut String, rows: &[CellReport]) {
    out.push_str(&format!("{} argument, per-case maxima. ", rows[0].argument));
    out.push_str(
        "Each principle cell shows the computed optimum and, in parentheses, its \
         deviation from the published reference value.\n\n",
    );
    out.push_str("| case | local randomness | QM (published) | NS | NS+IC | NS+ML | NS+LO |\n");
    out.push_str("|---:|---|---:|---:|---:|---:|---:|\n");
    let qm = qm_reference(rows[0].argument);
    for case_index in 1..=16 {
        let mut line = String::new();
        let mut lr = String::new();
        for principle in ["NS", "IC", "ML", "LO"] {
            let r = rows
                .iter()
                .find(|r| r.case_index == case_index && r.principle == principle)
                .expect("full table has every cell");
            lr = r.lr.clone();
            let feas = if r.feasible { "" } else { " !" };
            line.push_str(&format!(
                " {:.7}{} ({}) |",
                r.computed.value,
                feas,
                fmt_delta(r.delta)
            ));
        }
        out.push_str(&format!(
            "| {} | {} | {:.4} |{}\n",
            case_index,
            lr,
            qm[case_index - 1],
            line
        ));
    }
}

fn qm_reference(argument: &str) -> &'static [f64; 16] {
    use nsbound_core::scenarios::reference;
    if argument == "HNA" {
        &reference::HNA.qm
    } else {
        &reference::CNA.qm
    }
}

fn render_summary_markdown(out: &mut String, rows: &[SummaryRow]) {
    out.push_str(
        "Maximum success measure per argument, no local-randomness constraints. \
         Principle cells: computed (delta vs published).\n\n",
    );
    out.push_str("| argument | LHVT | QM | NS | NS+IC | NS+ML | NS+LO |\n");
    out.push_str("|---|---:|---:|---:|---:|---:|---:|\n");
    for row in rows {
        out.push_str(&format!("| {} | {:.2} | {:.2} |", row.argument, row.lhvt.value, row.qm.value));
        for cell in &row.cells {
            match cell.alternate_delta {
                Some(alt) => out.push_str(&format!(
                    " {:.7} ({:+.4} / alt {alt:+.4}) |",
                    cell.computed.value, cell.delta
                )),
                None => out.push_str(&format!(" {:.7} ({:+.4}) |", cell.computed.value, cell.delta)),
            }
        }
        out.push('\n');
    }
}

fn render_distances_markdown(out: &mut String, rows: &[DistanceRow]) {
    out.push_str(
        "Euclidean distance between each computed 16-case column and the published \
         quantum column.\n\n",
    );
    out.push_str("| argument | principle | computed | published | delta |\n");
    out.push_str("|---|---|---:|---:|---:|\n");
    for r in rows {
        out.push_str(&format!(
            "| {} | {} | {:.4} | {:.4} | {:+.4} |\n",
            r.argument, r.principle, r.computed.value, r.reference.value, r.delta
        ));
    }
}

fn render_csv(report: &Report) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    match &report.body {
        Body::Cells { rows } => {
            let with_oracle = rows.iter().any(|r| r.oracle.is_some());
            let mut header = vec![
                "argument",
                "principle",
                "case",
                "lr",
                "computed",
                "feasible",
                "reference",
                "delta",
            ];
            if with_oracle {
                header.extend(["oracle_best", "oracle_gap", "oracle_samples", "oracle_feasible_fraction"]);
            }
            w.write_record(&header).expect("csv write");
            for r in rows {
                let mut rec = vec![
                    r.argument.to_string(),
                    r.principle.to_string(),
                    r.case_index.to_string(),
                    r.lr.clone(),
                    format!("{:.7}", r.computed.value),
                    r.feasible.to_string(),
                    r.reference.fmt_or_empty(|s| format!("{:.4}", s.value)),
                    r.delta.fmt_or_empty(|d| format!("{d:+.4}")),
                ];
                if with_oracle {
                    match &r.oracle {
                        Some(o) => rec.extend([
                            o.best_value.fmt_or_empty(|s| format!("{:.7}", s.value)),
                            o.gap_to_solver.fmt_or_empty(|d| format!("{d:+.4}")),
                            o.samples.to_string(),
                            format!("{:.4}", o.feasible_fraction),
                        ]),
                        None => rec.extend([String::new(), String::new(), String::new(), String::new()]),
                    }
                }
                w.write_record(&rec).expect("csv write");
            }
        }
        Body::Summary { rows } => {
            w.write_record(["argument", "LHVT", "QM", "NS", "NS+IC", "NS+ML", "NS+LO"])
                .expect("csv write");
            for row in rows {
                let mut rec = vec![
                    row.argument.to_string(),
                    format!("{:.2}", row.lhvt.value),
                    format!("{:.2}", row.qm.value),
                ];
                rec.extend(row.cells.iter().map(|c| format!("{:.7}", c.computed.value)));
                w.write_record(&rec).expect("csv write");
            }
        }
        Body::Distances { rows } => {
            w.write_record(["argument", "NS+IC", "NS+ML", "NS+LO"]).expect("csv write");
            for argument in ["HNA", "CNA"] {
                let cols: Vec<String> = rows
                    .iter()
                    .filter(|r| r.argument == argument)
                    .map(|r| format!("{:.4}", r.computed.value))
                    .collect();
                if cols.is_empty() {
                    continue;
                }
                let mut rec = vec![argument.to_string()];
                rec.extend(cols);
                w.write_record(&rec).expect("csv write");
            }
        }
        Body::Verify { report } => {
            w.write_record(["record", "field", "value"]).expect("csv write");
            for (field, value) in crate::verify::csv_pairs(report) {
                w.write_record(&["verify".to_string(), field, value]).expect("csv write");
            }
        }
    }
    String::from_utf8(w.into_inner().expect("csv flush")).expect("csv is utf-8")
}

/// `Option::map_or` with an empty-string default, for CSV cells.
trait MapOrDefault<T> {
    fn fmt_or_empty(&self, f: impl Fn(&T) -> String) -> String;
}

impl<T> MapOrDefault<T> for Option<T> {
    fn fmt_or_empty(&self, f: impl Fn(&T) -> String) -> String {
        self.as_ref().map_or_else(String::new, f)
    }
}
