//! Reporting: carpet plots, machine-readable exports and run summaries.

mod results_csv;
mod svg;

pub use results_csv::{export_results_csv, read_results_csv};
pub use svg::render_svg;

use std::collections::BTreeMap;

use chrono::NaiveDate;
use chrono_tz::Tz;
use thiserror::Error;

use crate::eval::TriState;
use crate::statespace::{ActiveStates, StateSpaceResult};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("grid step of {step_secs} s does not divide a day")]
    StepBeyondDay { step_secs: u32 },
    #[error("malformed results file: {0}")]
    BadFormat(String),
}

/// Which categorical view a carpet shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CarpetKind {
    /// Which state is satisfied in each cell.
    States,
    /// Whether the space as a whole is satisfied.
    Verdict,
}

/// Reserved carpet labels. State ids can never collide with them because
/// identifiers cannot contain `-`.
pub const LABEL_UNSATISFIED: &str = "UNSATISFIED";
pub const LABEL_NO_DATA: &str = "NO-DATA";
pub const LABEL_OVERLAP: &str = "OVERLAP";
pub const LABEL_SATISFIED: &str = "SATISFIED";
pub const LABEL_VIOLATED: &str = "VIOLATED";

pub const COLOR_UNSATISFIED: &str = "#d62728";
pub const COLOR_NO_DATA: &str = "#bdbdbd";
pub const COLOR_SATISFIED: &str = "#2ca02c";
/// Black diagonal stripes, defined as an SVG pattern by the renderer.
pub const FILL_OVERLAP: &str = "url(#overlap)";

/// Deterministic cycle of state colors, assigned by declaration order.
const STATE_PALETTE: [&str; 8] = [
    "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2", "#bcbd22",
];

/// A date × time-of-day matrix of categorical cells.
///
/// Columns are consecutive day-long chunks of the evaluation grid, labelled
/// with the local date of the chunk's first cell; rows are time-of-day slots
/// with 00:00 at the top. Cells are stored column-major (`column * rows +
/// row`); `None` marks matrix positions past the end of the grid, which are
/// not rendered and not counted.
#[derive(Debug, Clone, PartialEq)]
pub struct CarpetGrid {
    pub title: String,
    pub columns: Vec<NaiveDate>,
    pub rows: usize,
    pub row_labels: Vec<String>,
    pub cells: Vec<Option<String>>,
    /// (label, SVG fill) in rendering order.
    pub legend: Vec<(String, String)>,
    /// Cells whose local UTC offset differs from the run's first cell
    /// (DST transitions inside the evaluated range).
    pub offset_shifted_cells: usize,
}

impl CarpetGrid {
    pub fn cell(&self, column: usize, row: usize) -> Option<&str> {
        self.cells[column * self.rows + row].as_deref()
    }

    /// Cell counts per label, covering exactly the evaluation grid.
    pub fn category_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for cell in self.cells.iter().flatten() {
            *counts.entry(cell.clone()).or_insert(0) += 1;
        }
        counts
    }
}

/// Label of one cell in the states view.
fn state_label(active: &ActiveStates) -> String {
    match active {
        ActiveStates::NoData => LABEL_NO_DATA.to_string(),
        ActiveStates::Known(ids) => match ids.as_slice() {
            [] => LABEL_UNSATISFIED.to_string(),
            [single] => single.clone(),
            _ => LABEL_OVERLAP.to_string(),
        },
    }
}

fn verdict_label(t: TriState) -> String {
    match t {
        TriState::Satisfied => LABEL_SATISFIED.to_string(),
        TriState::Violated => LABEL_VIOLATED.to_string(),
        TriState::NoData => LABEL_NO_DATA.to_string(),
    }
}

/// Builds the carpet matrix for one evaluated state space.
pub fn build_carpet(
    result: &StateSpaceResult,
    kind: CarpetKind,
    zone: Tz,
) -> Result<CarpetGrid, ReportError> {
    let grid = result.verdict.grid();
    let step = grid.step_secs();
    if 86_400 % step != 0 {
        return Err(ReportError::StepBeyondDay { step_secs: step });
    }
    let rows = (86_400 / step) as usize;
    let n = grid.cell_count();
    let columns_n = n.div_ceil(rows);

    let mut columns = Vec::with_capacity(columns_n);
    for c in 0..columns_n {
        let local = grid.timestamp(c * rows).with_timezone(&zone);
        columns.push(local.date_naive());
    }

    let row_labels = (0..rows)
        .map(|r| {
            let s = r as u32 * step;
            format!("{:02}:{:02}", s / 3600, (s % 3600) / 60)
        })
        .collect();

    let mut cells = vec![None; columns_n * rows];
    for i in 0..n {
        let label = match kind {
            CarpetKind::States => state_label(&result.active[i]),
            CarpetKind::Verdict => verdict_label(result.verdict.get(i)),
        };
        cells[(i / rows) * rows + (i % rows)] = Some(label);
    }

    let legend = match kind {
        CarpetKind::States => {
            let mut legend: Vec<(String, String)> = result
                .per_state
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    (
                        s.state_id.clone(),
                        STATE_PALETTE[i % STATE_PALETTE.len()].to_string(),
                    )
                })
                .collect();
            legend.push((LABEL_UNSATISFIED.into(), COLOR_UNSATISFIED.into()));
            legend.push((LABEL_NO_DATA.into(), COLOR_NO_DATA.into()));
            legend.push((LABEL_OVERLAP.into(), FILL_OVERLAP.into()));
            legend
        }
        CarpetKind::Verdict => vec![
            (LABEL_SATISFIED.into(), COLOR_SATISFIED.into()),
            (LABEL_VIOLATED.into(), COLOR_UNSATISFIED.into()),
            (LABEL_NO_DATA.into(), COLOR_NO_DATA.into()),
        ],
    };

    let first_offset = *grid.timestamp(0).with_timezone(&zone).offset();
    let offset_shifted_cells = grid
        .timestamps()
        .filter(|t| t.with_timezone(&zone).offset() != &first_offset)
        .count();

    let what = match kind {
        CarpetKind::States => "states",
        CarpetKind::Verdict => "verdict",
    };
    Ok(CarpetGrid {
        title: format!("{} ({what})", result.statespace),
        columns,
        rows,
        row_labels,
        cells,
        legend,
        offset_shifted_cells,
    })
}

/// Preprocessing and reconciliation tallies carried into the summary.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunCounters {
    pub outlier_cells: usize,
    pub interpolated_cells: usize,
    pub rejected_rows: u64,
    pub marker_mismatches: usize,
    /// Cells whose local UTC offset differs from the run's first cell.
    pub offset_shifted_cells: usize,
}

/// Per-space tallies for one evaluation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub statespace: String,
    pub cells: usize,
    /// States-view categories (state id, UNSATISFIED, NO-DATA, OVERLAP).
    pub categories: BTreeMap<String, usize>,
    pub satisfied: usize,
    pub violated: usize,
    pub no_data: usize,
    pub counters: RunCounters,
}

/// Tallies one evaluated space together with the run counters.
pub fn summarize(result: &StateSpaceResult, counters: &RunCounters) -> Summary {
    let mut categories = BTreeMap::new();
    for active in &result.active {
        *categories.entry(state_label(active)).or_insert(0) += 1;
    }
    let (satisfied, violated, no_data) = result.verdict.counts();
    Summary {
        statespace: result.statespace.clone(),
        cells: result.verdict.grid().cell_count(),
        categories,
        satisfied,
        violated,
        no_data,
        counters: *counters,
    }
}

fn percent(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * count as f64 / total as f64
    }
}

impl Summary {
    /// Plain-text rendering; categories sorted by name.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "statespace {}: {} cells\n",
            self.statespace, self.cells
        ));
        out.push_str(&format!(
            "verdict: satisfied {} ({:.1}%), violated {} ({:.1}%), no-data {} ({:.1}%)\n",
            self.satisfied,
            percent(self.satisfied, self.cells),
            self.violated,
            percent(self.violated, self.cells),
            self.no_data,
            percent(self.no_data, self.cells),
        ));
        out.push_str("states:\n");
        for (label, count) in &self.categories {
            out.push_str(&format!(
                "  {label}: {count} ({:.1}%)\n",
                percent(*count, self.cells)
            ));
        }
        out.push_str(&format!(
            "marker mismatches: {}\n",
            self.counters.marker_mismatches
        ));
        out.push_str(&format!(
            "interpolated cells: {}\n",
            self.counters.interpolated_cells
        ));
        out.push_str(&format!("outlier cells: {}\n", self.counters.outlier_cells));
        out.push_str(&format!("rejected rows: {}\n", self.counters.rejected_rows));
        out.push_str(&format!(
            "offset-shifted cells: {}\n",
            self.counters.offset_shifted_cells
        ));
        out
    }

    /// `key,value` CSV rendering of the same numbers.
    pub fn to_kv_csv(&self) -> Vec<u8> {
        let mut out = String::from("key,value\n");
        out.push_str(&format!("statespace,{}\n", self.statespace));
        out.push_str(&format!("cells,{}\n", self.cells));
        out.push_str(&format!("verdict.satisfied,{}\n", self.satisfied));
        out.push_str(&format!("verdict.violated,{}\n", self.violated));
        out.push_str(&format!("verdict.no_data,{}\n", self.no_data));
        for (label, count) in &self.categories {
            out.push_str(&format!("states.{label},{count}\n"));
        }
        out.push_str(&format!(
            "marker_mismatches,{}\n",
            self.counters.marker_mismatches
        ));
        out.push_str(&format!(
            "interpolated_cells,{}\n",
            self.counters.interpolated_cells
        ));
        out.push_str(&format!("outlier_cells,{}\n", self.counters.outlier_cells));
        out.push_str(&format!("rejected_rows,{}\n", self.counters.rejected_rows));
        out.push_str(&format!(
            "offset_shifted_cells,{}\n",
            self.counters.offset_shifted_cells
        ));
        out.into_bytes()
    }
}
