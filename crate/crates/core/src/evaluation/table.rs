use super::{EvalError, EvalReport};
use crate::classical::ClassicalMethod;
use crate::dataset::DifficultyLevel;
use std::collections::HashSet;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    /// MAE in degrees.
    Value(f64),
    /// No result: the method does not apply, or was not run.
    Absent,
    Failed(String),
}

impl Cell {
    pub fn value(&self) -> Option<f64> {
        match self {
            Cell::Value(v) => Some(*v),
            _ => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Value(v) => format!("{v:.2}"),
            Cell::Absent => "-".into(),
            Cell::Failed(_) => "failed".into(),
        }
    }
}

/// A labelled grid of MAE cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    /// Header of the row-label column.
    pub corner: String,
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    /// `cells[row][column]`.
    pub cells: Vec<Vec<Cell>>,
}

impl ComparisonTable {
    pub fn cell(&self, row: &str, column: &str) -> Option<&Cell> {
        let r = self.rows.iter().position(|x| x == row)?;
        let c = self.columns.iter().position(|x| x == column)?;
        Some(&self.cells[r][c])
    }

    /// Aligned plain text, `-` for absent cells.
    pub fn to_text(&self) -> String {
        let mut grid = vec![std::iter::once(self.corner.clone()).chain(self.columns.iter().cloned()).collect::<Vec<_>>()];
        for (label, row) in self.rows.iter().zip(&self.cells) {
            grid.push(std::iter::once(label.clone()).chain(row.iter().map(Cell::render)).collect());
        }
        let widths: Vec<usize> =
            (0..grid[0].len()).map(|c| grid.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for row in &grid {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (s, w))| if i == 0 { format!("{s:<w$}") } else { format!("{s:>w$}") })
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }

    /// CSV with a header row; absent cells are empty.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header = std::iter::once(self.corner.as_str()).chain(self.columns.iter().map(String::as_str));
        w.write_record(header).expect("in-memory write");
        for (label, row) in self.rows.iter().zip(&self.cells) {
            let fields = std::iter::once(label.clone()).chain(row.iter().map(|c| match c {
                Cell::Value(v) => format!("{v:.4}"),
                Cell::Absent => String::new(),
                Cell::Failed(_) => "failed".into(),
            }));
            w.write_record(fields).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush to vec")).expect("utf-8 fields")
    }
}

/// Table column for a method name. Learned models share the `OAD` column;
/// their level is the row.
pub fn method_column(method: &str) -> String {
    if method.starts_with("OAD-") {
        "OAD".into()
    } else {
        method.to_string()
    }
}

fn column_rank(column: &str) -> usize {
    if column == "OAD" {
        return 0;
    }
    ClassicalMethod::ALL.iter().position(|m| m.as_str() == column).map_or(usize::MAX, |i| i + 1)
}

/// Arranges reports with levels as rows and methods as columns.
pub fn compare(reports: &[EvalReport]) -> Result<ComparisonTable, EvalError> {
    if reports.is_empty() {
        return Err(EvalError::InvalidArgument("no reports to compare".into()));
    }
    let mut seen = HashSet::new();
    let mut columns: Vec<String> = Vec::new();
    for r in reports {
        let col = method_column(&r.method);
        if !seen.insert((col.clone(), r.level)) {
            return Err(EvalError::InvalidArgument(format!("duplicate report for {} at {}", r.method, r.level)));
        }
        if !columns.contains(&col) {
            columns.push(col);
        }
    }
    // stable: known methods first in canonical order, others as they came
    columns.sort_by_key(|c| column_rank(c));

    let levels: Vec<DifficultyLevel> =
        DifficultyLevel::ALL.iter().copied().filter(|l| reports.iter().any(|r| r.level == *l)).collect();
    let cells = levels
        .iter()
        .map(|&level| {
            columns
                .iter()
                .map(|col| {
                    match reports.iter().find(|r| r.level == level && &method_column(&r.method) == col) {
                        None => Cell::Absent,
                        Some(r) => match r.mae {
                            Some(m) => Cell::Value(m),
                            None => Cell::Failed(format!("all {} samples failed", r.failures())),
                        },
                    }
                })
                .collect()
        })
        .collect();
    Ok(ComparisonTable {
        corner: "level".into(),
        rows: levels.iter().map(|l| l.to_string()).collect(),
        columns,
        cells,
    })
}
