use super::{evaluate, Cell, ComparisonTable, EvalError, EvalReport, LearnedEstimator};
use crate::dataset::{DifficultyLevel, RotatedSample};
use crate::regressor::{build_model, prepare_examples, train, BackboneSpec, HeadSpec, LossKind, Predictor, TrainConfig};
use std::collections::HashMap;

/// Shared splits every grid cell trains and tests on.
#[derive(Debug, Clone)]
pub struct AblationData {
    pub train: Vec<RotatedSample>,
    pub val: Vec<RotatedSample>,
    pub test: Vec<RotatedSample>,
}

#[derive(Debug, Clone)]
pub struct AblationOutcome {
    /// Rows are backbones, columns are losses.
    pub table: ComparisonTable,
    /// Test reports in grid order; `None` where the cell failed.
    pub reports: Vec<Option<EvalReport>>,
}

fn run_cell(
    backbone: &BackboneSpec,
    loss: LossKind,
    level: DifficultyLevel,
    data: &AblationData,
    cfg: &TrainConfig,
    cache: &mut HashMap<(u32, u32), [Vec<crate::regressor::Example>; 2]>,
) -> Result<EvalReport, String> {
    let cfg = TrainConfig { level, loss, ..cfg.clone() };
    let mut model = build_model(backbone, &HeadSpec::for_level(level), cfg.seed).map_err(|e| e.to_string())?;
    let [tr, va] = cache
        .entry(backbone.input_size)
        .or_insert_with(|| [prepare_examples(&data.train, backbone.input_size), prepare_examples(&data.val, backbone.input_size)]);
    train(&mut model, &cfg, tr, va).map_err(|e| e.to_string())?;
    let est = LearnedEstimator { predictor: Predictor::new(model, level) };
    let mut report = evaluate(&est, &data.test).map_err(|e| e.to_string())?;
    report.method = format!("{}/{}", backbone.name, loss);
    Ok(report)
}

/// Trains every `(backbone, loss)` pair with the same seed and data and
/// tabulates test MAE. A cell that fails to build or train is marked
/// failed; the rest of the grid still runs.
pub fn run_ablation(
    grid: &[(BackboneSpec, LossKind)],
    level: DifficultyLevel,
    data: &AblationData,
    cfg: &TrainConfig,
) -> Result<AblationOutcome, EvalError> {
    if grid.is_empty() {
        return Err(EvalError::InvalidArgument("empty ablation grid".into()));
    }
    if data.test.is_empty() {
        return Err(EvalError::InvalidArgument("empty test split".into()));
    }
    let mut rows: Vec<String> = Vec::new();
    let mut columns: Vec<String> = Vec::new();
    for (b, l) in grid {
        let (r, c) = (b.name.to_string(), l.to_string());
        if grid.iter().filter(|(b2, l2)| b2.name == b.name && l2 == l).count() > 1 {
            return Err(EvalError::InvalidArgument(format!("duplicate grid cell {r}/{c}")));
        }
        if !rows.contains(&r) {
            rows.push(r);
        }
        if !columns.contains(&c) {
            columns.push(c);
        }
    }

    let mut cells = vec![vec![Cell::Absent; columns.len()]; rows.len()];
    let mut reports = Vec::with_capacity(grid.len());
    let mut cache = HashMap::new();
    for (backbone, loss) in grid {
        let r = rows.iter().position(|x| *x == backbone.name.to_string()).expect("row exists");
        let c = columns.iter().position(|x| *x == loss.to_string()).expect("column exists");
        match run_cell(backbone, *loss, level, data, cfg, &mut cache) {
            Ok(report) => {
                cells[r][c] = match report.mae {
                    Some(m) => Cell::Value(m),
                    None => Cell::Failed("every prediction failed".into()),
                };
                reports.push(Some(report));
            }
            Err(msg) => {
                cells[r][c] = Cell::Failed(msg);
                reports.push(None);
            }
        }
    }
    Ok(AblationOutcome { table: ComparisonTable { corner: "backbone".into(), rows, columns, cells }, reports })
}
