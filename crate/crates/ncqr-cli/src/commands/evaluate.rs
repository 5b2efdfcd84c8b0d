//! `evaluate`: audit an emitted surface CSV on its own. Re-runs crossing
//! detection on every quantile column, and when the generating design and
//! dataset are supplied, scores each column against the exact quantiles.

use std::fs;

use ncqr_core::gp_adjust::detect_crossing;
use ncqr_core::simulate::{rmise, SimulationDesign};

use crate::args::EvaluateArgs;
use crate::table;
use crate::{CliError, CliResult};

pub fn run(args: &EvaluateArgs) -> CliResult<()> {
    if !(args.tol >= 0.0) || !args.tol.is_finite() {
        return Err(CliError::Config("tol must be a nonnegative number".into()));
    }
    let surface = table::read_surface_csv(&args.surface)?;
    let quantile_columns: Vec<&(String, Vec<f64>)> = surface
        .columns
        .iter()
        .filter(|(name, _)| name.starts_with("q_"))
        .collect();
    if quantile_columns.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no quantile columns (names starting \"q_\")",
            args.surface.display()
        )));
    }

    let truth = match (args.design, args.data.as_ref()) {
        (Some(id), Some(data_path)) => {
            let design = SimulationDesign::from_id(id)?;
            let data = table::read_numeric_csv(data_path)?;
            let (x, k, _y) = table::split_response(&data, None)?;
            if k != design.num_covariates() {
                return Err(CliError::Data(format!(
                    "design {id} has {} covariates, {} has {k}",
                    design.num_covariates(),
                    data_path.display()
                )));
            }
            if data.rows != surface.num_points {
                return Err(CliError::Data(format!(
                    "surface has {} points, {} has {} rows",
                    surface.num_points,
                    data_path.display(),
                    data.rows
                )));
            }
            let mut values = vec![0.0; surface.num_points * surface.levels.len()];
            for i in 0..surface.num_points {
                for (j, &tau) in surface.levels.iter().enumerate() {
                    values[i * surface.levels.len() + j] =
                        design.true_quantile(&x[i * k..(i + 1) * k], tau)?;
                }
            }
            Some(values)
        }
        (None, None) => None,
        _ => {
            return Err(CliError::Config(
                "truth evaluation needs both --design and --data".into(),
            ))
        }
    };

    let mut columns = serde_json::Map::new();
    for (name, values) in &quantile_columns {
        let violations =
            detect_crossing(&surface.levels, surface.num_points, values, args.tol);
        let mut entry = serde_json::Map::new();
        entry.insert(
            "crossing_violations".into(),
            serde_json::json!(violations.len()),
        );
        if let Some(worst) = violations
            .iter()
            .max_by(|a, b| a.gap.total_cmp(&b.gap))
        {
            entry.insert(
                "worst_violation".into(),
                serde_json::json!({
                    "x_id": worst.point,
                    "lower_tau": worst.lower_level,
                    "upper_tau": worst.upper_level,
                    "gap": worst.gap,
                }),
            );
        }
        if let Some(truth) = &truth {
            let p = surface.levels.len();
            let mut per_tau = Vec::with_capacity(p);
            let mut t_col = vec![0.0; surface.num_points];
            let mut e_col = vec![0.0; surface.num_points];
            for j in 0..p {
                for i in 0..surface.num_points {
                    t_col[i] = truth[i * p + j];
                    e_col[i] = values[i * p + j];
                }
                per_tau.push(rmise(&t_col, &e_col)?);
            }
            let mean = per_tau.iter().sum::<f64>() / p as f64;
            entry.insert("rmise_per_tau".into(), serde_json::json!(per_tau));
            entry.insert("mean_rmise".into(), serde_json::json!(mean));
        }
        columns.insert(name.clone(), serde_json::Value::Object(entry));
    }

    let report = serde_json::json!({
        "surface": args.surface.display().to_string(),
        "tol": args.tol,
        "num_levels": surface.levels.len(),
        "num_points": surface.num_points,
        "columns": columns,
    });
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| CliError::Config(format!("report serialization: {e}")))?;
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir)
                .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
            let path = dir.join("evaluation.json");
            fs::write(&path, text.as_bytes())
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
            println!("evaluation in {}", path.display());
        }
        None => println!("{text}"),
    }
    Ok(())
}
