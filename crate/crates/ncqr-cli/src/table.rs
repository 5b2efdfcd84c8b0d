//! CSV reading and writing for every artifact the commands exchange.
//!
//! All floats are written as `{:.16e}` (17 significant digits), which
//! round-trips every f64 exactly; re-reading an emitted file reconstructs
//! the same doubles bit for bit.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ncqr_core::induced::StageOneStats;
use ncqr_core::sampler::PosteriorDraws;
use ncqr_core::QuantileLevelGrid;

use crate::{CliError, CliResult};

pub const STATS_FILE: &str = "stage1_stats.csv";
pub const STANDARD_SURFACE_FILE: &str = "standard_surface.csv";
pub const ADJUSTED_SURFACE_FILE: &str = "adjusted_surface.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// A parsed numeric CSV: header names plus row-major values.
#[derive(Debug)]
pub struct NumericTable {
    pub headers: Vec<String>,
    pub rows: usize,
    pub cols: usize,
    values: Vec<f64>,
}

impl NumericTable {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i)[j]).collect()
    }
}

/// Read a CSV with a header row into an all-numeric table. Any cell that is
/// not a finite number is reported with its row and column.
pub fn read_numeric_csv(path: &Path) -> CliResult<NumericTable> {
    let file = File::open(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() {
        return Err(CliError::Data(format!("{}: no header row", path.display())));
    }
    let cols = headers.len();
    let mut values = Vec::new();
    let mut rows = 0usize;
    for (i, record) in reader.records().enumerate() {
        // Header is line 1, so data row i sits on line i + 2.
        let line = i + 2;
        let record =
            record.map_err(|e| CliError::Data(format!("{} line {line}: {e}", path.display())))?;
        if record.len() != cols {
            return Err(CliError::Data(format!(
                "{} line {line}: {} fields, header has {cols}",
                path.display(),
                record.len()
            )));
        }
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                CliError::Data(format!(
                    "{} line {line}, column \"{}\": \"{cell}\" is not a number",
                    path.display(),
                    headers[j]
                ))
            })?;
            if !v.is_finite() {
                return Err(CliError::Data(format!(
                    "{} line {line}, column \"{}\": non-finite value",
                    path.display(),
                    headers[j]
                )));
            }
            values.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(CliError::Data(format!("{}: no data rows", path.display())));
    }
    Ok(NumericTable {
        headers,
        rows,
        cols,
        values,
    })
}

/// Split a table into covariates and response. The response is the final
/// column unless `response` names another.
pub fn split_response(
    table: &NumericTable,
    response: Option<&str>,
) -> CliResult<(Vec<f64>, usize, Vec<f64>)> {
    if table.cols < 2 {
        return Err(CliError::Data(
            "need at least one covariate column and one response column".into(),
        ));
    }
    let y_col = match response {
        Some(name) => table.column_index(name).ok_or_else(|| {
            CliError::Config(format!(
                "response column \"{name}\" not found; header has {}",
                table.headers.join(", ")
            ))
        })?,
        None => table.cols - 1,
    };
    let mut x = Vec::with_capacity(table.rows * (table.cols - 1));
    let mut y = Vec::with_capacity(table.rows);
    for i in 0..table.rows {
        let row = table.row(i);
        for (j, &v) in row.iter().enumerate() {
            if j != y_col {
                x.push(v);
            }
        }
        y.push(row[y_col]);
    }
    Ok((x, table.cols - 1, y))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    let file = File::create(path)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(BufWriter::new(file))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> CliResult<()> {
    w.flush()
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

/// File name for the draws of one level, keyed by the level itself.
pub fn draws_file_name(p: f64) -> String {
    format!("draws_p{p:.6}.csv")
}

/// One row per retained draw: the coefficients, then the ALD scale.
pub fn write_draws_csv(path: &Path, draws: &PosteriorDraws) -> CliResult<()> {
    let mut w = create(path)?;
    let mut line = String::new();
    for j in 0..draws.num_coeffs {
        if j > 0 {
            line.push(',');
        }
        line.push_str(&format!("beta_{j}"));
    }
    line.push_str(",sigma");
    let io_err = |e: std::io::Error| CliError::Config(format!("cannot write {}: {e}", path.display()));
    writeln!(w, "{line}").map_err(io_err)?;
    let sigmas = draws.sigma_draws();
    for t in 0..draws.num_draws {
        line.clear();
        for &b in draws.beta_draw(t) {
            line.push_str(&format!("{b:.16e},"));
        }
        line.push_str(&format!("{:.16e}", sigmas[t]));
        writeln!(w, "{line}").map_err(io_err)?;
    }
    finish(w, path)
}

/// Persist the per-(point, level) induced moments, one row each. This file
/// is the complete stage-1 artifact: `adjust` rebuilds its inputs from it.
pub fn write_stats_csv(path: &Path, stats: &StageOneStats) -> CliResult<()> {
    let mut w = create(path)?;
    let io_err = |e: std::io::Error| CliError::Config(format!("cannot write {}: {e}", path.display()));
    writeln!(w, "x_id,p,num_draws,m_loc,m_scale,v_loc,v_scale,cov").map_err(io_err)?;
    let levels = stats.levels();
    let draws = stats.draws_per_level();
    for i in 0..stats.num_points() {
        for (j, &p) in levels.iter().enumerate() {
            let m = stats.moments_at(i, j);
            writeln!(
                w,
                "{i},{p:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                draws[j], m[0], m[1], m[2], m[3], m[4]
            )
            .map_err(io_err)?;
        }
    }
    finish(w, path)
}

/// Rebuild `StageOneStats` from the artifact `write_stats_csv` emitted.
/// Expects the same (point-major, level-minor) row order.
pub fn read_stats_csv(path: &Path) -> CliResult<StageOneStats> {
    let table = read_numeric_csv(path)?;
    let expect = ["x_id", "p", "num_draws", "m_loc", "m_scale", "v_loc", "v_scale", "cov"];
    if table.headers != expect {
        return Err(CliError::Data(format!(
            "{}: unexpected header {}, want {}",
            path.display(),
            table.headers.join(","),
            expect.join(",")
        )));
    }
    let mut levels: Vec<f64> = Vec::new();
    for i in 0..table.rows {
        if table.row(i)[0] != 0.0 {
            break;
        }
        levels.push(table.row(i)[1]);
    }
    let num_levels = levels.len();
    if num_levels == 0 || table.rows % num_levels != 0 {
        return Err(CliError::Data(format!(
            "{}: rows do not tile a (point x level) lattice",
            path.display()
        )));
    }
    let num_points = table.rows / num_levels;
    let mut draws_per_level = vec![0usize; num_levels];
    let mut moments = Vec::with_capacity(table.rows);
    for i in 0..num_points {
        for j in 0..num_levels {
            let row = table.row(i * num_levels + j);
            if row[0] != i as f64 || row[1] != levels[j] {
                return Err(CliError::Data(format!(
                    "{}: row order broken at point {i}, level {}",
                    path.display(),
                    levels[j]
                )));
            }
            let t = row[2] as usize;
            if t as f64 != row[2] {
                return Err(CliError::Data(format!(
                    "{}: non-integer draw count at point {i}",
                    path.display()
                )));
            }
            if i == 0 {
                draws_per_level[j] = t;
            } else if draws_per_level[j] != t {
                return Err(CliError::Data(format!(
                    "{}: draw count changes across points at level {}",
                    path.display(),
                    levels[j]
                )));
            }
            moments.push([row[3], row[4], row[5], row[6], row[7]]);
        }
    }
    StageOneStats::from_parts(levels, num_points, draws_per_level, moments).map_err(CliError::from)
}

/// Write a surface as one row per (point, level). `q_adjusted` and
/// `sigma_star_sq` columns appear only when an adjusted surface is given.
pub fn write_surface_csv(
    path: &Path,
    grid: &QuantileLevelGrid,
    num_points: usize,
    standard: &[f64],
    adjusted: Option<(&[f64], &[f64])>,
) -> CliResult<()> {
    let mut w = create(path)?;
    let io_err = |e: std::io::Error| CliError::Config(format!("cannot write {}: {e}", path.display()));
    match adjusted {
        Some(_) => writeln!(w, "x_id,tau,q_adjusted,q_standard,sigma_star_sq").map_err(io_err)?,
        None => writeln!(w, "x_id,tau,q_standard").map_err(io_err)?,
    }
    let levels = grid.levels();
    for i in 0..num_points {
        for (j, &tau) in levels.iter().enumerate() {
            let idx = i * levels.len() + j;
            match adjusted {
                Some((values, variances)) => writeln!(
                    w,
                    "{i},{tau:.16e},{:.16e},{:.16e},{:.16e}",
                    values[idx], standard[idx], variances[idx]
                )
                .map_err(io_err)?,
                None => {
                    writeln!(w, "{i},{tau:.16e},{:.16e}", standard[idx]).map_err(io_err)?
                }
            }
        }
    }
    finish(w, path)
}

/// A surface read back from CSV: the level grid, point count, and each
/// value column by name, in (point x level) row-major order.
pub struct SurfaceTable {
    pub levels: Vec<f64>,
    pub num_points: usize,
    pub columns: Vec<(String, Vec<f64>)>,
}

pub fn read_surface_csv(path: &Path) -> CliResult<SurfaceTable> {
    let table = read_numeric_csv(path)?;
    let (Some(0), Some(1)) = (table.column_index("x_id"), table.column_index("tau")) else {
        return Err(CliError::Data(format!(
            "{}: expected columns starting x_id,tau",
            path.display()
        )));
    };
    let mut levels: Vec<f64> = Vec::new();
    for i in 0..table.rows {
        if table.row(i)[0] != 0.0 {
            break;
        }
        levels.push(table.row(i)[1]);
    }
    if levels.is_empty() || table.rows % levels.len() != 0 {
        return Err(CliError::Data(format!(
            "{}: rows do not tile a (point x level) lattice",
            path.display()
        )));
    }
    let num_points = table.rows / levels.len();
    for i in 0..num_points {
        for (j, &tau) in levels.iter().enumerate() {
            let row = table.row(i * levels.len() + j);
            if row[0] != i as f64 || row[1] != tau {
                return Err(CliError::Data(format!(
                    "{}: row order broken at point {i}, level {tau}",
                    path.display()
                )));
            }
        }
    }
    let columns = (2..table.cols)
        .map(|j| (table.headers[j].clone(), table.column(j)))
        .collect();
    Ok(SurfaceTable {
        levels,
        num_points,
        columns,
    })
}

/// Write a generated dataset: covariate columns, then the response.
pub fn write_dataset_csv(path: &Path, x: &[f64], num_covariates: usize, y: &[f64]) -> CliResult<()> {
    let mut w = create(path)?;
    let io_err = |e: std::io::Error| CliError::Config(format!("cannot write {}: {e}", path.display()));
    let mut line = String::new();
    for j in 0..num_covariates {
        line.push_str(&format!("x_{},", j + 1));
    }
    line.push('y');
    writeln!(w, "{line}").map_err(io_err)?;
    for (i, &yi) in y.iter().enumerate() {
        line.clear();
        for j in 0..num_covariates {
            line.push_str(&format!("{:.16e},", x[i * num_covariates + j]));
        }
        line.push_str(&format!("{yi:.16e}"));
        writeln!(w, "{line}").map_err(io_err)?;
    }
    finish(w, path)
}
