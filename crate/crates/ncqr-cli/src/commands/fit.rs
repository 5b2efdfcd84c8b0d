//! `fit`: per-level MCMC on a CSV dataset. Persists one draw file per
//! level, the induced-moment artifact that `adjust` consumes, and the
//! unadjusted (standard) surface with its crossing count.

use std::fs;
use std::time::Instant;

use ncqr_core::basis::build_design;
use ncqr_core::gp_adjust::detect_crossing;
use ncqr_core::induced::StageOneStats;
use ncqr_core::sampler::fit_all_levels;

use crate::args::FitArgs;
use crate::commands::elapsed_ms;
use crate::config::{self, FileConfig, DEFAULT_CROSSING_TOL};
use crate::manifest::RunManifest;
use crate::table;
use crate::{CliError, CliResult};

pub fn run(args: &FitArgs) -> CliResult<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let grid = config::resolve_grid(args.grid.as_deref(), &file)?;
    let basis = config::resolve_basis(args.basis.as_deref(), &file)?;
    let sampler_cfg = config::sampler_config(&file, args.seed);
    let out = config::resolve_out(args.out.as_ref(), &file)?;
    let response = args.response.as_deref().or(file.response.as_deref());
    let tol = file.crossing_tol.unwrap_or(DEFAULT_CROSSING_TOL);

    let table_in = table::read_numeric_csv(&args.data)?;
    let (x, num_covariates, y) = table::split_response(&table_in, response)?;
    let design = build_design(&x, num_covariates, &basis)?;

    let t_fit = Instant::now();
    let fits = fit_all_levels(&design, &y, &grid, &sampler_cfg)?;
    let fit_ms = elapsed_ms(t_fit);
    let stats = StageOneStats::build(&fits, design.values())?;

    fs::create_dir_all(&out)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", out.display())))?;
    for (j, draws) in fits.iter().enumerate() {
        let name = table::draws_file_name(grid.levels()[j]);
        table::write_draws_csv(&out.join(name), draws)?;
    }
    table::write_stats_csv(&out.join(table::STATS_FILE), &stats)?;

    let standard = stats.standard_surface();
    let crossings = detect_crossing(grid.levels(), stats.num_points(), &standard, tol).len();
    table::write_surface_csv(
        &out.join(table::STANDARD_SURFACE_FILE),
        &grid,
        stats.num_points(),
        &standard,
        None,
    )?;

    let echo = serde_json::json!({
        "input": args.data.display().to_string(),
        "response": response,
        "num_rows": design.rows,
        "basis": args.basis.as_deref().or(file.basis.as_deref()).unwrap_or("linear"),
        "num_levels": grid.len(),
        "grid": args.grid.as_deref().or(file.grid.as_deref()).unwrap_or(config::DEFAULT_GRID),
        "total_iterations": sampler_cfg.total_iterations,
        "burn_in": sampler_cfg.burn_in,
        "thin": sampler_cfg.thin,
        "beta_prior_sd": sampler_cfg.beta_prior_sd,
        "sigma_prior_shape": sampler_cfg.sigma_prior_shape,
        "sigma_prior_rate": sampler_cfg.sigma_prior_rate,
        "crossing_tol": tol,
    });
    let mut manifest = RunManifest::new("fit", echo);
    manifest.seed = Some(sampler_cfg.seed);
    manifest.crossings_before = Some(crossings);
    manifest.timings_ms.insert("fit".into(), fit_ms);
    manifest.write(&out.join(table::MANIFEST_FILE))?;

    println!(
        "fitted {} levels x {} points; {} crossing violations in the standard surface; artifacts in {}",
        grid.len(),
        stats.num_points(),
        crossings,
        out.display()
    );
    Ok(())
}
