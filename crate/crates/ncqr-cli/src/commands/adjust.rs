//! `adjust`: read the stage-1 artifact a `fit` run wrote and produce a
//! non-crossing surface, either at a fixed bandwidth or at the smallest
//! bandwidth the search finds.

use std::fs;
use std::time::Instant;

use ncqr_core::gp_adjust::{adjust_surface, detect_crossing, search_min_bandwidth};

use crate::args::AdjustArgs;
use crate::commands::elapsed_ms;
use crate::config::{self, FileConfig, DEFAULT_CROSSING_TOL};
use crate::manifest::RunManifest;
use crate::table;
use crate::{CliError, CliResult};

pub fn run(args: &AdjustArgs) -> CliResult<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let template = config::gp_template(&file, args.mode.as_deref())?;
    let fixed_b = args.fixed_b.or(file.fixed_b);
    let out = config::resolve_out(args.out.as_ref(), &file)?;
    let tol = file.crossing_tol.unwrap_or(DEFAULT_CROSSING_TOL);

    let stats_path = args.artifacts.join(table::STATS_FILE);
    let stats = table::read_stats_csv(&stats_path)?;

    if let Some(grid_text) = args.grid.as_deref().or(file.grid.as_deref()) {
        let expected = config::parse_grid(grid_text)?;
        let found = stats.levels();
        let matches = expected.len() == found.len()
            && expected
                .levels()
                .iter()
                .zip(found)
                .all(|(a, b)| (a - b).abs() <= 1e-12);
        if !matches {
            return Err(CliError::Config(format!(
                "grid mismatch: {} holds {} levels that differ from the requested \"{grid_text}\"",
                stats_path.display(),
                found.len()
            )));
        }
    }

    let standard = stats.standard_surface();
    let before = detect_crossing(stats.levels(), stats.num_points(), &standard, tol).len();

    let t_adjust = Instant::now();
    let (bandwidth, surface) = match fixed_b {
        Some(b) => {
            let mut cfg = template;
            cfg.bandwidth = b;
            (b, adjust_surface(&stats, &cfg)?)
        }
        None => search_min_bandwidth(&stats, &template)?,
    };
    let adjust_ms = elapsed_ms(t_adjust);
    let after = surface.detect_crossing(tol).len();

    fs::create_dir_all(&out)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", out.display())))?;
    table::write_surface_csv(
        &out.join(table::ADJUSTED_SURFACE_FILE),
        &surface.grid,
        surface.num_points,
        &standard,
        Some((surface.values(), surface.variances())),
    )?;

    let echo = serde_json::json!({
        "artifacts": args.artifacts.display().to_string(),
        "mode": config::mode_name(template.mode),
        "sigma_k_sq": template.sigma_k_sq,
        "jitter": template.jitter,
        "fixed_b": fixed_b,
        "num_levels": stats.levels().len(),
        "num_points": stats.num_points(),
        "crossing_tol": tol,
    });
    let mut manifest = RunManifest::new("adjust", echo);
    manifest.fitted_bandwidth = Some(bandwidth);
    manifest.crossings_before = Some(before);
    manifest.crossings_after = Some(after);
    manifest.timings_ms.insert("adjust".into(), adjust_ms);
    manifest.write(&out.join(table::MANIFEST_FILE))?;

    println!(
        "bandwidth {bandwidth:.6e}; crossing violations {before} before, {after} after; surface in {}",
        out.display()
    );
    Ok(())
}
