//! `simulate`: replicate studies on the built-in designs. Each replicate
//! generates a dataset, runs the full two-stage pipeline, and scores both
//! estimators against the design's exact quantile function.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use ncqr_core::basis::{build_design, BasisSpec};
use ncqr_core::gp_adjust::{
    adjust_surface, detect_crossing, search_min_bandwidth, CrossingViolation, GpConfig,
};
use ncqr_core::induced::StageOneStats;
use ncqr_core::sampler::{fit_all_levels, SamplerConfig};
use ncqr_core::simulate::{rmise, SimulationDesign};
use ncqr_core::{derive_seed, QuantileLevelGrid};
use rayon::prelude::*;

use crate::args::SimulateArgs;
use crate::commands::elapsed_ms;
use crate::config::{self, FileConfig, DEFAULT_CROSSING_TOL};
use crate::manifest::RunManifest;
use crate::table;
use crate::{CliError, CliResult};

struct Replicate {
    seed: u64,
    bandwidth: f64,
    crossings_standard: usize,
    crossings_adjusted: usize,
    /// Per level-pair flags: did any point invert between level j and j+1?
    /// The final level has no upper neighbor, so its flag stays false.
    pair_crossed_standard: Vec<bool>,
    pair_crossed_adjusted: Vec<bool>,
    rmise_standard: Vec<f64>,
    rmise_adjusted: Vec<f64>,
}

struct Study<'a> {
    design: SimulationDesign,
    n: usize,
    grid: &'a QuantileLevelGrid,
    basis: &'a BasisSpec,
    sampler: &'a SamplerConfig,
    template: &'a GpConfig,
    fixed_b: Option<f64>,
    tol: f64,
    base_seed: u64,
    emit_data: bool,
    out: &'a Path,
}

fn pair_flags(levels: &[f64], violations: &[CrossingViolation]) -> Vec<bool> {
    let mut flags = vec![false; levels.len()];
    for v in violations {
        // Violations carry the exact level values they were scanned from.
        if let Some(j) = levels.iter().position(|&l| l == v.lower_level) {
            flags[j] = true;
        }
    }
    flags
}

fn run_replicate(study: &Study, r: usize) -> CliResult<Replicate> {
    let seed = derive_seed(study.base_seed, r as u64);
    let data = study.design.generate(study.n, seed)?;
    if study.emit_data {
        let name = format!("data_rep{r:03}.csv");
        table::write_dataset_csv(&study.out.join(name), &data.x, data.num_covariates, &data.y)?;
    }
    let dm = build_design(&data.x, data.num_covariates, study.basis)?;
    let mut sampler = study.sampler.clone();
    sampler.seed = derive_seed(seed, 1);
    let fits = fit_all_levels(&dm, &data.y, study.grid, &sampler)?;
    let stats = StageOneStats::build(&fits, dm.values())?;

    let levels = study.grid.levels();
    let standard = stats.standard_surface();
    let viols_std = detect_crossing(levels, stats.num_points(), &standard, study.tol);
    let (bandwidth, surface) = match study.fixed_b {
        Some(b) => {
            let mut cfg = *study.template;
            cfg.bandwidth = b;
            (b, adjust_surface(&stats, &cfg)?)
        }
        None => search_min_bandwidth(&stats, study.template)?,
    };
    let viols_adj = surface.detect_crossing(study.tol);

    let k = data.num_covariates;
    let mut truth = vec![0.0; study.n];
    let mut column = vec![0.0; study.n];
    let mut rmise_standard = Vec::with_capacity(levels.len());
    let mut rmise_adjusted = Vec::with_capacity(levels.len());
    for (j, &tau) in levels.iter().enumerate() {
        for i in 0..study.n {
            truth[i] = study.design.true_quantile(&data.x[i * k..(i + 1) * k], tau)?;
        }
        for i in 0..study.n {
            column[i] = standard[i * levels.len() + j];
        }
        rmise_standard.push(rmise(&truth, &column)?);
        for i in 0..study.n {
            column[i] = surface.value(i, j);
        }
        rmise_adjusted.push(rmise(&truth, &column)?);
    }

    Ok(Replicate {
        seed,
        bandwidth,
        crossings_standard: viols_std.len(),
        crossings_adjusted: viols_adj.len(),
        pair_crossed_standard: pair_flags(levels, &viols_std),
        pair_crossed_adjusted: pair_flags(levels, &viols_adj),
        rmise_standard,
        rmise_adjusted,
    })
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

pub fn run(args: &SimulateArgs) -> CliResult<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let design_id = args.design.or(file.design).ok_or_else(|| {
        CliError::Config("no design: pass --design or set \"design\" in the config".into())
    })?;
    let design = SimulationDesign::from_id(design_id)?;
    let replicates = args.replicates.or(file.replicates).unwrap_or(1);
    if replicates == 0 {
        return Err(CliError::Config("replicates must be at least 1".into()));
    }
    let n = args.n.or(file.n).unwrap_or(100);
    let grid = config::resolve_grid(args.grid.as_deref(), &file)?;
    let basis = config::resolve_basis(args.basis.as_deref(), &file)?;
    let sampler = config::sampler_config(&file, args.seed);
    let template = config::gp_template(&file, args.mode.as_deref())?;
    let fixed_b = args.fixed_b.or(file.fixed_b);
    let out = config::resolve_out(args.out.as_ref(), &file)?;
    let tol = file.crossing_tol.unwrap_or(DEFAULT_CROSSING_TOL);

    fs::create_dir_all(&out)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", out.display())))?;

    let study = Study {
        design,
        n,
        grid: &grid,
        basis: &basis,
        sampler: &sampler,
        template: &template,
        fixed_b,
        tol,
        base_seed: sampler.seed,
        emit_data: args.emit_data,
        out: &out,
    };

    let t_run = Instant::now();
    let reps: Vec<Replicate> = (0..replicates)
        .into_par_iter()
        .map(|r| run_replicate(&study, r))
        .collect::<CliResult<Vec<_>>>()?;
    let run_ms = elapsed_ms(t_run);

    let levels = grid.levels();
    let io_err = |e: std::io::Error| CliError::Config(format!("write under {}: {e}", out.display()));

    let mut w = fs::File::create(out.join("replicate_rmise.csv"))
        .map(std::io::BufWriter::new)
        .map_err(io_err)?;
    writeln!(w, "replicate,tau,rmise_standard,rmise_adjusted").map_err(io_err)?;
    for (r, rep) in reps.iter().enumerate() {
        for (j, &tau) in levels.iter().enumerate() {
            writeln!(
                w,
                "{r},{tau:.16e},{:.16e},{:.16e}",
                rep.rmise_standard[j], rep.rmise_adjusted[j]
            )
            .map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)?;

    let mut w = fs::File::create(out.join("replicate_summary.csv"))
        .map(std::io::BufWriter::new)
        .map_err(io_err)?;
    writeln!(
        w,
        "replicate,seed,fitted_b,crossings_standard,crossings_adjusted"
    )
    .map_err(io_err)?;
    for (r, rep) in reps.iter().enumerate() {
        writeln!(
            w,
            "{r},{},{:.16e},{},{}",
            rep.seed, rep.bandwidth, rep.crossings_standard, rep.crossings_adjusted
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;

    // Crossing frequency at row tau_j counts replicates where the pair
    // (tau_j, tau_{j+1}) inverted somewhere; the last row is always 0.
    let mut w = fs::File::create(out.join("summary.csv"))
        .map(std::io::BufWriter::new)
        .map_err(io_err)?;
    writeln!(
        w,
        "tau,avg_rmise_standard,avg_rmise_adjusted,crossing_freq_standard,crossing_freq_adjusted"
    )
    .map_err(io_err)?;
    let r_count = reps.len() as f64;
    for (j, &tau) in levels.iter().enumerate() {
        let avg_std: f64 = reps.iter().map(|r| r.rmise_standard[j]).sum::<f64>() / r_count;
        let avg_adj: f64 = reps.iter().map(|r| r.rmise_adjusted[j]).sum::<f64>() / r_count;
        let freq_std =
            reps.iter().filter(|r| r.pair_crossed_standard[j]).count() as f64 / r_count;
        let freq_adj =
            reps.iter().filter(|r| r.pair_crossed_adjusted[j]).count() as f64 / r_count;
        writeln!(
            w,
            "{tau:.16e},{avg_std:.16e},{avg_adj:.16e},{freq_std:.16e},{freq_adj:.16e}"
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;

    let crossed_before = reps.iter().filter(|r| r.crossings_standard > 0).count();
    let crossed_after = reps.iter().filter(|r| r.crossings_adjusted > 0).count();
    let median_b = median(reps.iter().map(|r| r.bandwidth).collect());

    let echo = serde_json::json!({
        "design": design_id,
        "replicates": replicates,
        "n": n,
        "basis": args.basis.as_deref().or(file.basis.as_deref()).unwrap_or("linear"),
        "grid": args.grid.as_deref().or(file.grid.as_deref()).unwrap_or(config::DEFAULT_GRID),
        "num_levels": grid.len(),
        "mode": config::mode_name(template.mode),
        "sigma_k_sq": template.sigma_k_sq,
        "jitter": template.jitter,
        "fixed_b": fixed_b,
        "total_iterations": sampler.total_iterations,
        "burn_in": sampler.burn_in,
        "thin": sampler.thin,
        "crossing_tol": tol,
    });
    let mut manifest = RunManifest::new("simulate", echo);
    manifest.seed = Some(sampler.seed);
    manifest.fitted_bandwidth = Some(median_b);
    manifest.crossings_before = Some(crossed_before);
    manifest.crossings_after = Some(crossed_after);
    manifest.timings_ms.insert("replicates".into(), run_ms);
    manifest.write(&out.join(table::MANIFEST_FILE))?;

    println!(
        "design {design_id}: {replicates} replicates; {crossed_before} crossed before adjustment, \
         {crossed_after} after; median bandwidth {median_b:.6e}; results in {}",
        out.display()
    );
    Ok(())
}
