//! `binrec`: recover binary sparse signals, certify uniqueness, count k-sets
//! and run phase-transition sweeps.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numerical failure,
//! 3 sweep finished with failed cells.

mod io;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use binrec::config::{canonical_json, load_config};
use binrec::experiment::{fit_report, level_set, run_sweep, transition_width, SweepMode};
use binrec::ksets::{count_ksets, estimate_expected_ksets, verify_theorem3, PointCloud, DEFAULT_SUBSET_CAP};
use binrec::par::{with_threads, Execution};
use binrec::plot::{render_svg, PlotSpec};
use binrec::randgen::DistributionSpec;
use binrec::recovery::{check_success, recover, Formulation, SparseBinarySignal};
use binrec::table::ResultsTable;
use binrec::uniqueness::{is_unique_solution, mangasarian_unique, optimal_face_is, GeneralLp, Verdict};
use binrec::SolverSettings;
use clap::{Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "binrec", version, about = "Binary k-sparse recovery by linear programming")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one recovery program and print the estimate as JSON.
    Recover {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        rhs: PathBuf,
        /// linf, l1box, nonneg, boxfeas or square.
        #[arg(long, default_value = "l1box")]
        formulation: Formulation,
        /// 0/1 vector to score the estimate against.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Decide whether the 0/1 vector with the given support is the unique
    /// optimum of the ℓ1 box program.
    Unique {
        #[arg(long)]
        matrix: PathBuf,
        /// Comma-separated indices of the ones, e.g. "0,3,5".
        #[arg(long)]
        support: String,
        /// Also run the direction-cone and optimal-face tests.
        #[arg(long)]
        all: bool,
    },
    /// Count k-sets of a point cloud, or estimate their expectation.
    Ksets {
        /// Points, one per row.
        #[arg(long, conflicts_with = "random", required_unless_present = "random")]
        cloud: Option<PathBuf>,
        /// Random clouds as columns of a matrix: DIST,m,n (e.g. D1,2,8).
        #[arg(long)]
        random: Option<String>,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Put the origin on the complement side.
        #[arg(long)]
        origin: bool,
        /// With --random: compare against the recovery probability.
        #[arg(long, requires = "random")]
        compare: bool,
        #[arg(long, default_value_t = DEFAULT_SUBSET_CAP)]
        cap: u128,
    },
    /// Run a sweep; writes DIR/results.csv and DIR/manifest.json.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (content never depends on this).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Level sets, transition points and the entropy fit of a results table.
    Report {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, default_value = "0.1,0.5,0.9")]
        levels: String,
        #[arg(long)]
        fit: bool,
        /// Output directory; defaults to the table's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw level sets as an SVG chart.
    Plot {
        #[arg(long)]
        table: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "0.1,0.5,0.9")]
        levels: String,
        /// Add the H(η)/2 curve.
        #[arg(long)]
        conjecture: bool,
        /// Add the k·log₂(n/k)/n curve.
        #[arg(long)]
        comparison: bool,
        #[arg(long)]
        title: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let numerical = e.chain().any(|c| c.downcast_ref::<binrec::Error>().is_some_and(|b| b.is_numerical()));
            ExitCode::from(if numerical { 2 } else { 1 })
        }
    }
}

fn run(command: Command) -> Result<u8> {
    let settings = SolverSettings::default();
    match command {
        Command::Recover { matrix, rhs, formulation, truth, tol } => {
            let a = io::read_matrix(&matrix)?;
            let b = io::read_vector(&rhs)?;
            let r = recover(formulation, &a, &b, &settings)?;
            let success = match truth {
                Some(path) => {
                    let t = SparseBinarySignal::from_vector(&io::read_vector(&path)?)?;
                    Some(r.is_optimal() && check_success(&r.x_hat, &t, tol))
                }
                None => None,
            };
            let record = json!({
                "formulation": formulation,
                "status": format!("{:?}", r.status),
                "x_hat": r.x_hat,
                "objective": r.objective,
                "auxiliary": r.auxiliary,
                "success": success,
            });
            println!("{record}");
        }
        Command::Unique { matrix, support, all } => {
            let a = io::read_matrix(&matrix)?;
            let truth = SparseBinarySignal::new(a.cols(), io::parse_index_list(&support)?)?;
            let mut record = match is_unique_solution(&a, &truth, &settings)? {
                Verdict::Unique(c) => json!({
                    "verdict": "Unique",
                    "certificate": { "normal": c.normal, "offset": c.offset, "margin": c.margin },
                }),
                Verdict::NotUnique(w) => json!({
                    "verdict": "NotUnique",
                    "witness": {
                        "j0": w.j0, "alpha0": w.alpha0, "alpha_origin": w.alpha_origin,
                        "j1": w.j1, "alpha1": w.alpha1,
                    },
                }),
            };
            if all {
                let x = truth.to_vector();
                let b = a.mul_vec(&x);
                record["mangasarian"] = json!(mangasarian_unique(&GeneralLp::l1_box(&a, &b)?, &x, &settings)?);
                record["optimal_face"] = json!(optimal_face_is(&a, &x, &settings)?);
            }
            println!("{record}");
        }
        Command::Ksets { cloud, random, k, trials, seed, origin, compare, cap } => {
            if let Some(path) = cloud {
                let points = io::read_rows(&path)?;
                let cloud = PointCloud::from_points(&points)?;
                let r = count_ksets(&cloud, k, origin, cap, &settings, Execution::Parallel)?;
                println!("{}", json!({ "n": r.n, "k": r.k, "count": r.count, "ratio": r.ratio, "origin": origin }));
            } else {
                let spec = random.expect("clap enforces --cloud or --random");
                let (dist, m, n) = parse_random(&spec)?;
                if compare {
                    let r = verify_theorem3(dist, m, n, k, trials, seed, &settings, Execution::Parallel)?;
                    println!("{}", serde_json::to_string(&r)?);
                } else {
                    let e =
                        estimate_expected_ksets(dist, m, n, k, trials, seed, origin, &settings, Execution::Parallel)?;
                    println!(
                        "{}",
                        json!({ "distribution": dist, "m": m, "n": n, "k": k, "origin": origin,
                                "count": e.count, "ratio": e.ratio })
                    );
                }
            }
        }
        Command::Sweep { config, out, jobs } => return sweep(&config, &out, jobs),
        Command::Report { table, levels, fit, out } => {
            let t = ResultsTable::read(&table)?;
            let levels = io::parse_levels(&levels)?;
            let dir = out.unwrap_or_else(|| table.parent().map(Path::to_path_buf).unwrap_or_default());
            report(&t, &levels, fit, &dir)?;
        }
        Command::Plot { table, out, levels, conjecture, comparison, title } => {
            let t = ResultsTable::read(&table)?;
            let spec = PlotSpec { levels: io::parse_levels(&levels)?, conjecture, comparison, title };
            fs::write(&out, render_svg(&t, &spec)?).with_context(|| format!("cannot write {}", out.display()))?;
        }
    }
    Ok(0)
}

fn parse_random(spec: &str) -> Result<(DistributionSpec, usize, usize)> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let [d, m, n] = parts[..] else { bail!("--random expects DIST,m,n, got `{spec}`") };
    Ok((d.parse()?, m.parse().context("m")?, n.parse().context("n")?))
}

fn sweep(config_path: &Path, out: &Path, jobs: Option<usize>) -> Result<u8> {
    let config = load_config(config_path)?;
    let started = Instant::now();
    let rows = with_threads(jobs, || run_sweep(&config, Execution::Parallel))??;
    let wall = started.elapsed().as_secs_f64();
    let table = ResultsTable::new(config, rows);
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))?;
    table.write(&out.join("results.csv"))?;
    let failed = table.rows.iter().filter(|r| r.error.is_some()).count();
    let manifest = json!({
        "tool_version": table.tool_version,
        "config_hash": table.config_hash,
        "base_seed": table.config.base_seed,
        "config": serde_json::from_str::<serde_json::Value>(&canonical_json(&table.config))?,
        "cells": table.rows.len(),
        "failed_cells": failed,
        "jobs": jobs,
        "wall_time_seconds": wall,
    });
    fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    eprintln!("{} cells, {failed} failed, {wall:.1}s", table.rows.len());
    Ok(if failed > 0 { 3 } else { 0 })
}

fn report(t: &ResultsTable, levels: &[f64], fit: bool, dir: &Path) -> Result<()> {
    let mode = t.config.mode;
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut level_csv = String::from("formulation,distribution,level,abscissa,ordinate,non_monotone\n");
    let mut width_csv = String::from("formulation,distribution,abscissa,width\n");
    let mut transitions = String::from("formulation,distribution,eta,delta_star\n");
    let mut fits = Vec::new();
    for (f, d) in t.slices() {
        let cells = t.slice(f, d);
        for &level in levels {
            let ls = level_set(&cells, mode, level)?;
            if let Some(notice) = &ls.notice {
                eprintln!("{f} {d} @ {level}: {notice}");
            }
            for p in &ls.points {
                level_csv.push_str(&format!("{f},{d},{level},{},{},{}\n", p.abscissa, p.ordinate, p.non_monotone));
            }
            if mode == SweepMode::EtaDelta && level == 0.5 {
                for p in &ls.points {
                    transitions.push_str(&format!("{f},{d},{},{}\n", p.abscissa, p.ordinate));
                }
            }
        }
        for (x, w) in transition_width(&cells, mode)? {
            width_csv.push_str(&format!("{f},{d},{x},{w}\n"));
        }
        if fit {
            if mode != SweepMode::EtaDelta {
                bail!("--fit needs an eta_delta table");
            }
            fits.push(json!({ "formulation": f, "distribution": d, "report": fit_report(&cells)? }));
        }
    }
    fs::write(dir.join("levels.csv"), level_csv)?;
    fs::write(dir.join("widths.csv"), width_csv)?;
    if mode == SweepMode::EtaDelta {
        fs::write(dir.join("transitions.csv"), transitions)?;
    }
    if fit {
        fs::write(dir.join("fit.json"), serde_json::to_string_pretty(&fits)? + "\n")?;
    }
    Ok(())
}
