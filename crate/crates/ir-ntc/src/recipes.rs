//! Named presets that regenerate the reference tables and curve data.
//!
//! A preset is a list of sub-tasks. Each sub-task is one or more
//! subcommand invocations whose tables are concatenated into one CSV.
//! Sub-tasks run on the rayon pool; a failing sub-task is recorded in the
//! manifest and does not stop the others.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Parser;
use rayon::prelude::*;
use serde::Serialize;

use crate::commands::{run_table, Cli, Command, RecipeArgs};
use crate::table::Table;

pub const PRESETS: [&str; 10] = [
    "table1", "table2", "table3", "fig1", "fig2", "fig4", "fig9", "fig11", "fig12", "fig13",
];

/// Reference non-uniform `m = 5` schedules at 2 dB.
pub const NONUNIFORM_SCHEDULES: [(u32, [u32; 5]); 5] = [
    (16, [19, 4, 4, 4, 8]),
    (32, [38, 8, 8, 8, 12]),
    (64, [85, 12, 8, 12, 16]),
    (128, [176, 14, 14, 14, 28]),
    (256, [352, 24, 24, 24, 48]),
];

/// Reference uniform `(n1, I)` pairs for `m = 5` at 2 dB.
pub const UNIFORM_PAIRS: [(u32, u32, u32); 5] = [
    (16, 17, 6),
    (32, 39, 8),
    (64, 83, 12),
    (128, 172, 18),
    (256, 353, 26),
];

const TABLE_KS: &str = "16,32,64,128,256";
const BSC: &str = "bsc:0.0789";
const AWGN: &str = "awgn:2";

#[derive(Clone, Debug, PartialEq)]
pub struct SubTask {
    pub file: String,
    /// Subcommand argument lists, without the program name.
    pub invocations: Vec<Vec<String>>,
}

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

fn task(file: &str, invocations: &[String]) -> SubTask {
    SubTask {
        file: file.to_string(),
        invocations: invocations.iter().map(|s| words(s)).collect(),
    }
}

fn joined(xs: &[u32]) -> String {
    xs.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

fn is_stochastic(argv: &[String]) -> bool {
    argv.first().is_some_and(|c| c == "simulate")
        || argv.windows(2).any(|w| w[0] == "--kind" && w[1] == "dt")
}

/// Expands a preset. Monte-Carlo invocations get `--seed` (and `--trials`
/// when given) appended.
pub fn preset(name: &str, seed: u64, trials: Option<u64>) -> Result<Vec<SubTask>> {
    let per_schedule = |f: &dyn Fn(u32, &[u32]) -> String| -> Vec<String> {
        NONUNIFORM_SCHEDULES
            .iter()
            .map(|(k, inc)| f(*k, inc))
            .collect()
    };
    let mut tasks = match name {
        "table1" => vec![task("table1.csv", &[format!("optimize --arq --channel {AWGN} --k {TABLE_KS}")])],
        "table2" => vec![
            task("table2.csv", &[format!("optimize --channel {AWGN} --m 5 --k {TABLE_KS}")]),
            task(
                "table2_reference.csv",
                &per_schedule(&|k, inc| {
                    format!("rcsp --channel {AWGN} --k {k} --increments {} --jointness joint --emit summary", joined(inc))
                }),
            ),
        ],
        "table3" => vec![
            task("table3.csv", &[format!("optimize --uniform --channel {AWGN} --m 5 --k {TABLE_KS}")]),
            task(
                "table3_reference.csv",
                &UNIFORM_PAIRS
                    .iter()
                    .map(|(k, n1, i)| format!("rcsp --channel {AWGN} --k {k} --n1 {n1} --I {i} --m 5 --emit summary"))
                    .collect::<Vec<_>>(),
            ),
        ],
        "fig1" => vec![
            task("fig1_infinite.csv", &[format!("bounds --channel {BSC} --kind infinite")]),
            task("fig1_truncated_d01.csv", &[format!("bounds --channel {BSC} --kind truncated --backoff 0.1")]),
            task("fig1_truncated_d02.csv", &[format!("bounds --channel {BSC} --kind truncated --backoff 0.2")]),
            task("fig1_truncated_d04.csv", &[format!("bounds --channel {BSC} --kind truncated --backoff 0.4")]),
            task("fig1_converse.csv", &[format!("bounds --channel {BSC} --kind converse")]),
        ],
        "fig2" => vec![
            task("fig2_infinite.csv", &[format!("bounds --channel {BSC} --kind infinite")]),
            task("fig2_repeated_i1.csv", &[format!("bounds --channel {BSC} --kind repeated --log-rule 10,30 --I 1")]),
            task(
                "fig2_repeated_loglog.csv",
                &[format!("bounds --channel {BSC} --kind repeated --log-rule 10,30 --I loglog")],
            ),
            task("fig2_arq.csv", &[format!("bounds --channel {BSC} --kind arq")]),
            task("fig2_converse.csv", &[format!("bounds --channel {BSC} --kind converse")]),
        ],
        "fig4" => {
            let ks = "8,10,12,14,16,18,20,24,28,32,36,40,48";
            let mut t = vec![
                task("fig4_infinite.csv", &[format!("bounds --channel {BSC} --kind infinite --k {ks}")]),
                task("fig4_converse.csv", &[format!("bounds --channel {BSC} --kind converse --ell 10,20,30,40,50,60,70,80")]),
                task(
                    "fig4_rcsp_marginal.csv",
                    &[format!("rcsp --channel {BSC} --k {ks} --I 1 --m-per-k 10 --emit summary")],
                ),
            ];
            for k in [16, 20, 32] {
                t.push(task(
                    &format!("fig4_sim_cc64_k{k}.csv"),
                    &[format!("simulate --channel {BSC} --code cc64 --k {k} --n1 {k} --I 1 --m {}", 2 * k + 1)],
                ));
            }
            t
        }
        "fig9" => {
            let mut t = vec![
                task(
                    "fig9_joint.csv",
                    &per_schedule(&|k, inc| format!("rcsp --k {k} --increments {} --jointness joint --emit summary", joined(inc))),
                ),
                task(
                    "fig9_marginal_bd.csv",
                    &per_schedule(&|k, inc| format!("rcsp --k {k} --increments {} --emit summary", joined(inc))),
                ),
                task(
                    "fig9_marginal_ml.csv",
                    &per_schedule(&|k, inc| format!("rcsp --k {k} --increments {} --mode ml --emit summary", joined(inc))),
                ),
                task(
                    "fig9_chernoff_ub.csv",
                    &per_schedule(&|k, inc| {
                        format!("rcsp --k {k} --increments {} --jointness chernoff_ub --emit summary", joined(inc))
                    }),
                ),
                task(
                    "fig9_dt.csv",
                    &per_schedule(&|k, inc| format!("bounds --channel {AWGN} --kind dt --k {k} --increments {}", joined(inc))),
                ),
            ];
            for (k, inc) in &NONUNIFORM_SCHEDULES[..3] {
                t.push(task(
                    &format!("fig9_sim_cc1024_k{k}.csv"),
                    &[format!("simulate --channel {AWGN} --code cc1024 --k {k} --increments {}", joined(inc))],
                ));
            }
            t
        }
        "fig11" => vec![
            task("fig11_repeated.csv", &[format!("optimize --channel {AWGN} --m 4 --k 16,32,64,128")]),
            task(
                "fig11_outage.csv",
                &[format!("optimize --channel {AWGN} --m 4 --k 16,32,64,128 --outage 1e-2,1e-4,1e-6,1e-8,1e-10")],
            ),
            task(
                "fig11_trajectory_k128.csv",
                &[format!("optimize --channel {AWGN} --m 4 --k 128 --outage 1e-2,1e-4,1e-6,1e-8,1e-10 --emit trajectory")],
            ),
        ],
        "fig12" => vec![task("fig12.csv", &["optimize --sweep-snr 0,1,2,3,4,5 --ell-max 200 --m 1,4,8".to_string()])],
        "fig13" => {
            let inc = joined(&NONUNIFORM_SCHEDULES[2].1);
            vec![
                task("fig13_joint.csv", &[format!("rcsp --k 64 --increments {inc} --jointness joint")]),
                task("fig13_marginal.csv", &[format!("rcsp --k 64 --increments {inc}")]),
                task(
                    "fig13_sim_cc1024.csv",
                    &[format!("simulate --channel {AWGN} --code cc1024 --k 64 --increments {inc} --emit trajectory")],
                ),
                task(
                    "fig13_sim_cc64.csv",
                    &[format!("simulate --channel {AWGN} --code cc64 --k 64 --increments {inc} --emit trajectory")],
                ),
            ]
        }
        other => bail!("unknown preset {other:?}; known presets: {}", PRESETS.join(", ")),
    };
    for t in &mut tasks {
        for argv in &mut t.invocations {
            if is_stochastic(argv) {
                argv.extend(["--seed".to_string(), seed.to_string()]);
                if let (Some(n), true) = (trials, argv[0] == "simulate") {
                    argv.extend(["--trials".to_string(), n.to_string()]);
                }
            }
        }
    }
    Ok(tasks)
}

#[derive(Clone, Debug, Serialize)]
pub struct TaskRecord {
    pub file: String,
    pub invocations: Vec<Vec<String>>,
    pub seed: Option<u64>,
    pub status: String,
    pub error: Option<String>,
    pub rows: usize,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub preset: String,
    pub version: String,
    pub seed: u64,
    pub trials: Option<u64>,
    pub status: String,
    pub wall_time_s: f64,
    pub files: Vec<String>,
    pub tasks: Vec<TaskRecord>,
}

fn parse(argv: &[String]) -> Result<Command> {
    let full = std::iter::once("ir-ntc".to_string()).chain(argv.iter().cloned());
    Ok(Cli::try_parse_from(full)
        .map_err(|e| anyhow::anyhow!("{e}"))?
        .command)
}

fn run_task(t: &SubTask) -> Result<Table> {
    let mut out: Option<Table> = None;
    for argv in &t.invocations {
        let table = run_table(&parse(argv)?).with_context(|| argv.join(" "))?;
        match &mut out {
            None => out = Some(table),
            Some(acc) => acc.extend(table),
        }
    }
    out.context("sub-task has no invocations")
}

/// Generic plotting script for a CSV written by a recipe.
pub fn gnuplot_script(csv: &str, table: &Table) -> String {
    let pick = |names: &[&'static str]| names.iter().find(|n| table.column(n).is_some()).copied();
    let x = pick(&["ell", "n", "n_j", "snr_db", "k"]).unwrap_or(table.headers[0].as_str());
    let y = pick(&["rate", "joint", "p_hat", "gap", "objective"])
        .unwrap_or(table.headers[table.headers.len() - 1].as_str());
    let log = if ["joint", "p_hat"].contains(&y) {
        "set logscale y\n"
    } else {
        ""
    };
    format!(
        "set datafile separator ','\nset key autotitle columnhead\nset xlabel '{x}'\nset ylabel '{y}'\n{log}\
         plot '{csv}' using (column('{x}')):(column('{y}')) with linespoints\n"
    )
}

/// Runs a preset into `args.out` (default `./<name>`) and writes
/// `manifest.json` there. Fails if any sub-task failed, after writing
/// everything that succeeded.
pub fn run_recipe(args: &RecipeArgs) -> Result<Manifest> {
    let tasks = preset(&args.name, args.seed, args.trials)?;
    let dir: PathBuf = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&args.name));
    run_tasks(&tasks, &dir, args)
}

/// Runs explicit sub-tasks into `dir`; `args` supplies the preset name,
/// seed, trial override and plotting flag recorded in the manifest.
pub fn run_tasks(tasks: &[SubTask], dir: &Path, args: &RecipeArgs) -> Result<Manifest> {
    let dir = dir.to_path_buf();
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let start = Instant::now();
    let records: Vec<TaskRecord> = tasks
        .par_iter()
        .map(|t| {
            let t0 = Instant::now();
            let result = run_task(t).and_then(|table| {
                write_outputs(&dir, &t.file, &table, args.gnuplot).map(|_| table)
            });
            let stochastic = t.invocations.iter().any(|a| is_stochastic(a));
            TaskRecord {
                file: t.file.clone(),
                invocations: t.invocations.clone(),
                seed: stochastic.then_some(args.seed),
                status: if result.is_ok() { "ok" } else { "failed" }.to_string(),
                error: result.as_ref().err().map(|e| format!("{e:#}")),
                rows: result.as_ref().map_or(0, |t| t.rows.len()),
                wall_time_s: t0.elapsed().as_secs_f64(),
            }
        })
        .collect();
    let failed = records.iter().filter(|r| r.status != "ok").count();
    let manifest = Manifest {
        preset: args.name.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: args.seed,
        trials: args.trials,
        status: if failed == 0 { "ok" } else { "partial" }.to_string(),
        wall_time_s: start.elapsed().as_secs_f64(),
        files: records
            .iter()
            .filter(|r| r.status == "ok")
            .map(|r| r.file.clone())
            .collect(),
        tasks: records,
    };
    let json = serde_json::to_string_pretty(&manifest)?;
    fs::write(dir.join("manifest.json"), json + "\n")?;
    if failed > 0 {
        bail!(
            "{failed} sub-task(s) failed; see {}",
            dir.join("manifest.json").display()
        );
    }
    Ok(manifest)
}

fn write_outputs(dir: &Path, file: &str, table: &Table, gnuplot: bool) -> Result<()> {
    table.write_csv(fs::File::create(dir.join(file))?)?;
    if gnuplot {
        let gp = Path::new(file).with_extension("gp");
        fs::write(dir.join(gp), gnuplot_script(file, table))?;
    }
    Ok(())
}
