//! Command-line front end: one-shot statistics for a single modulus plus a
//! config-driven experiment runner. One-shot commands print JSON by default
//! or a single fixed-schema CSV row with `--format csv`.

mod config;
mod experiment;
mod fail;
mod output;
mod report;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use lehmerlab_core::charsums::{
    fourth_moment_nonprincipal, interval_bound_ratio, max_nonprincipal_sum,
    principal_progression_count, second_moment, second_moment_bound, ProgressionInterval,
};
use lehmerlab_core::discrepancy::{box_discrepancy_auto, region_discrepancy, DEFAULT_BOX_BUDGET};
use lehmerlab_core::lehmer::{inverse_pair_hull, DEFAULT_ENUM_BUDGET};
use lehmerlab_core::{CharacterGroup, LehmerInstance, Modulus, RegionClass};

use config::{parse_box_flag, parse_region_flag};
use fail::{config_err, CliResult};
use output::{csv_document, Cell, Row};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Parser)]
#[command(
    name = "lehmerlab",
    version,
    about = "Counting units with constrained inverses: exact counts, character sums, \
             discrepancy, and hull statistics modulo q"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Modulus q.
    #[arg(long, global = true)]
    q: Option<u64>,

    /// Number of constrained coordinates; checked against --a when given.
    #[arg(long, global = true)]
    k: Option<usize>,

    /// Progression moduli a_1,...,a_{k+1}, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    a: Option<Vec<u64>>,

    /// Progression residues b_1,...,b_{k+1}, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    b: Option<Vec<i64>>,

    /// Dilation box, one rational pair per axis: lo:hi,lo:hi,...
    #[arg(long = "box", global = true)]
    box_spec: Option<String>,

    /// Region spec: ball:c1,c2,...:radius
    #[arg(long, global = true)]
    region: Option<String>,

    /// Bound-shape parameter r.
    #[arg(long, global = true)]
    r: Option<u32>,

    /// Seed for sampled discrepancy kernels.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Work budget: enumerated tuples or candidate boxes.
    #[arg(long, global = true)]
    budget: Option<u64>,

    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format for one-shot commands.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum Cmd {
    /// Count solutions, optionally inside a dilated box, against the main term.
    Count,
    /// Character-sum diagnostics over a progression window mod q.
    Charsum,
    /// Box discrepancy of the normalized solution set, with optional region transfer.
    Discrepancy,
    /// Convex-hull vertex count of the inverse pairs {(n, inverse of n)}.
    Hull,
    /// Spread statistic H: how close some solution stays to its inverse.
    Hq,
    /// Run an experiment sweep described by a TOML config file.
    Experiment { config: PathBuf },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Cmd::Count => cmd_count(cli),
        Cmd::Charsum => cmd_charsum(cli),
        Cmd::Discrepancy => cmd_discrepancy(cli),
        Cmd::Hull => cmd_hull(cli),
        Cmd::Hq => cmd_hq(cli),
        Cmd::Experiment { config } => cmd_experiment(cli, config),
    }
}

fn need_q(cli: &Cli) -> CliResult<u64> {
    cli.q.ok_or_else(|| config_err("--q is required"))
}

/// The (a, b) progression pair from the flags; `(1,...,1)/(0,...,0)` over two
/// coordinates when the command admits an unconstrained default.
fn instance_parts(cli: &Cli, default_unconstrained: bool) -> CliResult<(Vec<u64>, Vec<i64>)> {
    let (a, b) = match (&cli.a, &cli.b) {
        (Some(a), Some(b)) => (a.clone(), b.clone()),
        (None, None) if default_unconstrained => (vec![1, 1], vec![0, 0]),
        _ => return Err(config_err("--a and --b are required together")),
    };
    if let Some(k) = cli.k {
        if k + 1 != a.len() {
            return Err(config_err(format!(
                "--k {k} disagrees with --a of length {}",
                a.len()
            )));
        }
    }
    Ok((a, b))
}

fn emit(cli: &Cli, experiment: &str, row: Row, json: serde_json::Value) -> CliResult<()> {
    let text = match cli.format {
        OutputFormat::Json => {
            serde_json::to_string_pretty(&json).expect("in-memory serialization") + "\n"
        }
        OutputFormat::Csv => csv_document(experiment, &[row]),
    };
    match &cli.out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(path, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn opt_float(v: Option<f64>) -> Cell {
    match v {
        Some(x) => Cell::Float(x),
        None => Cell::Empty,
    }
}

fn cmd_count(cli: &Cli) -> CliResult<()> {
    let q = need_q(cli)?;
    let (a, b) = instance_parts(cli, false)?;
    let m = Modulus::new(q)?;
    let inst = LehmerInstance::new(&m, a.clone(), b.clone())?;
    let budget = cli.budget.unwrap_or(DEFAULT_ENUM_BUDGET);
    let tbox = cli
        .box_spec
        .as_deref()
        .map(|s| parse_box_flag(s, a.len()))
        .transpose()?;
    let (observed, measure) = match &tbox {
        Some(tb) => (inst.count_in_box(tb, budget)?, tb.measure_f64()),
        None => (inst.count_all(budget)?, 1.0),
    };
    let main = inst.main_term(measure);
    let error = (observed as f64 - main).abs();
    let shape = |r: u32| inst.error_shape_composite(r).ok();
    let json = json!({
        "command": "count",
        "q": q,
        "k": inst.k(),
        "a": a,
        "b": b,
        "box": cli.box_spec,
        "box_measure": measure,
        "budget": budget,
        "observed": observed,
        "main_term": main,
        "abs_error": error,
        "error_shapes": { "r1": shape(1), "r2": shape(2), "r3": shape(3) },
    });
    let row = Row {
        q,
        k: inst.k(),
        a_product: inst.a_product(),
        a_norm: inst.a_norm(),
        observed: Cell::Int(observed as i128),
        main: Cell::Float(main),
        error: Cell::Float(error),
        shape_r1: opt_float(shape(1)),
        shape_r2: opt_float(shape(2)),
        shape_r3: opt_float(shape(3)),
    };
    emit(cli, "count", row, json)
}

fn cmd_charsum(cli: &Cli) -> CliResult<()> {
    let q = need_q(cli)?;
    let a0 = cli.a.as_ref().and_then(|v| v.first().copied()).unwrap_or(1);
    let b0 = cli.b.as_ref().and_then(|v| v.first().copied()).unwrap_or(0);
    let m = Modulus::new(q)?;
    let g = CharacterGroup::new(&m);
    let iv = ProgressionInterval::new(0, q, a0, b0)?;
    let second = second_moment(&g, &iv)?;
    let sbound = second_moment_bound(&g, &iv);
    let principal = principal_progression_count(&m, &iv)?;
    let maxs = max_nonprincipal_sum(&g, 0, q)?;
    let fourth = fourth_moment_nonprincipal(&g, &iv).ok();
    let r = cli.r.unwrap_or(4);
    let burgess_ratio = interval_bound_ratio(&m, q, maxs.max_abs, r).ok();
    let qf = q as f64;
    let json = json!({
        "command": "charsum",
        "q": q,
        "progression": { "step": a0, "residue": b0, "window": [1, q] },
        "second_moment": { "value": second, "bound": sbound },
        "fourth_moment_ratio": fourth.map(|f| f.bound_ratio),
        "principal": {
            "exact": principal.exact,
            "main": principal.main,
            "error_bound": principal.error_bound,
            "within_bound": principal.within_bound(),
        },
        "max_nonprincipal": { "value": maxs.max_abs, "pv_ratio": maxs.pv_ratio },
        "interval_bound_ratio": { "r": r, "value": burgess_ratio },
    });
    let row = Row {
        q,
        k: 1,
        a_product: a0 as u128,
        a_norm: a0 as f64,
        observed: Cell::Float(maxs.max_abs),
        main: Cell::Float(qf.sqrt() * qf.ln()),
        error: Cell::Float(maxs.pv_ratio),
        shape_r1: Cell::Float(second),
        shape_r2: Cell::Float(sbound),
        shape_r3: opt_float(fourth.map(|f| f.bound_ratio)),
    };
    emit(cli, "charsum", row, json)
}

fn cmd_discrepancy(cli: &Cli) -> CliResult<()> {
    let q = need_q(cli)?;
    let (a, b) = instance_parts(cli, true)?;
    let m = Modulus::new(q)?;
    let inst = LehmerInstance::new(&m, a.clone(), b.clone())?;
    let enum_budget = cli.budget.unwrap_or(DEFAULT_ENUM_BUDGET);
    let box_budget = cli.budget.unwrap_or(DEFAULT_BOX_BUDGET);
    let seed = cli.seed.unwrap_or(0);
    let joint = inst.point_set_joint(enum_budget)?;
    let d = box_discrepancy_auto(&joint, seed, box_budget)?;
    let region = match &cli.region {
        Some(spec) => {
            let region = parse_region_flag(spec)?;
            if region.dim() != joint.dim() {
                return Err(config_err(format!(
                    "region dimension {} does not match point dimension {}",
                    region.dim(),
                    joint.dim()
                )));
            }
            let class = RegionClass::calibrated(region)?;
            let delta = region_discrepancy(&joint, class.region())?;
            let bound = class.transfer_bound(d)?;
            Some((class.shell_constant(), delta, bound))
        }
        None => None,
    };
    let json = json!({
        "command": "discrepancy",
        "q": q,
        "k": inst.k(),
        "a": a,
        "b": b,
        "points": joint.len(),
        "dim": joint.dim(),
        "seed": seed,
        "box_discrepancy": d,
        "region": cli.region,
        "region_discrepancy": region.map(|r| r.1),
        "shell_constant": region.map(|r| r.0),
        "transfer_bound": region.map(|r| r.2),
        "bound_ratio": region.map(|r| r.1 / r.2),
    });
    let row = Row {
        q,
        k: inst.k(),
        a_product: inst.a_product(),
        a_norm: inst.a_norm(),
        observed: Cell::Float(d),
        main: opt_float(region.map(|r| r.2)),
        error: opt_float(region.map(|r| r.1)),
        shape_r1: opt_float(region.map(|r| r.0)),
        shape_r2: opt_float(region.map(|r| r.1 / r.2)),
        shape_r3: Cell::Empty,
    };
    emit(cli, "discrepancy", row, json)
}

fn cmd_hull(cli: &Cli) -> CliResult<()> {
    let q = need_q(cli)?;
    let m = Modulus::new(q)?;
    let (hull, vertices) = inverse_pair_hull(&m)?;
    let json = json!({
        "command": "hull",
        "q": q,
        "points": m.phi(),
        "hull_vertices": vertices,
        "hull": hull,
    });
    let row = Row {
        q,
        k: 1,
        a_product: 1,
        a_norm: std::f64::consts::SQRT_2,
        observed: Cell::Int(vertices as i128),
        main: Cell::Int(m.phi() as i128),
        error: Cell::Empty,
        shape_r1: Cell::Empty,
        shape_r2: Cell::Empty,
        shape_r3: Cell::Empty,
    };
    emit(cli, "hull", row, json)
}

fn cmd_hq(cli: &Cli) -> CliResult<()> {
    let q = need_q(cli)?;
    let (a, b) = instance_parts(cli, true)?;
    let m = Modulus::new(q)?;
    let inst = LehmerInstance::new(&m, a.clone(), b.clone())?;
    let budget = cli.budget.unwrap_or(DEFAULT_ENUM_BUDGET);
    let h = inst.h_statistic(budget)?;
    let deficit = q - h;
    let ratio = deficit as f64 / (q as f64).powf(0.75);
    let json = json!({
        "command": "hq",
        "q": q,
        "a": a,
        "b": b,
        "h": h,
        "deficit": deficit,
        "deficit_over_q34": ratio,
    });
    let row = Row {
        q,
        k: inst.k(),
        a_product: inst.a_product(),
        a_norm: inst.a_norm(),
        observed: Cell::Int(h as i128),
        main: Cell::Float(q as f64),
        error: Cell::Float(deficit as f64),
        shape_r1: Cell::Float(ratio),
        shape_r2: Cell::Empty,
        shape_r3: Cell::Empty,
    };
    emit(cli, "hq", row, json)
}

fn cmd_experiment(cli: &Cli, path: &Path) -> CliResult<()> {
    let mut cfg = config::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    let summary = experiment::run_experiment(&cfg)?;
    println!(
        "{}: {} rows ({} skipped) -> {} (sidecar {})",
        cfg.experiment.name(),
        summary.rows,
        summary.skipped,
        summary.csv_path.display(),
        summary.sidecar_path.display()
    );
    if let Some(fit) = summary.fit {
        println!(
            "fit: slope {:.6} intercept {:.6} residual {:.6} over {} rows",
            fit.slope, fit.intercept, fit.residual, fit.rows_used
        );
    }
    Ok(())
}
