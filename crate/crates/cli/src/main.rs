//! `medianlab`: analysis, decomposition, measures, simulation, and oracle
//! commands over median-algebra files. Every command is deterministic for a
//! fixed seed; reports render as plain tables or JSON.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use num::{Signed, ToPrimitive};
use serde_json::{json, Value};

use medianlab_core::algebra::MedianAlgebra;
use medianlab_core::io::{self, AlgebraFile};
use medianlab_core::set::PointSet;
use medianlab_core::walk::{self, WalkConfig};
use medianlab_core::{cubes, factor, measure, oracle, walls};
use medianlab_core::{Error, GroupMeasure, Result};

#[derive(Parser)]
#[command(
    name = "medianlab",
    version,
    about = "Structural analysis and exact measure dynamics for finite median algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Master seed for the randomized commands.
    #[arg(long, global = true, default_value_t = walk::DEFAULT_SEED)]
    seed: u64,

    /// Decimal digits shown for floating statistics.
    #[arg(long, global = true, default_value_t = 6)]
    precision: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an algebra file and summarize its structure.
    Check { file: PathBuf },

    /// List walls: canonical sides and the transversality matrix.
    Walls { file: PathBuf },

    /// List cubes with dimensions and hulls.
    Cubes {
        file: PathBuf,
        /// Keep only the maximal cubes.
        #[arg(long)]
        maximal: bool,
    },

    /// Split off the maximal cubical factor.
    Decompose { file: PathBuf },

    /// Iterate the self-median operator and report where runs land.
    Balanced {
        file: PathBuf,
        /// Number of random starting measures.
        #[arg(long, default_value_t = 50)]
        starts: usize,
        /// Iterations per start.
        #[arg(long, default_value_t = 300)]
        iters: usize,
        /// Landing tolerance in total variation, as a fraction.
        #[arg(long, default_value = "1/1000000")]
        tol: String,
    },

    /// Vertices of the stationary polytope of a measured action.
    Stationary {
        file: PathBuf,
        /// Action file with generators and step weights.
        #[arg(long)]
        action: PathBuf,
    },

    /// Decide minimality of an action.
    Minimal {
        file: PathBuf,
        /// Action file with generators.
        #[arg(long)]
        action: PathBuf,
    },

    /// Random walk on the rank-two free product with a sign; boundary
    /// statistics against their exact predictions.
    Simulate {
        /// Cylinder depth (prefix length).
        #[arg(long)]
        depth: usize,
        /// Steps per trajectory.
        #[arg(long)]
        steps: usize,
        /// Number of trajectories.
        #[arg(long)]
        traj: usize,
        /// Eight step weights as comma-separated fractions, letter-major:
        /// (a,+),(a,-),(a',+),(a',-),(b,+),(b,-),(b',+),(b',-).
        #[arg(long)]
        mu: Option<String>,
    },

    /// Enumerate the hypercube subalgebra corpus and recheck each member
    /// against the brute-force definitions.
    Oracle {
        /// Hypercube dimension.
        #[arg(long)]
        dim: usize,
    },
}

struct Report {
    table: String,
    json: Value,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}

fn run(cli: Cli) -> Result<()> {
    let report = match &cli.command {
        Command::Check { file } => check(file)?,
        Command::Walls { file } => wall_report(file)?,
        Command::Cubes { file, maximal } => cube_report(file, *maximal)?,
        Command::Decompose { file } => decompose(file)?,
        Command::Balanced {
            file,
            starts,
            iters,
            tol,
        } => balanced(file, *starts, *iters, tol, cli.seed, cli.precision)?,
        Command::Stationary { file, action } => stationary(file, action)?,
        Command::Minimal { file, action } => minimal(file, action)?,
        Command::Simulate {
            depth,
            steps,
            traj,
            mu,
        } => simulate(*depth, *steps, *traj, mu.as_deref(), cli.seed, cli.precision)?,
        Command::Oracle { dim } => oracle_report(*dim)?,
    };
    let rendered = match cli.format {
        Format::Table => report.table,
        Format::Json => {
            let mut text =
                serde_json::to_string_pretty(&report.json).expect("reports always serialize");
            text.push('\n');
            text
        }
    };
    match &cli.out {
        Some(path) => std::fs::write(path, rendered)?,
        None => print!("{rendered}"),
    }
    Ok(())
}

/// Keeps the error category but names the offending file.
fn with_path(file: &Path, err: Error) -> Error {
    match err {
        Error::Io(e) => Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", file.display()),
        )),
        Error::Json(e) => Error::FileFormat {
            reason: format!("{}: {e}", file.display()),
        },
        other => other,
    }
}

fn load(file: &Path) -> Result<MedianAlgebra> {
    io::read_algebra(file).map_err(|e| with_path(file, e))
}

fn load_action(
    file: &Path,
    action: &Path,
) -> Result<(medianlab_core::GroupAction, Option<GroupMeasure>)> {
    let m = Arc::new(load(file)?);
    io::read_action(action, m).map_err(|e| with_path(action, e))
}

fn check(file: &Path) -> Result<Report> {
    let m = load(file)?;
    let walls = m.walls()?.len();
    let cubes = cubes::enumerate(&m)?;
    let maximal = cubes::maximal(&cubes).len();
    let mut table = String::new();
    let _ = writeln!(table, "algebra: valid");
    let _ = writeln!(table, "points: {}", m.n());
    let _ = writeln!(table, "walls: {walls}");
    let _ = writeln!(table, "cubes: {}", cubes.len());
    let _ = writeln!(table, "maximal cubes: {maximal}");
    let json = json!({
        "valid": true,
        "points": m.n(),
        "walls": walls,
        "cubes": cubes.len(),
        "maximal_cubes": maximal,
        "algebra": AlgebraFile::from_algebra(&m),
    });
    Ok(Report { table, json })
}

fn wall_report(file: &Path) -> Result<Report> {
    let m = load(file)?;
    let walls = m.walls()?;
    let mut table = String::new();
    let _ = writeln!(table, "walls: {}", walls.len());
    for (i, w) in walls.iter().enumerate() {
        let _ = writeln!(
            table,
            "wall {i}: side {} | coside {}",
            w.side().to_bit_string(),
            w.coside().to_bit_string()
        );
    }
    if !walls.is_empty() {
        let _ = writeln!(table, "transverse ('t' yes, '-' no, '.' self):");
        for (i, a) in walls.iter().enumerate() {
            let row: String = walls
                .iter()
                .enumerate()
                .map(|(j, b)| {
                    if i == j {
                        '.'
                    } else if walls::is_transverse(a, b) {
                        't'
                    } else {
                        '-'
                    }
                })
                .collect();
            let _ = writeln!(table, "wall {i}: {row}");
        }
    }
    let matrix: Vec<Vec<bool>> = walls
        .iter()
        .map(|a| walls.iter().map(|b| walls::is_transverse(a, b)).collect())
        .collect();
    let json = json!({
        "count": walls.len(),
        "walls": walls
            .iter()
            .map(|w| json!({
                "side": w.side().to_bit_string(),
                "coside": w.coside().to_bit_string(),
            }))
            .collect::<Vec<_>>(),
        "transverse": matrix,
    });
    Ok(Report { table, json })
}

fn cube_report(file: &Path, maximal_only: bool) -> Result<Report> {
    let m = load(file)?;
    let all = cubes::enumerate(&m)?;
    let listed = if maximal_only {
        cubes::maximal(&all)
    } else {
        all.clone()
    };
    let mut table = String::new();
    let kind = if maximal_only { "maximal cubes" } else { "cubes" };
    let _ = writeln!(table, "{kind}: {}", listed.len());
    let mut entries = Vec::new();
    for (i, cube) in listed.iter().enumerate() {
        let hull = m.convex_hull(cube.set()).members().to_bit_string();
        let _ = writeln!(
            table,
            "cube {i}: dim {}, members {}, hull {hull}",
            cube.dim(),
            cube.set().to_bit_string()
        );
        entries.push(json!({
            "dim": cube.dim(),
            "members": cube.set().to_bit_string(),
            "hull": hull,
        }));
    }
    let json = json!({ "count": listed.len(), "maximal_only": maximal_only, "cubes": entries });
    Ok(Report { table, json })
}

fn cube_mask_string(mask: u32, dim: usize) -> String {
    (0..dim)
        .map(|j| if mask >> j & 1 == 1 { '1' } else { '0' })
        .collect()
}

fn decompose(file: &Path) -> Result<Report> {
    let m = load(file)?;
    let dec = factor::cubical_factor(&m)?;
    let dim = dec.cube_dim();
    let fiber_file = AlgebraFile::from_algebra(dec.m_prime());
    let mut table = String::new();
    let _ = writeln!(table, "walls: {}", dec.w1().len() + dec.w2().len());
    let _ = writeln!(table, "transverse walls: {}", dec.w1().len());
    let _ = writeln!(table, "cube dimension: {dim}");
    if dim == 0 {
        let _ = writeln!(table, "no cubical factor");
    }
    let _ = writeln!(table, "fiber points: {}", dec.m_prime().n());
    let _ = writeln!(
        table,
        "fiber algebra: {}",
        serde_json::to_string(&fiber_file).expect("algebra files always serialize")
    );
    let _ = writeln!(table, "iso:");
    let mut iso_entries = Vec::new();
    for x in 0..m.n() {
        let (fiber, mask) = dec.iso(x);
        let bits = cube_mask_string(mask, dim);
        let _ = writeln!(table, "point {x} -> fiber {fiber}, cube {bits}");
        iso_entries.push(json!({ "point": x, "fiber": fiber, "cube": bits }));
    }
    let json = json!({
        "walls": dec.w1().len() + dec.w2().len(),
        "transverse_walls": dec.w1().len(),
        "cube_dim": dim,
        "no_cubical_factor": dim == 0,
        "fiber": fiber_file,
        "iso": iso_entries,
    });
    Ok(Report { table, json })
}

fn balanced(
    file: &Path,
    starts: usize,
    iters: usize,
    tol_text: &str,
    seed: u64,
    precision: usize,
) -> Result<Report> {
    let m = load(file)?;
    let tol = io::parse_fraction(tol_text)?;
    if tol.is_negative() {
        return Err(Error::FileFormat {
            reason: format!("tolerance {tol_text} is negative"),
        });
    }
    let report = measure::find_phi_fixed_points(&m, starts, iters, &tol, seed)?;
    let mut landings = vec![0usize; report.cubes.len()];
    let mut outliers = Vec::new();
    for (i, run) in report.runs.iter().enumerate() {
        if run.within_tol {
            landings[run.nearest] += 1;
        } else {
            outliers.push((i, run));
        }
    }
    let mut table = String::new();
    let _ = writeln!(table, "cubes: {}", report.cubes.len());
    let _ = writeln!(
        table,
        "starts: {starts}, iterations: {iters}, tolerance: {}",
        io::format_fraction(&tol)
    );
    let _ = writeln!(
        table,
        "runs within tolerance: {} of {starts}",
        starts - outliers.len()
    );
    let _ = writeln!(table, "landing counts:");
    for (cube, count) in report.cubes.iter().zip(&landings) {
        let _ = writeln!(
            table,
            "cube {} (dim {}): {count} runs",
            cube.set().to_bit_string(),
            cube.dim()
        );
    }
    if outliers.is_empty() {
        let _ = writeln!(table, "outliers: none");
    } else {
        for (i, run) in &outliers {
            let _ = writeln!(
                table,
                "outlier run {i}: distance {:.*} from the nearest cubical measure, last step {:.*}",
                precision,
                run.distance.to_f64().unwrap_or(f64::NAN),
                precision,
                run.final_step.to_f64().unwrap_or(f64::NAN)
            );
        }
    }
    let json = json!({
        "cubes": report.cubes.iter().map(|c| c.set().to_bit_string()).collect::<Vec<_>>(),
        "starts": starts,
        "iterations": iters,
        "tolerance": io::format_fraction(&tol),
        "within_tolerance": starts - outliers.len(),
        "landings": landings,
        "outliers": outliers
            .iter()
            .map(|(i, run)| json!({
                "run": i,
                "distance": run.distance.to_f64(),
                "final_step": run.final_step.to_f64(),
            }))
            .collect::<Vec<_>>(),
    });
    Ok(Report { table, json })
}

fn measure_fractions(measure: &measure::Measure) -> Vec<String> {
    measure.weights().iter().map(io::format_fraction).collect()
}

fn stationary(file: &Path, action: &Path) -> Result<Report> {
    let (action, mu) = load_action(file, action)?;
    let mu = mu.ok_or_else(|| Error::FileFormat {
        reason: "the action file carries no step distribution \"mu\"".into(),
    })?;
    let report = measure::stationary_polytope(&action, &mu)?;
    let mut table = String::new();
    let _ = writeln!(table, "generating: {}", mu.is_generating());
    let _ = writeln!(table, "classes: {}", report.classes.len());
    for (i, class) in report.classes.iter().enumerate() {
        let _ = writeln!(table, "class {i}: {}", class.to_bit_string());
    }
    let _ = writeln!(table, "vertices: {}", report.vertices.len());
    for (i, vertex) in report.vertices.iter().enumerate() {
        let _ = writeln!(table, "vertex {i}: {}", measure_fractions(vertex).join(" "));
    }
    let json = json!({
        "generating": mu.is_generating(),
        "classes": report.classes.iter().map(PointSet::to_bit_string).collect::<Vec<_>>(),
        "vertices": report.vertices.iter().map(measure_fractions).collect::<Vec<_>>(),
    });
    Ok(Report { table, json })
}

fn minimal(file: &Path, action: &Path) -> Result<Report> {
    let (action, _) = load_action(file, action)?;
    let report = action.is_minimal();
    let mut table = String::new();
    let _ = writeln!(table, "minimal: {}", report.minimal);
    if let Some(witness) = &report.witness {
        let _ = writeln!(table, "invariant subalgebra: {}", witness.to_bit_string());
    }
    let json = json!({
        "minimal": report.minimal,
        "witness": report.witness.as_ref().map(PointSet::to_bit_string),
    });
    Ok(Report { table, json })
}

/// Depth-d reduced words in the order matching the cylinder indexing: first
/// letter free, later letters anything but the previous letter's inverse,
/// ascending at every position.
fn reduced_words(depth: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut word = Vec::new();
    fn extend(depth: usize, word: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if word.len() == depth {
            out.push(word.clone());
            return;
        }
        for letter in 0..4u8 {
            if let Some(&last) = word.last() {
                if letter == last ^ 1 {
                    continue;
                }
            }
            word.push(letter);
            extend(depth, word, out);
            word.pop();
        }
    }
    extend(depth, &mut word, &mut out);
    out
}

fn spell(word: &[u8]) -> String {
    word.iter()
        .map(|&l| walk::LETTERS[l as usize])
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_mu(text: &str) -> Result<Vec<num::BigRational>> {
    let weights: Vec<num::BigRational> = text
        .split(',')
        .map(io::parse_fraction)
        .collect::<Result<_>>()?;
    Ok(weights)
}

fn simulate(
    depth: usize,
    steps: usize,
    traj: usize,
    mu: Option<&str>,
    seed: u64,
    precision: usize,
) -> Result<Report> {
    let mut config = WalkConfig::uniform(depth, steps, traj, seed);
    if let Some(text) = mu {
        config.step_weights = parse_mu(text)?;
    }
    config.validate()?;
    let report = walk::simulate_walk(&config);
    let preds = walk::predictions(&config);
    let words = reduced_words(depth);

    let mut table = String::new();
    let _ = writeln!(
        table,
        "depth: {depth}, steps: {steps}, trajectories: {traj}, seed: {seed}"
    );
    let _ = writeln!(table, "cells: {}", walk::cylinder_cells(depth));
    let _ = writeln!(
        table,
        "resolved: {}, unresolved: {}",
        report.resolved(),
        report.unresolved
    );
    match preds.cylinder.as_ref() {
        Some(per_cell) => {
            let _ = writeln!(
                table,
                "cylinder tv vs exact harmonic measure {}: {:.*}",
                io::format_fraction(per_cell),
                precision,
                report.cylinder_tv(per_cell)
            );
        }
        None => {
            let _ = writeln!(
                table,
                "cylinder prediction: none (letter marginals are not uniform)"
            );
        }
    }
    let _ = writeln!(
        table,
        "sign +1 fraction: {:.*} (predicted {:.*})",
        precision,
        report.sign_plus_fraction(),
        precision,
        preds.sign_plus
    );
    let flips = report.sign_flip_stats();
    for (k, (got, want)) in flips.iter().zip(&preds.flip_runs).enumerate() {
        let _ = writeln!(
            table,
            "sign constant over last {}: {:.*} (predicted {:.*})",
            k + 1,
            precision,
            got,
            precision,
            want
        );
    }
    let _ = writeln!(table, "cylinder counts:");
    let freqs = report.cylinder_distribution();
    let mut cells = Vec::new();
    for (i, word) in words.iter().enumerate() {
        let _ = writeln!(
            table,
            "cell {i} [{}]: {} ({:.*})",
            spell(word),
            report.prefix_counts[i],
            precision,
            freqs[i]
        );
        cells.push(json!({
            "word": spell(word),
            "count": report.prefix_counts[i],
            "frequency": freqs[i],
        }));
    }
    let json = json!({
        "depth": depth,
        "steps": steps,
        "trajectories": traj,
        "seed": seed,
        "resolved": report.resolved(),
        "unresolved": report.unresolved,
        "cylinder_tv": preds.cylinder.as_ref().map(|p| report.cylinder_tv(p)),
        "cylinder_prediction": preds.cylinder.as_ref().map(io::format_fraction),
        "sign_plus": report.sign_plus_fraction(),
        "sign_plus_predicted": preds.sign_plus,
        "flip_runs": flips.to_vec(),
        "flip_runs_predicted": preds.flip_runs.to_vec(),
        "cells": cells,
    });
    Ok(Report { table, json })
}

fn oracle_report(dim: usize) -> Result<Report> {
    let corpus = oracle::enumerate_hypercube_subalgebras(dim)?;
    let mut table = String::new();
    let _ = writeln!(table, "dimension: {}", corpus.dimension);
    let _ = writeln!(table, "classes: {}", corpus.members.len());
    let mut members = Vec::new();
    for member in &corpus.members {
        let recheck = oracle::brute_recheck(&member.algebra)?;
        let _ = writeln!(
            table,
            "{}: points {}, walls {}, cubes {}, maximal {}, cubical measures {}",
            member.label,
            member.algebra.n(),
            recheck.walls,
            recheck.cubes,
            recheck.maximal_cubes,
            recheck.cubical_measures
        );
        members.push(json!({
            "label": member.label,
            "points": member.algebra.n(),
            "vertices": member.vertices,
            "algebra": AlgebraFile::from_algebra(&member.algebra),
            "recheck": {
                "walls": recheck.walls,
                "cubes": recheck.cubes,
                "maximal_cubes": recheck.maximal_cubes,
                "cubical_measures": recheck.cubical_measures,
                "hulls": recheck.hulls,
                "gates": recheck.gates,
            },
        }));
    }
    let _ = writeln!(table, "recheck: all clean");
    let json = json!({
        "dimension": corpus.dimension,
        "classes": corpus.members.len(),
        "members": members,
    });
    Ok(Report { table, json })
}
