//! Command-line front end: graph construction, simulation, reduction,
//! closed-form analysis, oracle verification, and parameter sweeps.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use clap::{Args, Parser, Subcommand, ValueEnum};

use kronwalk::analysis::{
    critical_gamma, gamma_taylor_gap, perturbation_report, practical_gamma, predicted_runtime,
    srg_closed_form, srg_search_conditions,
};
use kronwalk::reduce::{equitable_partition, reduce_hamiltonian, third_order_census};
use kronwalk::walk::probability_series;
use kronwalk::{Diameter, Error, Graph, SearchProblem, Space, SrgCheck, VertexCode};

const EXIT_VERIFY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "kronwalk", version, about = "Quantum-walk search on Kronecker powers of complete graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the search Hamiltonian and report the success-probability peak.
    Simulate(SimulateArgs),
    /// Export the equitable partition and quotient matrix around the marked vertex.
    Reduce(ReduceArgs),
    /// Closed-form jumping rates, strong-regularity data, and perturbation quantities.
    Analyze(AnalyzeArgs),
    /// Run the brute-force oracle suites.
    Verify {
        /// One of: srg, census, quotient, diameter, all.
        suite: Suite,
    },
    /// Run independent simulations over several initiator sizes in parallel.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Full,
    Reduced,
    Auto,
}

impl Mode {
    fn space(self) -> Space {
        match self {
            Mode::Full => Space::Full,
            Mode::Reduced => Space::Reduced,
            Mode::Auto => Space::Auto,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Srg,
    Census,
    Quotient,
    Diameter,
    All,
}

#[derive(Args, Clone)]
struct SimulateArgs {
    /// Initiator size (vertices of the complete graph).
    #[arg(long = "M")]
    m: u64,
    /// Kronecker order; the graph has M^j vertices.
    #[arg(long)]
    j: u32,
    /// Jumping rate; defaults to the critical rate (practical 1/(M-1)^j for j >= 3).
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 0)]
    marked: u64,
    /// Sampling horizon; defaults to 1.5 times the predicted peak time.
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    #[arg(long, default_value_t = 512)]
    samples: usize,
    #[arg(long, value_enum, default_value_t = Mode::Auto)]
    mode: Mode,
    /// Write the sampled curve as CSV (header `t,probability`).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write the run summary as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long = "M")]
    m: u64,
    #[arg(long)]
    j: u32,
    #[arg(long, default_value_t = 0)]
    marked: u64,
    #[arg(long)]
    gamma: Option<f64>,
    /// Write the partition as JSON ({"cells": ..., "sizes": ...}).
    #[arg(long)]
    json: Option<PathBuf>,
    /// Emit the closed-form third-order census as CSV (j = 3 only).
    #[arg(long)]
    census: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long = "M")]
    m: u64,
    #[arg(long)]
    j: u32,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated initiator sizes, e.g. 8,16,32.
    #[arg(long = "M", value_delimiter = ',', required = true)]
    m: Vec<u64>,
    #[arg(long)]
    j: u32,
    #[arg(long, default_value_t = 512)]
    samples: usize,
    #[arg(long, value_enum, default_value_t = Mode::Auto)]
    mode: Mode,
    /// Directory receiving one CSV and one JSON file per configuration.
    #[arg(long = "output-dir")]
    output_dir: PathBuf,
    #[arg(long, default_value_t = 4)]
    workers: usize,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::NumericalFailure(_) => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure { code: EXIT_USAGE, message: format!("i/o error: {e}") }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(args) => simulate(&args),
        Command::Reduce(args) => reduce(&args),
        Command::Analyze(args) => analyze(&args),
        Command::Verify { suite } => verify(suite),
        Command::Sweep(args) => sweep(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// The run-time default rate: exact for j <= 2, practical 1/(M-1)^j beyond,
/// matching the figure settings.
fn default_gamma(m: u64, j: u32) -> Result<f64, Failure> {
    let choice = if j >= 3 { practical_gamma(m, j)? } else { critical_gamma(m, j)? };
    Ok(choice.value)
}

fn checked_n(m: u64, j: u32) -> Result<u64, Failure> {
    let mut n: u64 = 1;
    for _ in 0..j {
        n = n
            .checked_mul(m)
            .ok_or_else(|| Failure::usage(format!("M^j overflows a 64-bit index (M = {m}, j = {j})")))?;
    }
    Ok(n)
}

fn build_problem(m: u64, j: u32, marked: u64, gamma: f64) -> Result<SearchProblem, Failure> {
    let graph = Graph::complete(m)?.kron_power(j)?;
    Ok(SearchProblem::new(Arc::new(graph), marked, gamma)?)
}

fn simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let n = checked_n(args.m, args.j)?;
    let gamma = match args.gamma {
        Some(g) => g,
        None => default_gamma(args.m, args.j)?,
    };
    let predicted = predicted_runtime(n)?;
    let t_max = args.t_max.unwrap_or(1.5 * predicted);
    let problem = build_problem(args.m, args.j, args.marked, gamma)?;
    let result = probability_series(&problem, t_max, args.samples, args.mode.space()).map_err(
        |e| match e {
            Error::CapacityExceeded(msg) => Failure::usage(format!(
                "{msg}; rerun with --mode reduced to use the quotient space"
            )),
            other => Failure::from(other),
        },
    )?;

    if let Some(path) = &args.csv {
        let mut w = BufWriter::new(File::create(path)?);
        result.write_csv(&mut w)?;
        w.flush()?;
    }
    if let Some(path) = &args.json {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{}", result.json_summary(args.m, args.j, predicted))?;
        w.flush()?;
    }
    println!("peak_time = {:.12e}", result.peak_time);
    println!("peak_probability = {:.12e}", result.peak_probability);
    println!("predicted_time = {predicted:.12e}");
    if result.peak_on_boundary {
        println!("note: no interior maximum below t_max; peak reported at the boundary");
    }
    Ok(())
}

fn reduce(args: &ReduceArgs) -> Result<(), Failure> {
    if args.census {
        if args.j != 3 {
            return Err(Failure::usage("--census applies to j = 3 only"));
        }
        print!("{}", third_order_census(args.m)?.to_csv());
        return Ok(());
    }
    let gamma = match args.gamma {
        Some(g) => g,
        None => default_gamma(args.m, args.j)?,
    };
    let graph = Graph::complete(args.m)?.kron_power(args.j)?;
    let partition = equitable_partition(&graph, args.marked)?;
    let reduced = reduce_hamiltonian(&graph, &partition, gamma, args.marked)?;

    println!("cells = {}", partition.num_cells());
    println!("sizes = {:?}", partition.cell_sizes());
    println!("gamma = {gamma:.12e}");
    println!("reduced hamiltonian:");
    for row in reduced.matrix.row_iter() {
        let line: Vec<String> = row.iter().map(|x| format!("{x:+.12e}")).collect();
        println!("  [{}]", line.join(", "));
    }
    if let Some(path) = &args.json {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{}", partition.to_json()?)?;
        w.flush()?;
    }
    Ok(())
}

fn analyze(args: &AnalyzeArgs) -> Result<(), Failure> {
    let n = checked_n(args.m, args.j)?;
    let mut fields: Vec<String> = vec![
        format!("\"M\": {}", args.m),
        format!("\"j\": {}", args.j),
        format!("\"N\": {n}"),
        format!("\"predicted_time\": {:.12e}", predicted_runtime(n)?),
    ];
    match critical_gamma(args.m, args.j) {
        Ok(c) => {
            fields.push(format!("\"gamma\": {:.12e}", c.value));
            fields.push(format!("\"gamma_formula\": \"{}\"", c.formula.id()));
        }
        Err(Error::SingularFormula(msg)) => {
            let fallback = practical_gamma(args.m, args.j)?;
            fields.push(format!("\"gamma\": {:.12e}", fallback.value));
            fields.push(format!("\"gamma_formula\": \"{}\"", fallback.formula.id()));
            fields.push(format!("\"gamma_note\": \"{msg}\""));
        }
        Err(e) => return Err(e.into()),
    }
    if args.j >= 3 {
        let practical = practical_gamma(args.m, args.j)?;
        fields.push(format!("\"gamma_practical\": {:.12e}", practical.value));
    }
    if args.j == 2 {
        let p = srg_closed_form(args.m)?;
        let cond = srg_search_conditions(args.m)?;
        fields.push(format!(
            "\"srg\": {{\"N\": {}, \"k\": {}, \"lambda\": {}, \"mu\": {}}}",
            p.n, p.k, p.lambda, p.mu
        ));
        fields.push(format!(
            "\"srg_conditions\": {{\"k_over_N\": {:.12e}, \"k_over_muN23\": {:.12e}, \"satisfied\": {}}}",
            cond.k_over_n, cond.k_over_mu_n_23, cond.satisfied
        ));
    }
    if args.j == 3 {
        match perturbation_report(args.m) {
            Ok(r) => {
                fields.push(format!(
                    "\"perturbation\": {{\"E0\": {:.12e}, \"E1\": {:.12e}, \"gap\": {:.12e}, \
                     \"runtime_estimate\": {:.12e}, \"basis_note\": \"{}\"}}",
                    r.e0, r.e1, r.gap, r.runtime_estimate, r.basis_note
                ));
                let t = gamma_taylor_gap(args.m)?;
                fields.push(format!(
                    "\"taylor_gap\": {{\"difference\": {:.12e}, \"scaled\": {:.12e}}}",
                    t.difference, t.scaled
                ));
            }
            Err(Error::SingularFormula(msg)) => {
                fields.push(format!("\"perturbation_note\": \"{msg}\""));
            }
            Err(e) => return Err(e.into()),
        }
    }
    println!("{{{}}}", fields.join(", "));
    Ok(())
}

fn verify(suite: Suite) -> Result<(), Failure> {
    let mut checks: Vec<(String, bool)> = Vec::new();
    match suite {
        Suite::Srg => verify_srg(&mut checks)?,
        Suite::Census => verify_census(&mut checks)?,
        Suite::Quotient => verify_quotient(&mut checks)?,
        Suite::Diameter => verify_diameter(&mut checks)?,
        Suite::All => {
            verify_srg(&mut checks)?;
            verify_census(&mut checks)?;
            verify_quotient(&mut checks)?;
            verify_diameter(&mut checks)?;
        }
    }
    let mut failed = 0usize;
    for (name, ok) in &checks {
        println!("{:<44} {}", name, if *ok { "ok" } else { "FAIL" });
        if !ok {
            failed += 1;
        }
    }
    println!("{} checks, {} failed", checks.len(), failed);
    if failed > 0 {
        return Err(Failure { code: EXIT_VERIFY, message: format!("{failed} check(s) failed") });
    }
    Ok(())
}

fn verify_srg(checks: &mut Vec<(String, bool)>) -> Result<(), Failure> {
    for m in 3..=8u64 {
        let g = Graph::complete(m)?.kron_power(2)?;
        let expected = srg_closed_form(m)?;
        let ok = matches!(g.srg_params()?, SrgCheck::Params(p) if p == expected && p.feasibility_holds());
        checks.push((format!("srg: K_{m} x K_{m} brute force vs closed form"), ok));
    }
    Ok(())
}

fn verify_census(checks: &mut Vec<(String, bool)>) -> Result<(), Failure> {
    for m in 3..=5u64 {
        let g = Graph::complete(m)?.kron_power(3)?;
        let census = third_order_census(m)?;
        let mut ok = census.total_vertices() == m * m * m;
        for row in &census.rows {
            let mut count = 0u64;
            for v in 1..g.num_vertices() {
                let code = VertexCode::decode(v, m, 3)?;
                let pattern: Vec<bool> = code.positions.iter().map(|&p| p == 0).collect();
                if pattern == row.pattern {
                    count += 1;
                    if g.common_neighbor_count(0, v)? != row.mutual_neighbors {
                        ok = false;
                    }
                }
            }
            if count != row.count {
                ok = false;
            }
        }
        checks.push((format!("census: K_{m}^3 table vs pair enumeration"), ok));
    }
    Ok(())
}

fn verify_quotient(checks: &mut Vec<(String, bool)>) -> Result<(), Failure> {
    for (m, j) in [(4u64, 2u32), (4, 3), (5, 3)] {
        let gamma = critical_gamma(m, j)?.value;
        let problem = build_problem(m, j, 0, gamma)?;
        let n = problem.graph.num_vertices() as f64;
        let t_max = 2.0 * PI * n.sqrt();
        let full = probability_series(&problem, t_max, 200, Space::Full)?;
        let red = probability_series(&problem, t_max, 200, Space::Reduced)?;
        let worst = full
            .probabilities
            .iter()
            .zip(&red.probabilities)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        checks.push((format!("quotient: M = {m}, j = {j} reduced vs full"), worst <= 1e-8));
    }
    Ok(())
}

fn verify_diameter(checks: &mut Vec<(String, bool)>) -> Result<(), Failure> {
    for m in 3..=6u64 {
        for j in 2..=4u32 {
            if m.pow(j) > 4096 {
                continue;
            }
            let g = Graph::complete(m)?.kron_power(j)?;
            let ok = g.diameter()? == Diameter::Finite(2);
            checks.push((format!("diameter: K_{m}^{j} equals 2"), ok));
        }
    }
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<(), Failure> {
    if args.m.is_empty() {
        return Err(Failure::usage("sweep needs at least one --M value"));
    }
    if args.workers == 0 {
        return Err(Failure::usage("--workers must be at least 1"));
    }
    std::fs::create_dir_all(&args.output_dir)?;

    let tasks: Vec<SimulateArgs> = args
        .m
        .iter()
        .map(|&m| SimulateArgs {
            m,
            j: args.j,
            gamma: None,
            marked: 0,
            t_max: None,
            samples: args.samples,
            mode: args.mode,
            csv: Some(args.output_dir.join(format!("M{m}_j{}.csv", args.j))),
            json: Some(args.output_dir.join(format!("M{m}_j{}.json", args.j))),
        })
        .collect();

    let next = AtomicUsize::new(0);
    let failures: Mutex<Vec<Failure>> = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..args.workers.min(tasks.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(task) = tasks.get(i) else { break };
                if let Err(f) = simulate(task) {
                    failures.lock().unwrap().push(f);
                }
            });
        }
    });
    let mut failures = failures.into_inner().unwrap();
    if let Some(first) = failures.pop() {
        return Err(first);
    }
    println!("sweep complete: {} configurations in {}", tasks.len(), args.output_dir.display());
    Ok(())
}
