//! Command-line front end.
//!
//! Exit codes: 0 success, 2 bad input, 3 numerical failure, 4 a verification
//! check exceeded its tolerance.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::{
    column_space_evolution_check, default_samples, default_scan_window, fmt17, scan_spectrum,
    spectral_decompose,
};
use crate::error::{Error, Result};
use crate::graph::{column_partition, hypercube, path_graph, read_edge_list, Graph};
use crate::pst::{transfer_report, TransferOptions, TransferReport, Verdict};
use crate::spin::{
    engineered_couplings, full_hamiltonian, heisenberg_fields, total_sz, CouplingChain,
    CouplingNetwork, FieldProfile, Model,
};
use crate::walk::{hitting_growth_profile_with, RateConvention};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "spinnet",
    version,
    about = "Perfect state transfer on qubit spin networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Transfer amplitude F(t) from input to output on a time grid.
    Fidelity(FidelityArgs),
    /// Search for perfect transfer times and check eigenvalue rationality.
    Pst(PstArgs),
    /// Engineered couplings and Heisenberg compensating fields for a chain.
    ChainSynthesize(ChainArgs),
    /// Classical corner-to-corner hitting times of hypercubes.
    Hitting(HittingArgs),
    /// Cross-check subspace dynamics against independent computations.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Uniform chain with N sites.
    #[arg(long, value_name = "N")]
    path: Option<usize>,
    /// Hypercube of dimension D (see --links).
    #[arg(long, value_name = "D")]
    hypercube: Option<usize>,
    /// Engineered chain with N sites (see --lambda).
    #[arg(long, value_name = "N")]
    engineered: Option<usize>,
    /// Edge-list file.
    #[arg(long, value_name = "FILE")]
    edges: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct NetworkArgs {
    #[command(flatten)]
    source: Source,
    /// Links per hypercube factor: 1 or 2.
    #[arg(long, default_value_t = 1)]
    links: usize,
    /// Transfer rate of the engineered chain.
    #[arg(long, default_value_t = 2.0)]
    lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Table,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FidelityArgs {
    #[command(flatten)]
    network: NetworkArgs,
    /// End of the time window.
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct PstArgs {
    #[command(flatten)]
    network: NetworkArgs,
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Transfer counts as perfect when |F| ≥ 1 − tol.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Largest denominator tried for eigenvalue-gap ratios.
    #[arg(long, default_value_t = 1_000_000)]
    qmax: u64,
    /// Ratio r counts as p/q when |q·r − p| < this.
    #[arg(long, default_value_t = 1e-9)]
    rational_tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct ChainArgs {
    /// Number of sites.
    #[arg(long = "sites", short = 'n', value_name = "N")]
    sites: usize,
    #[arg(long, default_value_t = 2.0)]
    lambda: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct HittingArgs {
    #[arg(long, default_value_t = 1)]
    links: usize,
    /// Largest hypercube dimension.
    #[arg(long)]
    dmax: usize,
    #[arg(long, value_enum, default_value_t = RateConvention::PerVertex)]
    rates: RateConvention,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Xx,
    Heisenberg,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    network: NetworkArgs,
    #[arg(long, value_enum, default_value_t = ModelArg::Xx)]
    model: ModelArg,
    /// Check the column-space reduction instead of the full Hilbert space.
    #[arg(long)]
    columns: bool,
    #[arg(long, default_value_t = 10.0)]
    tmax: f64,
    #[arg(long, default_value_t = 101)]
    samples: usize,
    /// Largest deviation that still passes.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit code. Results go to `out` unless `--out` names a file; diagnostics
/// go to standard error.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return if e.use_stderr() {
                let _ = e.print();
                EXIT_INPUT
            } else {
                let _ = write!(out, "{}", e.render());
                EXIT_OK
            };
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                EXIT_INPUT
            } else {
                EXIT_NUMERICAL
            }
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Fidelity(args) => fidelity(args, out),
        Command::Pst(args) => pst(args, out),
        Command::ChainSynthesize(args) => chain_synthesize(args, out),
        Command::Hitting(args) => hitting(args, out),
        Command::Verify(args) => verify(args, out),
    }
}

/// A network with its designated terminals, plus the chain it came from if any.
struct Resolved {
    description: String,
    network: CouplingNetwork,
    graph: Option<Graph>,
    chain: Option<CouplingChain>,
    input: usize,
    output: usize,
}

impl NetworkArgs {
    fn resolve(&self) -> Result<Resolved> {
        let s = &self.source;
        if let Some(n) = s.engineered {
            let chain = engineered_couplings(n, self.lambda)?;
            return Ok(Resolved {
                description: format!("engineered chain N={n} lambda={}", self.lambda),
                network: (&chain).into(),
                graph: None,
                chain: Some(chain),
                input: 1,
                output: n,
            });
        }
        let (description, graph, chain) = if let Some(n) = s.path {
            let graph = path_graph(n)?;
            let chain = if n >= 2 {
                Some(CouplingChain::uniform(n, 1.0)?)
            } else {
                None
            };
            (format!("path N={n}"), graph, chain)
        } else if let Some(d) = s.hypercube {
            (
                format!("hypercube d={d} links={}", self.links),
                hypercube(d, self.links)?,
                None,
            )
        } else if let Some(file) = &s.edges {
            (
                format!("edge list {}", file.display()),
                read_edge_list(file)?,
                None,
            )
        } else {
            unreachable!("clap requires exactly one graph source")
        };
        Ok(Resolved {
            description,
            network: (&graph).into(),
            input: graph.input_vertex(),
            output: graph.output_vertex(),
            graph: Some(graph),
            chain,
        })
    }
}

/// Writes to `--out` when given, otherwise to `out`.
fn emit(
    path: &Option<PathBuf>,
    out: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match path {
        Some(p) => {
            let mut file = BufWriter::new(File::create(p)?);
            body(&mut file)?;
            file.flush()?;
        }
        None => {
            body(out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn unsupported_format(format: Format, command: &str) -> Error {
    Error::Unsupported(format!("{command} does not support --format {format:?}").to_lowercase())
}

fn require_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidSize(format!(
            "{name} must be positive, got {value}"
        )))
    }
}

fn fidelity(args: FidelityArgs, out: &mut dyn Write) -> Result<i32> {
    let format = args.output.format.unwrap_or(Format::Csv);
    if format == Format::Table {
        return Err(unsupported_format(format, "fidelity"));
    }
    let net = args.network.resolve()?;
    let spectrum = spectral_decompose(&net.network.subspace_hamiltonian());
    let t_max = args.tmax.unwrap_or_else(|| default_scan_window(&spectrum));
    require_positive("tmax", t_max)?;
    let samples = args
        .samples
        .unwrap_or_else(|| default_samples(&spectrum, t_max));
    let series = scan_spectrum(&spectrum, t_max, samples, net.input, net.output)?;
    emit(&args.output.out, out, |w| match format {
        Format::Json => Ok(writeln!(w, "{}", series.to_json())?),
        _ => series.write_csv(w),
    })?;
    Ok(EXIT_OK)
}

fn pst(args: PstArgs, out: &mut dyn Write) -> Result<i32> {
    for (name, v) in [("tol", args.tol), ("rational-tol", args.rational_tol)] {
        require_positive(name, v)?;
    }
    if let Some(t) = args.tmax {
        require_positive("tmax", t)?;
    }
    let net = args.network.resolve()?;
    let options = TransferOptions {
        t_max: args.tmax,
        samples: args.samples,
        pst_tolerance: args.tol,
        q_max: args.qmax,
        rational_tolerance: args.rational_tol,
    };
    let report = transfer_report(
        &net.description,
        &net.network,
        net.input,
        net.output,
        &options,
    )?;
    emit(&args.output.out, out, |w| {
        match args.output.format.unwrap_or(Format::Table) {
            Format::Table => write!(w, "{}", report.to_table())?,
            Format::Json => writeln!(w, "{}", report.to_json())?,
            Format::Csv => write_report_csv(&report, w)?,
        }
        Ok(())
    })?;
    Ok(EXIT_OK)
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::AllRationalWithinBound => "all-rational-within-bound",
        Verdict::SomeIrrationalBeyondBound => "some-irrational-beyond-bound",
    }
}

fn write_report_csv(r: &TransferReport, w: &mut dyn Write) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    let to_io = |e: csv::Error| Error::Io(e.into());
    csv.write_record([
        "network",
        "sites",
        "input",
        "output",
        "distance",
        "t_max",
        "samples",
        "pst_times",
        "peak_time",
        "peak_magnitude",
        "rationality",
    ])
    .map_err(to_io)?;
    csv.write_record([
        r.network.description.clone(),
        r.network.sites.to_string(),
        r.network.input.to_string(),
        r.network.output.to_string(),
        r.distance.to_string(),
        fmt17(r.t_max),
        r.samples.to_string(),
        r.pst_times
            .iter()
            .map(|&t| fmt17(t))
            .collect::<Vec<_>>()
            .join(";"),
        fmt17(r.peak_time),
        fmt17(r.peak_magnitude),
        r.rationality
            .as_ref()
            .map_or("not-applicable", |x| verdict_name(x.verdict))
            .to_string(),
    ])
    .map_err(to_io)?;
    csv.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SynthesizedChain<'a> {
    chain: &'a CouplingChain,
    /// Compensating fields for the Heisenberg model; absent below 3 sites.
    fields: Option<FieldProfile>,
}

fn chain_synthesize(args: ChainArgs, out: &mut dyn Write) -> Result<i32> {
    let chain = engineered_couplings(args.sites, args.lambda)?;
    let fields = match heisenberg_fields(&chain) {
        Ok(f) => Some(f),
        Err(Error::UndefinedFields(_)) => None,
        Err(e) => return Err(e),
    };
    let format = args.output.format.unwrap_or(Format::Json);
    if format == Format::Table {
        return Err(unsupported_format(format, "chain-synthesize"));
    }
    emit(&args.output.out, out, |w| {
        if format == Format::Json {
            let body = SynthesizedChain {
                chain: &chain,
                fields,
            };
            writeln!(
                w,
                "{}",
                serde_json::to_string_pretty(&body).expect("chain serializes")
            )?;
            return Ok(());
        }
        let mut csv = csv::Writer::from_writer(w);
        let to_io = |e: csv::Error| Error::Io(e.into());
        csv.write_record(["n", "J", "B"]).map_err(to_io)?;
        for n in 1..=chain.site_count() {
            let j = chain
                .couplings()
                .get(n - 1)
                .map(|&j| fmt17(j))
                .unwrap_or_default();
            let b = fields
                .as_ref()
                .map(|f| fmt17(f.fields()[n - 1]))
                .unwrap_or_default();
            csv.write_record([n.to_string(), j, b]).map_err(to_io)?;
        }
        csv.flush()?;
        Ok(())
    })?;
    Ok(EXIT_OK)
}

fn hitting(args: HittingArgs, out: &mut dyn Write) -> Result<i32> {
    let format = args.output.format.unwrap_or(Format::Csv);
    if format == Format::Table {
        return Err(unsupported_format(format, "hitting"));
    }
    let profile = hitting_growth_profile_with(args.dmax, args.links, args.rates)?;
    emit(&args.output.out, out, |w| match format {
        Format::Json => Ok(writeln!(w, "{}", profile.to_json())?),
        _ => profile.write_csv(w),
    })?;
    Ok(EXIT_OK)
}

/// Outcome of one `verify` run.
#[derive(Debug, Serialize)]
struct VerifyReport {
    check: &'static str,
    network: String,
    t_max: f64,
    samples: usize,
    tolerance: f64,
    /// Largest discrepancy between the two computations.
    max_deviation: f64,
    /// Weight found outside the subspace the reduction assumes.
    leakage: f64,
    /// `‖[H, Σσᶻ]‖_F` for the full-space checks.
    commutator_norm: Option<f64>,
    passed: bool,
}

fn time_grid(t_max: f64, samples: usize) -> Result<Vec<f64>> {
    require_positive("tmax", t_max)?;
    if samples < 2 {
        return Err(Error::InvalidSize(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    Ok((0..samples)
        .map(|k| t_max * k as f64 / (samples - 1) as f64)
        .collect())
}

fn verify(args: VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    require_positive("tol", args.tol)?;
    let times = time_grid(args.tmax, args.samples)?;
    let net = args.network.resolve()?;
    let report = if args.columns {
        let graph = net
            .graph
            .as_ref()
            .ok_or_else(|| Error::Unsupported("--columns needs an unweighted graph".into()))?;
        let partition = column_partition(graph)?;
        let check = column_space_evolution_check(graph, &partition, &times)?;
        VerifyReport {
            check: "column-space",
            network: net.description.clone(),
            t_max: args.tmax,
            samples: args.samples,
            tolerance: args.tol,
            max_deviation: check.chain_deviation,
            leakage: check.leakage,
            commutator_norm: None,
            passed: check.chain_deviation < args.tol && check.leakage < args.tol,
        }
    } else {
        match args.model {
            ModelArg::Xx => verify_xx(&net, &times, args.tol)?,
            ModelArg::Heisenberg => verify_heisenberg(&net, &times, args.tol)?,
        }
    };
    let format = args.output.format.unwrap_or(Format::Table);
    emit(&args.output.out, out, |w| {
        match format {
            Format::Json => writeln!(
                w,
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            )?,
            Format::Table => write!(w, "{}", verify_table(&report))?,
            Format::Csv => {
                let mut csv = csv::Writer::from_writer(w);
                let to_io = |e: csv::Error| Error::Io(e.into());
                csv.write_record([
                    "check",
                    "network",
                    "t_max",
                    "samples",
                    "tolerance",
                    "max_deviation",
                    "leakage",
                    "commutator_norm",
                    "passed",
                ])
                .map_err(to_io)?;
                csv.write_record([
                    report.check.to_string(),
                    report.network.clone(),
                    fmt17(report.t_max),
                    report.samples.to_string(),
                    fmt17(report.tolerance),
                    fmt17(report.max_deviation),
                    fmt17(report.leakage),
                    report.commutator_norm.map(fmt17).unwrap_or_default(),
                    report.passed.to_string(),
                ])
                .map_err(to_io)?;
                csv.flush()?;
            }
        }
        Ok(())
    })?;
    Ok(if report.passed { EXIT_OK } else { EXIT_VERIFY })
}

fn verify_table(r: &VerifyReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<16} {}", "check", r.check);
    let _ = writeln!(s, "{:<16} {}", "network", r.network);
    let _ = writeln!(
        s,
        "{:<16} [0, {}] with {} samples",
        "times", r.t_max, r.samples
    );
    let _ = writeln!(s, "{:<16} {:.3e}", "max deviation", r.max_deviation);
    let _ = writeln!(s, "{:<16} {:.3e}", "leakage", r.leakage);
    if let Some(c) = r.commutator_norm {
        let _ = writeln!(s, "{:<16} {:.3e}", "[H, Sz]", c);
    }
    let verdict = if r.passed { "PASS" } else { "FAIL" };
    let _ = writeln!(
        s,
        "{:<16} {verdict} (tolerance {:.0e})",
        "result", r.tolerance
    );
    s
}

/// Full `2^N` XX evolution of `(|0̲⟩ + |input⟩)/√2` against the subspace propagator.
fn verify_xx(net: &Resolved, times: &[f64], tol: f64) -> Result<VerifyReport> {
    let full = full_hamiltonian(&net.network, Model::Xx, None)?;
    let commutator = full
        .matrix()
        .commutator_norm(&total_sz(net.network.sites())?);
    let spectrum = spectral_decompose(&net.network.subspace_hamiltonian());
    let n = net.network.sites();
    let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut beta0 = DVector::zeros(n);
    beta0[net.input - 1] = amp;
    let mut psi = full.embed(amp, &beta0);
    let (mut deviation, mut leakage, mut previous) = (0.0f64, 0.0f64, 0.0);
    for &t in times {
        psi = full.evolve(&psi, t - previous);
        previous = t;
        let (alpha, beta, rest) = full.project(&psi);
        let expected = spectrum.evolve(&beta0, t);
        deviation = deviation.max((alpha - amp).norm());
        deviation = deviation.max(
            (beta - expected)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max),
        );
        leakage = leakage.max(rest);
    }
    Ok(VerifyReport {
        check: "xx-full-space",
        network: net.description.clone(),
        t_max: *times.last().expect("grid is nonempty"),
        samples: times.len(),
        tolerance: tol,
        max_deviation: deviation,
        leakage,
        commutator_norm: Some(commutator),
        passed: deviation < tol && leakage < tol && commutator < 1e-12,
    })
}

/// `|F(t)|` of the fielded Heisenberg chain on the full space against the XX subspace.
fn verify_heisenberg(net: &Resolved, times: &[f64], tol: f64) -> Result<VerifyReport> {
    let chain = net.chain.as_ref().ok_or_else(|| {
        Error::Unsupported("the Heisenberg check needs a chain (--path or --engineered)".into())
    })?;
    let fields = heisenberg_fields(chain)?;
    let full = full_hamiltonian(&net.network, Model::Heisenberg, Some(&fields))?;
    let commutator = full
        .matrix()
        .commutator_norm(&total_sz(chain.site_count())?);
    let spectrum = spectral_decompose(&net.network.subspace_hamiltonian());
    let mut beta0 = DVector::zeros(chain.site_count());
    beta0[net.input - 1] = Complex64::new(1.0, 0.0);
    let mut psi = full.embed(Complex64::new(0.0, 0.0), &beta0);
    let (mut deviation, mut leakage, mut previous) = (0.0f64, 0.0f64, 0.0);
    for &t in times {
        psi = full.evolve(&psi, t - previous);
        previous = t;
        let (_, beta, rest) = full.project(&psi);
        let xx = spectrum.amplitude(net.input, net.output, t).norm();
        deviation = deviation.max((beta[net.output - 1].norm() - xx).abs());
        leakage = leakage.max(rest);
    }
    Ok(VerifyReport {
        check: "heisenberg-full-space",
        network: net.description.clone(),
        t_max: *times.last().expect("grid is nonempty"),
        samples: times.len(),
        tolerance: tol,
        max_deviation: deviation,
        leakage,
        commutator_norm: Some(commutator),
        passed: deviation < tol && leakage < tol && commutator < 1e-12,
    })
}

/// Convenience for tests and embedding: runs with arguments given as strings
/// and captures standard output.
pub fn run_captured(args: &[&str]) -> (i32, String) {
    let mut buf = Vec::new();
    let code = run(
        std::iter::once("spinnet").chain(args.iter().copied()),
        &mut buf,
    );
    (code, String::from_utf8(buf).expect("output is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_synthesize_json() {
        let (code, out) = run_captured(&["chain-synthesize", "--sites", "3", "--lambda", "2"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["chain"]["N"], 3);
        let j = v["chain"]["J"].as_array().unwrap();
        assert!((j[0].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(v["fields"]["B"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn one_site_chain_is_input_error() {
        assert_eq!(
            run_captured(&["chain-synthesize", "--sites", "1"]).0,
            EXIT_INPUT
        );
    }

    #[test]
    fn two_graph_sources_are_rejected() {
        assert_eq!(
            run_captured(&["pst", "--path", "3", "--hypercube", "2"]).0,
            EXIT_INPUT
        );
        assert_eq!(run_captured(&["pst"]).0, EXIT_INPUT);
    }

    #[test]
    fn hitting_single_row() {
        let (code, out) = run_captured(&["hitting", "--links", "1", "--dmax", "1"]);
        assert_eq!(code, 0);
        assert_eq!(out, "d,sites,hitting,ratio\n1,2,1.0000000000000000e0,\n");
    }

    #[test]
    fn verify_path() {
        let (code, out) =
            run_captured(&["verify", "--path", "6", "--model", "xx", "--format", "json"]);
        assert_eq!(code, 0, "{out}");
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v["max_deviation"].as_f64().unwrap() < 1e-10);
    }

    #[test]
    fn failing_verification_exits_4() {
        let (code, _) = run_captured(&["verify", "--path", "4", "--tol", "1e-300"]);
        assert_eq!(code, EXIT_VERIFY);
    }

    #[test]
    fn help_goes_to_output() {
        let (code, out) = run_captured(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("fidelity"));
    }
}
