use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qwnet_core::fractal::{analytics, build_quantum_network, merge_schedule, simulate_merges, write_analytics_csv};
use qwnet_core::mqss::{run_mqss, Eavesdropper, MqssConfig};
use qwnet_core::network::{execute_schedule, load_network, plan_distribution, steiner_tree, ExecutionMode, NodeId};
use qwnet_core::readout::{correct_counts, load_device, CountVector, MatrixMode};
use qwnet_core::walk::{verify_table, ProtocolParams, FIDELITY_TOL};
use qwnet_core::{run_protocol, Error, ProtocolKind, ProtocolSpec, DEFAULT_SEED};

#[derive(Parser, Debug)]
#[command(name = "qwnet", version, about = "Quantum-walk entanglement swapping toolkit")]
struct Cli {
    /// Seed for every randomized path.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    output: Format,

    /// Suppress the summary line on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one swapping or merging protocol over every outcome.
    Swap(SwapArgs),
    /// Check the published correction tables against simulation.
    VerifyTables,
    /// Plan and execute GHZ distribution over a resource network.
    Distribute(DistributeArgs),
    /// Fractal network analytics, merge schedules and graphs.
    Fractal(FractalArgs),
    /// Multiparty secret sharing over a walk-generated GHZ state.
    Mqss(MqssArgs),
    /// Readout-error correction of measured counts.
    Readout(ReadoutArgs),
}

#[derive(Args, Debug)]
struct SwapArgs {
    #[arg(value_parser = parse_protocol)]
    protocol: ProtocolKind,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    bells: Option<usize>,
    /// Bell labels m,n,p,q for bell-d.
    #[arg(long, value_delimiter = ',', num_args = 4)]
    labels: Option<Vec<usize>>,
    /// Keep the coin sites unmeasured.
    #[arg(long)]
    retain: bool,
}

#[derive(Args, Debug)]
struct DistributeArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    terminals: Vec<NodeId>,
    #[arg(long, value_parser = parse_mode, default_value = "simulated")]
    mode: ExecutionMode,
    /// Simulation dimension; defaults to the network's.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    exact_steiner: bool,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("size").required(true).args(["t", "n"])))]
struct FractalArgs {
    /// Network iteration.
    #[arg(long)]
    t: Option<usize>,
    /// Gasket iteration.
    #[arg(long)]
    n: Option<usize>,
    /// Analytics rows for iterations 1..=t.
    #[arg(long, requires = "t")]
    analytics: bool,
    /// Merge schedule for the gasket.
    #[arg(long, requires = "n")]
    schedule: bool,
    /// Execute the merge schedule at this local dimension.
    #[arg(long, requires = "n")]
    simulate: Option<usize>,
    #[arg(long, value_enum, requires = "t")]
    graph: Option<GraphFormat>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GraphFormat {
    Json,
    Edges,
}

#[derive(Args, Debug)]
struct MqssArgs {
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 3)]
    participants: usize,
    #[arg(long, allow_negative_numbers = true)]
    secret: i64,
    #[arg(long, default_value_t = 100)]
    pairs: usize,
    #[arg(long, default_value_t = 0.05)]
    threshold: f64,
    /// Participant channel to intercept, or "none".
    #[arg(long, default_value = "none", value_parser = parse_eavesdrop)]
    eavesdrop: Eavesdropper,
}

#[derive(Args, Debug)]
struct ReadoutArgs {
    /// JSON object mapping bitstrings to counts.
    #[arg(long)]
    counts: PathBuf,
    /// Device table (CSV or JSON).
    #[arg(long)]
    device: PathBuf,
    #[arg(long, value_parser = parse_matrix_mode, default_value = "symmetric")]
    mode: MatrixMode,
    /// Device qubits to use, most significant first; defaults to the first rows.
    #[arg(long, value_delimiter = ',')]
    qubits: Option<Vec<String>>,
}

fn parse_protocol(s: &str) -> Result<ProtocolKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<ExecutionMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_matrix_mode(s: &str) -> Result<MatrixMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_eavesdrop(s: &str) -> Result<Eavesdropper, String> {
    if s == "none" {
        return Ok(Eavesdropper::None);
    }
    s.parse()
        .map(|channel| Eavesdropper::InterceptResend { channel })
        .map_err(|_| format!("expected a channel number or 'none', got '{s}'"))
}

/// Outcome of a subcommand: rendered stdout, a summary, and whether every
/// checked invariant held.
struct Report {
    body: String,
    summary: String,
    ok: bool,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidDimension(_)
            | Error::SizeCap { .. }
            | Error::ValueOutOfRange { .. }
            | Error::InvalidParameters(_)
            | Error::Network(_)
            | Error::Readout(_)
            | Error::SingularMatrix { .. }
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CmdResult = Result<Report, Failure>;

fn json<T: Serialize>(value: &T) -> Result<String, Failure> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn csv_rows<F>(header: &[&str], fill: F) -> Result<String, Failure>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    fill(&mut w)?;
    let bytes = w.into_inner().map_err(|e| Failure::Runtime(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn join<T: ToString>(xs: &[T], sep: &str) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(sep)
}

fn cmd_swap(a: &SwapArgs, fmt: Format) -> CmdResult {
    let labels = a
        .labels
        .as_ref()
        .map(|v| <[usize; 4]>::try_from(v.as_slice()).map_err(|_| Failure::Usage("--labels needs 4 values".into())))
        .transpose()?;
    let spec = ProtocolSpec {
        kind: a.protocol,
        local_dim: a.d,
        params: ProtocolParams { m: a.m, n: a.n, k: a.k, l: a.l, bells: a.bells, labels, retain: a.retain },
    };
    spec.validate()?;
    let result = run_protocol(&spec)?;
    let ok = result.all_recovered();
    let body = match fmt {
        Format::Json => json(&result)?,
        Format::Csv => csv_rows(&["outcome", "probability", "correction", "residual_fidelity", "fidelity"], |w| {
            for b in &result.branches {
                w.write_record([
                    join(&b.outcome, " "),
                    format!("{:.12}", b.probability),
                    b.correction_text.clone(),
                    format!("{:.12}", b.residual_fidelity),
                    format!("{:.12}", b.fidelity),
                ])?;
            }
            Ok(())
        })?,
    };
    let summary = format!(
        "{} d={}: {} outcomes, min fidelity {:.12}",
        a.protocol.cli_name(),
        result.d,
        result.branches.len(),
        result.min_fidelity()
    );
    Ok(Report { body, summary, ok })
}

fn cmd_verify_tables(fmt: Format) -> CmdResult {
    let reports = (1..=6).map(verify_table).collect::<Result<Vec<_>, _>>()?;
    let failed: Vec<_> = reports.iter().filter(|r| !r.all_verified()).collect();
    let body = match fmt {
        Format::Json => json(&reports)?,
        Format::Csv => csv_rows(
            &[
                "table",
                "outcome",
                "instances",
                "state_matches",
                "correction_recovers",
                "min_state_fidelity",
                "min_corrected_fidelity",
            ],
            |w| {
                for r in &reports {
                    for row in &r.rows {
                        w.write_record([
                            r.table.to_string(),
                            row.outcome.clone(),
                            row.instances.to_string(),
                            row.state_matches.to_string(),
                            row.correction_recovers.to_string(),
                            format!("{:.12}", row.min_state_fidelity),
                            format!("{:.12}", row.min_corrected_fidelity),
                        ])?;
                    }
                }
                Ok(())
            },
        )?,
    };
    let summary = if failed.is_empty() {
        "Tables 1-6: all rows verified".to_string()
    } else {
        let mut lines: Vec<String> = reports.iter().map(|r| r.summary()).collect();
        for r in &failed {
            lines.extend(r.mismatches().into_iter().map(|m| format!("  table {}: {m}", r.table)));
        }
        lines.join("\n")
    };
    Ok(Report { body, summary, ok: failed.is_empty() })
}

fn cmd_distribute(a: &DistributeArgs, seed: u64, fmt: Format) -> CmdResult {
    let net = load_network(&a.network)?;
    let d = a.d.unwrap_or(net.local_dim);
    let tree = steiner_tree(&net, &a.terminals, a.exact_steiner)?;
    let schedule = plan_distribution(&tree, &net)?;
    let result = execute_schedule(&schedule, a.mode, d, seed)?;
    let ok = result.fidelity.is_none_or(|f| f >= 1.0 - FIDELITY_TOL)
        && result.final_parties == result.terminals;

    #[derive(Serialize)]
    struct Out<'a> {
        tree: &'a qwnet_core::network::SteinerTree,
        root: Option<NodeId>,
        result: &'a qwnet_core::network::DistributionResult,
    }
    let body = match fmt {
        Format::Json => json(&Out { tree: &tree, root: schedule.root, result: &result })?,
        Format::Csv => csv_rows(
            &["step", "node", "protocol", "input_sites", "measured_sites", "output_parties", "outcome", "fidelity"],
            |w| {
                for s in &result.steps {
                    w.write_record([
                        s.index.to_string(),
                        s.node.to_string(),
                        s.protocol.cli_name().to_string(),
                        s.input_sites.to_string(),
                        s.measured_sites.to_string(),
                        join(&s.output_parties, " "),
                        s.outcome.as_deref().map(|o| join(o, " ")).unwrap_or_default(),
                        s.fidelity.map(|f| format!("{f:.12}")).unwrap_or_default(),
                    ])?;
                }
                Ok(())
            },
        )?,
    };
    let fid = result.fidelity.map(|f| format!("{f:.12}")).unwrap_or_else(|| "n/a (symbolic)".into());
    let summary = format!(
        "GHZ over [{}] at d={d}: {} steps, {} Bell pairs, fidelity {fid}",
        join(&result.final_parties, ","),
        result.step_count,
        result.resources_consumed
    );
    Ok(Report { body, summary, ok })
}

fn cmd_fractal(a: &FractalArgs, seed: u64, fmt: Format) -> CmdResult {
    if let Some(t) = a.t {
        if a.analytics {
            let records = (1..=t).map(analytics).collect::<Result<Vec<_>, _>>()?;
            let body = match fmt {
                Format::Json => json(&records)?,
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_analytics_csv(&records, &mut buf)?;
                    String::from_utf8(buf).expect("csv output is utf-8")
                }
            };
            let last = records.last().expect("t >= 1");
            let summary = format!("t={t}: N={} E={} C={:.6}", last.nodes, last.edges, last.clustering);
            let ok = records.iter().all(|r| r.brute_force.as_ref().is_none_or(|b| b.degree_law_holds));
            return Ok(Report { body, summary, ok });
        }
        let net = build_quantum_network(t)?;
        let summary = format!("F({t}): {} nodes, {} edges", net.node_count(), net.edge_count());
        let body = match a.graph.unwrap_or(GraphFormat::Json) {
            GraphFormat::Json => serde_json::to_string_pretty(&net.adjacency_json())? + "\n",
            GraphFormat::Edges => net.edge_list(),
        };
        return Ok(Report { body, summary, ok: true });
    }

    let n = a.n.expect("clap enforces --t or --n");
    if let Some(d) = a.simulate {
        let exec = simulate_merges(n, d, seed)?;
        let ok = exec.fidelity >= 1.0 - FIDELITY_TOL && exec.min_step_fidelity >= 1.0 - FIDELITY_TOL;
        let body = match fmt {
            Format::Json => json(&exec)?,
            Format::Csv => csv_rows(&["merge", "outcome"], |w| {
                for (i, o) in exec.outcomes.iter().enumerate() {
                    w.write_record([i.to_string(), join(o, " ")])?;
                }
                Ok(())
            })?,
        };
        let summary = format!("gasket N={n} at d={d}: {} merges, fidelity {:.12}", exec.merges, exec.fidelity);
        return Ok(Report { body, summary, ok });
    }
    if !a.schedule {
        return Err(Failure::Usage("with --n pass --schedule or --simulate <d>".into()));
    }
    let merges = merge_schedule(n)?;
    let body = match fmt {
        Format::Json => json(&merges)?,
        Format::Csv => csv_rows(&["merge", "x", "y", "side"], |w| {
            for (i, m) in merges.iter().enumerate() {
                let t = m.target;
                w.write_record([i.to_string(), t.x.to_string(), t.y.to_string(), t.side.to_string()])?;
            }
            Ok(())
        })?,
    };
    Ok(Report { body, summary: format!("gasket N={n}: {} merges", merges.len()), ok: true })
}

fn cmd_mqss(a: &MqssArgs, seed: u64, fmt: Format) -> CmdResult {
    let config = MqssConfig {
        local_dim: a.d,
        participants: a.participants,
        secret: a.secret,
        detecting_pairs: a.pairs,
        threshold: a.threshold,
        eavesdropper: a.eavesdrop,
        seed,
    };
    config.validate()?;
    let t = run_mqss(&config)?;
    let eavesdropped = t.config.eavesdropper != Eavesdropper::None;
    // An abort is the intended outcome when a channel is tapped.
    let ok = t.recovered() || (t.aborted && eavesdropped);
    let body = match fmt {
        Format::Json => json(&t)?,
        Format::Csv => csv_rows(
            &["participant", "eavesdropped", "pairs", "errors", "error_rate", "aborted", "share"],
            |w| {
                for (i, c) in t.channels.iter().enumerate() {
                    w.write_record([
                        c.participant.to_string(),
                        c.eavesdropped.to_string(),
                        c.check.pairs.to_string(),
                        c.check.errors.to_string(),
                        format!("{:.6}", c.check.error_rate),
                        c.check.aborted.to_string(),
                        t.shares.get(i).map(ToString::to_string).unwrap_or_default(),
                    ])?;
                }
                Ok(())
            },
        )?,
    };
    let summary = if t.aborted {
        "aborted: channel check exceeded the threshold".to_string()
    } else {
        format!(
            "secret {} reconstructed as {}",
            a.secret,
            t.reconstructed.map(|r| r.to_string()).unwrap_or_else(|| "nothing".into())
        )
    };
    Ok(Report { body, summary, ok })
}

fn cmd_readout(a: &ReadoutArgs, fmt: Format) -> CmdResult {
    let text = std::fs::read_to_string(&a.counts).map_err(Error::from)?;
    let map: BTreeMap<String, u64> = serde_json::from_str(&text).map_err(Error::from)?;
    let counts = CountVector::from_bitstring_map(&map)?;
    let device = load_device(&a.device)?;
    let rows: Vec<_> = match &a.qubits {
        Some(names) => names
            .iter()
            .map(|q| {
                device
                    .iter()
                    .find(|r| &r.qubit == q)
                    .ok_or_else(|| Failure::Usage(format!("qubit '{q}' not in device table")))
            })
            .collect::<Result<_, _>>()?,
        None => device.iter().take(counts.qubits).collect(),
    };
    if rows.len() != counts.qubits {
        return Err(Failure::Usage(format!(
            "counts cover {} qubits but {} device rows were selected",
            counts.qubits,
            rows.len()
        )));
    }
    let matrices = rows.iter().map(|r| r.matrix(a.mode)).collect::<Result<Vec<_>, _>>()?;
    let corrected = correct_counts(&counts, &matrices)?;
    let labels: Vec<String> =
        (0..corrected.probabilities.len()).map(|i| format!("{i:0width$b}", width = counts.qubits)).collect();

    #[derive(Serialize)]
    struct Out {
        qubits: Vec<String>,
        shots: u64,
        probabilities: BTreeMap<String, f64>,
        clipped_mass: f64,
    }
    let out = Out {
        qubits: rows.iter().map(|r| r.qubit.clone()).collect(),
        shots: counts.total(),
        probabilities: labels.iter().cloned().zip(corrected.probabilities.iter().copied()).collect(),
        clipped_mass: corrected.clipped_mass,
    };
    let body = match fmt {
        Format::Json => json(&out)?,
        Format::Csv => csv_rows(&["bitstring", "probability"], |w| {
            for (l, p) in labels.iter().zip(&corrected.probabilities) {
                w.write_record([l.clone(), format!("{p:.12}")])?;
            }
            Ok(())
        })?,
    };
    let summary = format!("{} shots over {} qubits, clipped mass {:.3e}", out.shots, counts.qubits, out.clipped_mass);
    Ok(Report { body, summary, ok: true })
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Swap(a) => cmd_swap(a, cli.output),
        Command::VerifyTables => cmd_verify_tables(cli.output),
        Command::Distribute(a) => cmd_distribute(a, cli.seed, cli.output),
        Command::Fractal(a) => cmd_fractal(a, cli.seed, cli.output),
        Command::Mqss(a) => cmd_mqss(a, cli.seed, cli.output),
        Command::Readout(a) => cmd_readout(a, cli.output),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let default_level = if cli.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(default_level)).init();

    match run(&cli) {
        Ok(report) => {
            let mut out = io::stdout().lock();
            if out.write_all(report.body.as_bytes()).and_then(|_| out.flush()).is_err() {
                return ExitCode::from(1);
            }
            if !cli.quiet || !report.ok {
                eprintln!("{}", report.summary);
            }
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
