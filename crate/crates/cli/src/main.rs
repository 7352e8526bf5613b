mod allais;
mod experiment;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use reu_core::domain::{AgentFile, Atoms, Gamble};
use reu_core::elicit::{verify_fair_lottery, EstimateMethod, Prizes, RiskGridSpec};
use reu_core::oracle::{Interview, LogicalClock, SimulatedOracle};
use reu_core::procedure::{InversionConfig, ProcedureConfig, RiskGridConfig, RiskSource, RunOutput, SqueezeConfig};
use reu_core::reu::canonicalize;
use reu_core::{eu, reu, Interpolation};
use reu_service::SessionStore;

use experiment::{execute, replay_dir, write_outputs, NoiseSettings, Subject};

#[derive(Parser)]
#[command(
    name = "reu-elicit",
    version,
    about = "Elicit risk attitudes and subjective probabilities by preference queries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the expected and risk-weighted expected utility of a gamble.
    Evaluate {
        #[arg(long)]
        agent: PathBuf,
        #[arg(long)]
        gamble: PathBuf,
    },
    /// Measure the risk function on a grid of lottery probabilities.
    ElicitRisk(RiskArgs),
    /// Measure the probability of an event.
    ElicitProb(ProbArgs),
    /// Check whether an n-way ticket lottery is fair for the agent.
    VerifyLottery {
        #[arg(long)]
        agent: PathBuf,
        /// Split the tickets into this many equal blocks.
        #[arg(long, conflicts_with = "cells")]
        n: Option<u32>,
        /// Use the agent file's atoms themselves as the lottery.
        #[arg(long)]
        cells: bool,
        #[arg(long)]
        tickets: Option<u32>,
    },
    /// Re-run a recorded experiment and compare with its results.
    Replay {
        #[arg(long)]
        dir: PathBuf,
    },
    /// Serve the HTTP session API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "REU_ELICIT_DATA_DIR", default_value = "reu-data")]
        data_dir: PathBuf,
        /// Static files served at `/`, such as a built browser client.
        #[arg(long)]
        ui_dir: Option<PathBuf>,
    },
    /// Show the Allais preferences under several risk functions.
    DemoAllais,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    agent: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    best: f64,
    #[arg(long, default_value_t = 0.0)]
    worst: f64,
    /// Money bracket width at which bisection stops.
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    /// Tickets per lottery; defaults to the least common multiple of the denominators.
    #[arg(long)]
    tickets: Option<u32>,
    /// Probability that each answer is flipped.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Extra answers drawn per query for a majority vote (2R + 1 in all).
    #[arg(long, default_value_t = 0)]
    repeats: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for results.json, samples.csv, transcript.jsonl and meta.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn prizes(&self) -> Prizes {
        Prizes { best: self.best, worst: self.worst }
    }

    fn noise(&self) -> NoiseSettings {
        NoiseSettings { epsilon: self.noise, repeats: self.repeats, seed: self.seed }
    }
}

#[derive(Args)]
struct RiskArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',', default_values_t = RiskGridSpec::dyadic(5))]
    denominators: Vec<u32>,
    #[arg(long, value_enum, default_value_t = Interp::Linear)]
    interpolation: Interp,
}

#[derive(Clone, Copy, ValueEnum)]
enum Interp {
    Linear,
    MonotoneCubic,
}

impl From<Interp> for Interpolation {
    fn from(i: Interp) -> Self {
        match i {
            Interp::Linear => Interpolation::Linear,
            Interp::MonotoneCubic => Interpolation::MonotoneCubic,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Inversion,
    Squeeze,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RiskChoice {
    /// The risk function written in the agent file.
    Agent,
    /// Measure a grid first and invert the reconstruction.
    Measure,
}

#[derive(Args)]
struct ProbArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = Method::Both)]
    method: Method,
    /// Cells of the agent file making up the event.
    #[arg(long, value_delimiter = ',', required_unless_present = "event_prob")]
    target: Vec<String>,
    /// Ignore the agent's atoms and ask about an event `E` of this probability.
    #[arg(long, conflicts_with = "target")]
    event_prob: Option<f64>,
    #[arg(long, value_enum, default_value_t = RiskChoice::Agent)]
    risk: RiskChoice,
    /// Grid used with `--risk measure`.
    #[arg(long, value_delimiter = ',', default_values_t = RiskGridSpec::dyadic(5))]
    denominators: Vec<u32>,
    #[arg(long, value_enum, default_value_t = Interp::Linear)]
    interpolation: Interp,
    /// Squeeze denominators.
    #[arg(long, value_delimiter = ',', default_values_t = RiskGridSpec::dyadic(12))]
    schedule: Vec<u32>,
    /// Squeeze bracket width at which to stop.
    #[arg(long, default_value_t = 1.0 / 4096.0)]
    tol: f64,
}

fn lcm(ns: &[u32]) -> u32 {
    fn gcd(a: u32, b: u32) -> u32 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    ns.iter().fold(1, |acc, &n| if n == 0 { acc } else { acc / gcd(acc, n) * n })
}

fn report_issues(cfg: &ProcedureConfig) -> Result<()> {
    let issues = cfg.diagnostics();
    if issues.is_empty() {
        return Ok(());
    }
    for i in &issues {
        eprintln!("invalid {}: {}", i.field, i.message);
    }
    bail!("configuration rejected")
}

fn finish(
    out: &RunOutput,
    dir: Option<&Path>,
    cfg: &ProcedureConfig,
    subject: &Subject,
    noise: NoiseSettings,
) -> Result<()> {
    if let Some(dir) = dir {
        write_outputs(dir, cfg, out, subject, noise)?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}

fn elicit_risk(args: RiskArgs) -> Result<()> {
    let c = &args.common;
    let subject = Subject::load(&c.agent, c.tickets.unwrap_or_else(|| lcm(&args.denominators)))?;
    let cfg = ProcedureConfig::RiskGrid(RiskGridConfig {
        frame: subject.frame.clone(),
        denominators: args.denominators.clone(),
        prizes: c.prizes(),
        utility: Some(subject.agent.u.clone()),
        epsilon: c.epsilon,
        interpolation: args.interpolation.into(),
    });
    report_issues(&cfg)?;
    let out = execute(&cfg, &subject, c.noise())?;
    println!("{:>7} {:>14} {:>14} {:>10}", "p", "weight", "agent r(p)", "error");
    let mut sup: f64 = 0.0;
    for s in &out.bundle.samples {
        let truth = subject.agent.r.eval(s.prob.to_f64());
        sup = sup.max((s.weight - truth).abs());
        println!("{:>7} {:>14.9} {:>14.9} {:>10.2e}", s.prob.to_string(), s.weight, truth, (s.weight - truth).abs());
    }
    println!("{} queries, {} extra noisy draws; max error {sup:.2e}", out.stats.query_count, out.stats.repeats_used);
    finish(&out, c.out.as_deref(), &cfg, &subject, c.noise())
}

fn elicit_prob(args: ProbArgs) -> Result<()> {
    let c = &args.common;
    let mut denominators = Vec::new();
    if args.method != Method::Inversion {
        denominators.extend(&args.schedule);
    }
    if args.method != Method::Squeeze && args.risk == RiskChoice::Measure {
        denominators.extend(&args.denominators);
    }
    let tickets = c.tickets.unwrap_or_else(|| lcm(&denominators));
    let (subject, target) = match args.event_prob {
        Some(p) => {
            if !(0.0..=1.0).contains(&p) {
                bail!("--event-prob must lie in [0, 1], got {p}");
            }
            let mut file =
                AgentFile::load(&c.agent).with_context(|| format!("reading agent file {}", c.agent.display()))?;
            file.atoms = Atoms::Labels(vec!["E".into(), "not E".into()]);
            file.weights = Some(vec![p, 1.0 - p]);
            (Subject::from_file(file, tickets)?, vec!["E".to_string()])
        }
        None => (Subject::load(&c.agent, tickets)?, args.target.clone()),
    };
    let truth = subject.agent.p.event_probability(&subject.frame.cells_event(&target).unwrap_or_default())?;

    let mut runs = Vec::new();
    if args.method != Method::Squeeze {
        let risk = match args.risk {
            RiskChoice::Agent => RiskSource::Known(subject.agent.r.clone()),
            RiskChoice::Measure => RiskSource::Measure {
                denominators: args.denominators.clone(),
                interpolation: args.interpolation.into(),
            },
        };
        let cfg = ProcedureConfig::ProbInversion(InversionConfig {
            frame: subject.frame.clone(),
            target: target.clone(),
            prizes: c.prizes(),
            utility: Some(subject.agent.u.clone()),
            epsilon: c.epsilon,
            risk: Some(risk),
        });
        runs.push(("inversion", cfg));
    }
    if args.method != Method::Inversion {
        let cfg = ProcedureConfig::ProbSqueeze(SqueezeConfig {
            frame: subject.frame.clone(),
            target: target.clone(),
            prizes: c.prizes(),
            schedule: args.schedule.clone(),
            tol: args.tol,
            verify_lotteries: false,
        });
        runs.push(("squeeze", cfg));
    }
    for (_, cfg) in &runs {
        report_issues(cfg)?;
    }
    for (label, cfg) in &runs {
        let out = execute(cfg, &subject, c.noise())?;
        for e in &out.bundle.estimates {
            let how = match e.method {
                EstimateMethod::Inversion => "inversion",
                EstimateMethod::Squeeze => "squeeze",
                EstimateMethod::ExactLottery => "squeeze, exact lottery match",
            };
            println!(
                "p({}) = {:.9} in [{}, {}] ({how}, {} queries{}); true {truth:.9}, error {:.2e}",
                e.target,
                e.value,
                e.bracket.0,
                e.bracket.1,
                e.query_count,
                if e.converged { "" } else { ", not converged" },
                (e.value - truth).abs()
            );
        }
        let dir = match (&c.out, args.method) {
            (Some(d), Method::Both) => Some(d.join(label)),
            (d, _) => d.clone(),
        };
        finish(&out, dir.as_deref(), cfg, &subject, c.noise())?;
    }
    Ok(())
}

fn evaluate(agent: &Path, gamble: &Path) -> Result<()> {
    let file = AgentFile::load(agent).with_context(|| format!("reading agent file {}", agent.display()))?;
    let agent = file.agent()?;
    let text = std::fs::read_to_string(gamble).with_context(|| format!("reading {}", gamble.display()))?;
    let g: Gamble = serde_json::from_str(&text).with_context(|| format!("parsing {}", gamble.display()))?;
    g.validate(agent.n_atoms())?;
    let canon = canonicalize(&g, &agent.u)?;
    println!("{:>14} {:>12} {:>12}", "utility", "probability", "P(at least)");
    let mut tail: f64 = 1.0;
    for e in &canon.entries {
        let p = agent.p.event_probability(&e.event)?;
        println!("{:>14.6} {:>12.6} {:>12.6}", e.utility, p, tail.max(0.0));
        tail -= p;
    }
    println!("EU  = {:.12}", eu(&agent, &g)?);
    println!("REU = {:.12}  (risk {})", reu(&agent, &g)?, agent.r.name());
    Ok(())
}

fn verify_lottery(agent: &Path, n: Option<u32>, cells: bool, tickets: Option<u32>) -> Result<()> {
    let file = AgentFile::load(agent).with_context(|| format!("reading agent file {}", agent.display()))?;
    let (subject, partition) = if cells {
        let subject = Subject::from_file(file, 1)?;
        let partition = (0..subject.frame.cells().len()).map(|i| reu_core::Event::from_indices([i])).collect();
        (subject, partition)
    } else {
        let Some(n) = n else { bail!("give --n or --cells") };
        let subject = Subject::from_file(file, tickets.unwrap_or(n))?;
        let partition = subject.frame.lottery(n)?.events;
        (subject, partition)
    };
    let mut oracle = SimulatedOracle::new(subject.agent.clone());
    let clock = LogicalClock::default();
    let mut iv = Interview::new(&mut oracle, &clock, &subject.frame, subject.frame.n_atoms());
    let fair = verify_fair_lottery(&mut iv, &partition, Prizes::default())?;
    for e in iv.entries() {
        println!("{:>3}. {}  vs  {}: {:?}", e.id, iv.render(&e.left), iv.render(&e.right), e.answer);
    }
    println!(
        "{}-way lottery is {} ({} queries)",
        partition.len(),
        if fair { "fair" } else { "not fair" },
        iv.query_count()
    );
    Ok(())
}

fn replay(dir: &Path) -> Result<()> {
    let out = replay_dir(dir)?;
    println!("replay of {} reproduces results.json ({} queries)", dir.display(), out.bundle.query_count);
    Ok(())
}

fn serve(host: &str, port: u16, data_dir: PathBuf, ui_dir: Option<PathBuf>) -> Result<()> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let store = Arc::new(SessionStore::open(&data_dir).with_context(|| format!("opening {}", data_dir.display()))?);
        let listener =
            tokio::net::TcpListener::bind((host, port)).await.with_context(|| format!("binding {host}:{port}"))?;
        println!("listening on http://{}/api/v1", listener.local_addr()?);
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        reu_service::serve(listener, store, ui_dir, shutdown).await?;
        Ok(())
    })
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Evaluate { agent, gamble } => evaluate(&agent, &gamble),
        Command::ElicitRisk(args) => elicit_risk(args),
        Command::ElicitProb(args) => elicit_prob(args),
        Command::VerifyLottery { agent, n, cells, tickets } => verify_lottery(&agent, n, cells, tickets),
        Command::Replay { dir } => replay(&dir),
        Command::Serve { port, host, data_dir, ui_dir } => serve(&host, port, data_dir, ui_dir),
        Command::DemoAllais => allais::demo(),
    }
}

/// Exit status 2 marks answers or records that contradict the model; 1 is
/// any other failure.
fn exit_status(err: &anyhow::Error) -> u8 {
    use reu_core::{Error, OracleError};
    let inconsistent = err.chain().any(|cause| {
        matches!(
            cause.downcast_ref::<Error>(),
            Some(
                Error::Inconsistency(_)
                    | Error::MonotonicityViolation(_)
                    | Error::FairnessUnavailable(_)
                    | Error::Oracle(OracleError::ReplayDivergence { .. })
            )
        )
    });
    if inconsistent {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_status(&e))
        }
    }
}
