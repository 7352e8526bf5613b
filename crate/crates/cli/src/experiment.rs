//! Simulated runs and the files they leave behind.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use reu_core::domain::{Agent, AgentFile};
use reu_core::export::{write_json, write_samples_csv};
use reu_core::oracle::{read_jsonl, LogicalClock, NoisyOracle, Oracle, OracleStats, SimulatedOracle};
use reu_core::procedure::{run, verify_replay, ProcedureConfig, ResultBundle, RunOutput};
use reu_core::Frame;

/// A simulated agent answering inside an elicitation frame: the agent
/// file's atoms become the frame's cells, crossed with independent tickets.
pub struct Subject {
    pub file: AgentFile,
    pub frame: Frame,
    pub agent: Agent,
}

impl Subject {
    pub fn load(path: &Path, tickets: u32) -> Result<Subject> {
        let file = AgentFile::load(path).with_context(|| format!("reading agent file {}", path.display()))?;
        Subject::from_file(file, tickets)
    }

    pub fn from_file(file: AgentFile, tickets: u32) -> Result<Subject> {
        let cells = file.space()?.labels().to_vec();
        let frame = Frame::new(cells, tickets)?;
        let weights = file.model()?.weights().to_vec();
        let agent = Agent::new(frame.model(&weights, None)?, file.utility.clone(), file.risk.clone());
        Ok(Subject { file, frame, agent })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseSettings {
    pub epsilon: f64,
    pub repeats: u32,
    pub seed: u64,
}

impl NoiseSettings {
    pub fn oracle(&self, agent: &Agent) -> Result<Box<dyn Oracle>> {
        if self.epsilon == 0.0 && self.repeats == 0 {
            Ok(Box::new(SimulatedOracle::new(agent.clone())))
        } else {
            Ok(Box::new(NoisyOracle::new(agent.clone(), self.epsilon, self.repeats, self.seed)?))
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    #[serde(flatten)]
    pub config: ProcedureConfig,
    pub oracle: String,
    pub noise: NoiseSettings,
    pub stats: OracleStats,
    pub agent: AgentFile,
}

pub fn execute(cfg: &ProcedureConfig, subject: &Subject, noise: NoiseSettings) -> Result<RunOutput> {
    let mut oracle = noise.oracle(&subject.agent)?;
    Ok(run(cfg, &mut oracle, &LogicalClock::default())?)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

/// Writes `results.json`, `samples.csv`, `transcript.jsonl` and `meta.json`.
pub fn write_outputs(
    dir: &Path,
    cfg: &ProcedureConfig,
    out: &RunOutput,
    subject: &Subject,
    noise: NoiseSettings,
) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_json(&out.bundle, create(&dir.join("results.json"))?)?;
    write_samples_csv(&out.bundle.samples, create(&dir.join("samples.csv"))?)?;
    out.transcript.write_jsonl(create(&dir.join("transcript.jsonl"))?)?;
    let meta = Meta {
        tool: format!("reu-elicit {}", env!("CARGO_PKG_VERSION")),
        config: cfg.clone(),
        oracle: out.transcript.meta.oracle.clone(),
        noise,
        stats: out.stats,
        agent: subject.file.clone(),
    };
    write_json(&meta, create(&dir.join("meta.json"))?)?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(BufReader::new(f)).with_context(|| format!("parsing {}", path.display()))
}

/// Re-runs the configuration in `dir/meta.json` on `dir/transcript.jsonl`
/// and checks the outcome against `dir/results.json`.
pub fn replay_dir(dir: &Path) -> Result<RunOutput> {
    let meta: Meta = read_json(&dir.join("meta.json"))?;
    let expected: ResultBundle = read_json(&dir.join("results.json"))?;
    let path = dir.join("transcript.jsonl");
    let f = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    let entries = read_jsonl(BufReader::new(f))?;
    if expected.config_hash != meta.config.hash() {
        bail!(reu_core::Error::Inconsistency(format!(
            "results.json was produced by config {} but meta.json holds {}",
            expected.config_hash,
            meta.config.hash()
        )));
    }
    Ok(verify_replay(&meta.config, &entries, &expected)?)
}
