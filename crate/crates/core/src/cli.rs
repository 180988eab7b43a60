//! Command-line front end: `verify` runs a campaign, `inspect` summarizes a
//! model file.
//!
//! `verify` settings may come from a JSON config file (`--config`); flags
//! given on the command line take precedence. The effective settings are
//! echoed into the JSON report.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::activation::{ReluMode, SmoothRelaxation, DEFAULT_SPLIT_BUDGET};
use crate::error::{Error, Result};
use crate::layer::{LayerSpec, ReachMode};
use crate::network::{load_dataset, load_model};
use crate::perturbation::PerturbationKind;
use crate::verifier::{run_campaign, CampaignPlan, Timing, VerifyOptions};

pub const DEFAULT_EPSILONS: [f64; 5] = [50.0, 60.0, 70.0, 80.0, 90.0];
pub const DEFAULT_FALSIFY_BUDGET: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ModeArg {
    /// Interval bounds for sigmoid/tanh, triangle relaxation for ReLU.
    Interval,
    /// Secant/tangent bounds for sigmoid/tanh, triangle relaxation for ReLU.
    Secant,
    /// Exact ReLU case splitting (networks without LSTM layers only).
    ExactRelu,
}

impl ModeArg {
    pub fn reach_mode(self, split_budget: usize) -> ReachMode {
        let (smooth, relu) = match self {
            ModeArg::Interval => (SmoothRelaxation::Interval, ReluMode::Approx),
            ModeArg::Secant => (SmoothRelaxation::Secant, ReluMode::Approx),
            ModeArg::ExactRelu => (SmoothRelaxation::Interval, ReluMode::ExactSplit),
        };
        ReachMode {
            smooth,
            relu,
            split_budget,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum TimingArg {
    Wall,
    Off,
}

#[derive(Debug, Parser)]
#[command(name = "seqstar", version, about = "Star-set robustness verification for sequence classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a robustness campaign and write JSON/CSV reports.
    Verify(VerifyArgs),
    /// Print layer dimensions, parameter counts and activations of a model.
    Inspect {
        /// Model JSON file.
        model: PathBuf,
    },
}

#[derive(Debug, Default, clap::Args)]
struct VerifyArgs {
    /// JSON file with default settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Dataset in JSON lines.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Comma-separated perturbation kinds, e.g. sfsi,mfai.
    #[arg(long, value_delimiter = ',')]
    kinds: Option<Vec<PerturbationKind>>,
    /// Comma-separated noise levels in percent.
    #[arg(long, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    /// Perturbed feature for single-feature kinds.
    #[arg(long)]
    feature: Option<usize>,
    /// Perturbed time step for single-instance kinds.
    #[arg(long)]
    instance: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Falsifier samples per sequence.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Maximum number of stars produced by exact ReLU splitting.
    #[arg(long)]
    split_budget: Option<usize>,
    #[arg(long)]
    out_json: Option<PathBuf>,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long)]
    jobs: Option<usize>,
    /// `off` records zero runtimes so reports are byte-reproducible.
    #[arg(long, value_enum)]
    timing: Option<TimingArg>,
}

/// Settings accepted by `verify`, as read from a config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    pub model: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub kinds: Option<Vec<PerturbationKind>>,
    pub epsilons: Option<Vec<f64>>,
    pub feature: Option<usize>,
    pub instance: Option<usize>,
    pub mode: Option<ModeArg>,
    pub budget: Option<usize>,
    pub seed: Option<u64>,
    pub split_budget: Option<usize>,
    pub out_json: Option<PathBuf>,
    pub out_csv: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub timing: Option<TimingArg>,
}

/// Fully resolved `verify` settings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectiveConfig {
    pub model: PathBuf,
    pub data: PathBuf,
    pub kinds: Vec<PerturbationKind>,
    pub epsilons: Vec<f64>,
    pub feature: usize,
    pub instance: usize,
    pub mode: ModeArg,
    pub budget: usize,
    pub seed: u64,
    pub split_budget: usize,
    pub out_json: Option<PathBuf>,
    pub out_csv: Option<PathBuf>,
    /// Not echoed: results do not depend on it.
    #[serde(skip)]
    pub jobs: usize,
    pub timing: TimingArg,
}

impl CliConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// `self` overridden field by field with whatever `flags` sets.
    pub fn merged(self, flags: CliConfig) -> CliConfig {
        CliConfig {
            model: flags.model.or(self.model),
            data: flags.data.or(self.data),
            kinds: flags.kinds.or(self.kinds),
            epsilons: flags.epsilons.or(self.epsilons),
            feature: flags.feature.or(self.feature),
            instance: flags.instance.or(self.instance),
            mode: flags.mode.or(self.mode),
            budget: flags.budget.or(self.budget),
            seed: flags.seed.or(self.seed),
            split_budget: flags.split_budget.or(self.split_budget),
            out_json: flags.out_json.or(self.out_json),
            out_csv: flags.out_csv.or(self.out_csv),
            jobs: flags.jobs.or(self.jobs),
            timing: flags.timing.or(self.timing),
        }
    }

    pub fn resolve(self) -> Result<EffectiveConfig> {
        let model = self
            .model
            .ok_or_else(|| Error::Config("missing --model".into()))?;
        let data = self
            .data
            .ok_or_else(|| Error::Config("missing --data".into()))?;
        let mut kinds = self.kinds.unwrap_or_else(|| PerturbationKind::ALL.to_vec());
        kinds.dedup();
        if kinds.is_empty() {
            return Err(Error::Config("--kinds is empty".into()));
        }
        let epsilons = self.epsilons.unwrap_or_else(|| DEFAULT_EPSILONS.to_vec());
        if epsilons.is_empty() {
            return Err(Error::Config("--epsilons is empty".into()));
        }
        if let Some(e) = epsilons.iter().find(|&&e| !(e > 0.0 && e <= 100.0)) {
            return Err(Error::Config(format!("epsilon {e} outside (0, 100]")));
        }
        Ok(EffectiveConfig {
            model,
            data,
            kinds,
            epsilons,
            feature: self.feature.unwrap_or(0),
            instance: self.instance.unwrap_or(0),
            mode: self.mode.unwrap_or(ModeArg::Interval),
            budget: self.budget.unwrap_or(DEFAULT_FALSIFY_BUDGET),
            seed: self.seed.unwrap_or(0),
            split_budget: self.split_budget.unwrap_or(DEFAULT_SPLIT_BUDGET),
            out_json: self.out_json,
            out_csv: self.out_csv,
            jobs: self.jobs.unwrap_or(0),
            timing: self.timing.unwrap_or(TimingArg::Wall),
        })
    }
}

impl From<VerifyArgs> for CliConfig {
    fn from(a: VerifyArgs) -> Self {
        CliConfig {
            model: a.model,
            data: a.data,
            kinds: a.kinds,
            epsilons: a.epsilons,
            feature: a.feature,
            instance: a.instance,
            mode: a.mode,
            budget: a.budget,
            seed: a.seed,
            split_budget: a.split_budget,
            out_json: a.out_json,
            out_csv: a.out_csv,
            jobs: a.jobs,
            timing: a.timing,
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Runs the campaign described by `config`, writes the requested reports
/// and prints the PR table to `out`.
pub fn cmd_verify(config: &EffectiveConfig, out: &mut dyn Write) -> Result<()> {
    let net = load_model(&config.model)?;
    let dataset = load_dataset(&config.data)?;
    let options = VerifyOptions {
        mode: config.mode.reach_mode(config.split_budget),
        falsify_budget: config.budget,
        seed: config.seed,
        union_rule: None,
        timing: match config.timing {
            TimingArg::Wall => Timing::Wall,
            TimingArg::Off => Timing::Off,
        },
    };
    let plan = CampaignPlan {
        kinds: config.kinds.clone(),
        epsilons: config.epsilons.clone(),
        target_feature: config.feature,
        target_instance: config.instance,
    };
    let mut report = run_campaign(&net, &dataset, &plan, &options, config.jobs)?;
    report.config = Some(serde_json::to_value(config).expect("config serialization"));

    if let Some(path) = &config.out_json {
        write_file(path, &report.to_json())?;
    }
    if let Some(path) = &config.out_csv {
        write_file(path, &report.to_csv())?;
    }
    let _ = out.write_all(report.render_table().as_bytes());
    Ok(())
}

/// One line per layer: index, kind, input → output features, parameters,
/// activations.
pub fn cmd_inspect(model: &Path, out: &mut dyn Write) -> Result<()> {
    let net = load_model(model)?;
    let mut text = format!(
        "{}: {} input features, {} classes",
        net.name,
        net.input_features(),
        net.output_dim()
    );
    if !net.labels.is_empty() {
        text.push_str(&format!(" ({})", net.labels.join(", ")));
    }
    text.push('\n');
    let mut features = net.input_features();
    for (i, layer) in net.layers().iter().enumerate() {
        let next = layer.validate(i, features)?;
        let detail = match layer {
            LayerSpec::Lstm(l) => format!("hidden={} output={:?}", l.hidden_size(), l.output_mode),
            LayerSpec::Conv1d(c) => format!("kernel={} stride={}", c.kernel_size(), c.stride),
            LayerSpec::FullyConnected(_) => format!("units={next}"),
            LayerSpec::Relu => String::new(),
        };
        let acts: Vec<String> = layer
            .activations()
            .iter()
            .map(|a| format!("{a:?}").to_lowercase())
            .collect();
        let acts = if acts.is_empty() {
            "none".to_string()
        } else {
            acts.join(",")
        };
        text.push_str(&format!(
            "  [{i}] {:<16} {features:>4} -> {next:<4} params={:<8} activations={acts} {detail}\n",
            layer.name(),
            layer.parameter_count(),
        ));
        features = next;
    }
    let _ = out.write_all(text.trim_end_matches(' ').as_bytes());
    Ok(())
}

/// Entry point shared by the binary and tests. Returns the exit code:
/// 0 on success, 1 on configuration, I/O or model errors, 2 on usage errors.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(rendered.as_bytes());
            } else {
                let _ = err.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Inspect { model } => cmd_inspect(&model, out),
        Command::Verify(args) => {
            let config_path = args.config.clone();
            let flags = CliConfig::from(args);
            config_path
                .map(|p| CliConfig::load(&p))
                .transpose()
                .map(|file| file.unwrap_or_default().merged(flags))
                .and_then(CliConfig::resolve)
                .and_then(|c| cmd_verify(&c, out))
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}
