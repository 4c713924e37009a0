//! `fixeval`: score generated fixes, run batch evaluations and build reports.

mod http;

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use fixeval::dimensions::{EvalInstance, Transform};
use fixeval::elrm::{baseline_bleu_scores, elrm_score, MetricBreakdown};
use fixeval::harness::aggregate::{aggregate, parse_judgments};
use fixeval::harness::dataset::{load_dataset, load_outputs, write_dataset, ModelOutputs};
use fixeval::harness::report::{render, render_judge};
use fixeval::harness::run::{parse_records, run_eval};
use fixeval::harness::{OutputFormat, RunConfig};
use fixeval::judge::{judge_batch, Dimension, JudgeKind, JudgeMode, ReplayTransport, Transport};
use fixeval::lexer::Language;
use fixeval::transforms::{IdentifierRenaming, TransformRule};

#[derive(Parser)]
#[command(name = "fixeval", version, about = "Evaluate generated vulnerability fixes with ELRM")]
struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output format; overrides `run.format` from the config.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Reserved. Nothing in the pipeline is random yet.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Table => OutputFormat::Table,
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Tagger,
    Scorer,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    ReferenceBased,
    ReferenceFree,
}

#[derive(Subcommand)]
enum Command {
    /// Score one candidate file against one or more reference files.
    Score {
        #[arg(long)]
        lang: Language,
        #[arg(long, value_name = "FILE")]
        cand: PathBuf,
        #[arg(long = "ref", value_name = "FILE", required = true)]
        refs: Vec<PathBuf>,
    },
    /// Evaluate a dataset, writing per-instance records and printing the report.
    Eval {
        #[arg(long, value_name = "FILE")]
        dataset: PathBuf,
        /// Per-model generations; without it the dataset's inline generations are used.
        #[arg(long, value_name = "FILE")]
        outputs: Option<PathBuf>,
        /// Where records are streamed.
        #[arg(long, value_name = "FILE", default_value = "records.jsonl")]
        records: PathBuf,
        /// Human or LLM scores to correlate with the metrics.
        #[arg(long, value_name = "FILE")]
        judgments: Option<PathBuf>,
        /// Worker threads; overrides `run.parallelism`.
        #[arg(long, value_name = "N")]
        parallelism: Option<usize>,
    },
    /// Emit an identifier-renamed variant of every instance not yet renamed.
    Transform {
        #[arg(long, value_name = "FILE")]
        dataset: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Extra names to keep, comma separated.
        #[arg(long, value_delimiter = ',')]
        preserve: Vec<String>,
        /// Also write the input instances ahead of their variants.
        #[arg(long)]
        include_original: bool,
        /// Write the rename map of each instance here, one JSON object per line.
        #[arg(long, value_name = "FILE")]
        maps: Option<PathBuf>,
    },
    /// Ask an LLM judge for dimension verdicts and print category percentages.
    Judge {
        #[arg(long, value_name = "FILE")]
        dataset: PathBuf,
        #[arg(long, value_name = "FILE")]
        outputs: Option<PathBuf>,
        /// Which model's generations to judge when the outputs file has several.
        #[arg(long)]
        model: Option<String>,
        #[arg(long, value_delimiter = ',', default_value = "planqul,fixcap,ptfixcap,elerelv")]
        dimensions: Vec<Dimension>,
        #[arg(long, value_enum, default_value = "tagger")]
        kind: Kind,
        #[arg(long, value_enum, default_value = "reference-based")]
        mode: Mode,
        /// Answer from recorded responses instead of calling the endpoint.
        #[arg(long, value_name = "FILE")]
        replay: Option<PathBuf>,
        /// Write every call (prompt, response, timestamp) here.
        #[arg(long, value_name = "FILE")]
        log: Option<PathBuf>,
    },
    /// Aggregate a records file into a report.
    Report {
        #[arg(long, value_name = "FILE")]
        records: PathBuf,
        #[arg(long, value_name = "FILE")]
        judgments: Option<PathBuf>,
    },
}

/// Bad input data exits with 1, bad configuration or usage with 2.
enum Failure {
    Input(anyhow::Error),
    Config(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.into())
    }
}

fn config_error(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("cannot open {}", path.display()))?))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?))
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn print_breakdown(b: &MetricBreakdown, baselines: (f64, f64), format: OutputFormat) {
    let rows = [
        ("bleu", b.bleu),
        ("weighted_bleu", b.weighted_bleu),
        ("kwop_bleu", b.kwop_bleu),
        ("literal_sim", b.literal_sim),
        ("elrm", b.elrm),
        ("bleu_coarse", baselines.0),
        ("bleu_fine", baselines.1),
    ];
    let round = |x: f64| (x * 100.0).round() / 100.0;
    match format {
        OutputFormat::Table => {
            for (name, v) in rows {
                println!("{name:<14}{v:>7.2}");
            }
            if let Some(e) = &b.lex_error {
                println!("lex error: {e}");
            }
        }
        OutputFormat::Json => {
            let mut obj = serde_json::Map::new();
            for (name, v) in rows {
                obj.insert(name.into(), serde_json::json!(round(v)));
            }
            if let Some(e) = &b.lex_error {
                obj.insert("lex_error".into(), e.clone().into());
            }
            println!("{}", serde_json::to_string_pretty(&obj).expect("breakdown serializes"));
        }
        OutputFormat::Csv => {
            println!("{}", rows.map(|r| r.0).join(","));
            println!("{}", rows.map(|r| format!("{:.2}", r.1)).join(","));
        }
    }
}

/// Instances with `generated` taken from `outputs` for one model.
fn with_generations(instances: &[EvalInstance], outputs: &ModelOutputs, model: Option<&str>) -> anyhow::Result<Vec<EvalInstance>> {
    let model = match model {
        Some(m) => m.to_string(),
        None => {
            let all: Vec<&str> = outputs.models().collect();
            match all.as_slice() {
                [one] => one.to_string(),
                [] => return Err(anyhow!("the outputs file is empty")),
                _ => return Err(anyhow!("the outputs file has several models ({}); pick one with --model", all.join(", "))),
            }
        }
    };
    let generations = outputs.by_model.get(&model).ok_or_else(|| anyhow!("no outputs for model {model:?}"))?;
    Ok(instances
        .iter()
        .map(|i| EvalInstance { generated: generations.get(&i.id).cloned().flatten(), ..i.clone() })
        .collect())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(config_error)?,
        None => RunConfig::default(),
    };
    let format = cli.format.map_or(config.run.format, OutputFormat::from);
    let mut stdout = std::io::stdout().lock();

    match cli.command {
        Command::Score { lang, cand, refs } => {
            let candidate = read(&cand)?;
            let references = refs.iter().map(|p| read(p)).collect::<anyhow::Result<Vec<_>>>()?;
            let b = elrm_score(&candidate, &references, lang, &config.metric, &config.ngram).map_err(|e| anyhow!(e))?;
            let baselines = baseline_bleu_scores(&candidate, &references, lang, &config.ngram).map_err(|e| anyhow!(e))?;
            print_breakdown(&b, baselines, format);
        }
        Command::Eval { dataset, outputs, records, judgments, parallelism } => {
            if let Some(n) = parallelism {
                config.run.parallelism = Some(n);
            }
            config.validate().map_err(config_error)?;
            let instances = load_dataset(&dataset)?;
            let outputs = match outputs {
                Some(path) => load_outputs(&path, Some(&instances))?,
                None => ModelOutputs::inline(&instances, &config.run.inline_model),
            };
            let judgments = match judgments {
                Some(path) => parse_judgments(open(&path)?).with_context(|| format!("in {}", path.display()))?,
                None => Vec::new(),
            };
            let mut sink = create(&records)?;
            let all = run_eval(&instances, &outputs, &config, |r| {
                serde_json::to_writer(&mut sink, r)?;
                sink.write_all(b"\n")
            })
            .map_err(|e| anyhow!(e))?;
            sink.flush().context("writing records")?;
            let report = aggregate(&all, &judgments, &config).map_err(|e| anyhow!(e))?;
            write!(stdout, "{}", render(&report, format)).context("writing report")?;
        }
        Command::Transform { dataset, out, preserve, include_original, maps } => {
            let instances = load_dataset(&dataset)?;
            let rule = IdentifierRenaming::new(preserve.into_iter().collect::<HashSet<_>>());
            let mut produced = Vec::new();
            let mut map_lines = Vec::new();
            for inst in &instances {
                if include_original {
                    produced.push(inst.clone());
                }
                if matches!(inst.transform, Transform::Renamed | Transform::RenamedRestructured) {
                    continue;
                }
                let map = rule.map_for(inst).with_context(|| format!("instance {}", inst.id))?;
                let mut variant = rule.apply(inst).with_context(|| format!("instance {}", inst.id))?;
                variant.id = format!("{}-renamed", inst.id);
                map_lines.push(serde_json::json!({"id": variant.id, "source": inst.id, "map": map}).to_string());
                produced.push(variant);
            }
            match out {
                Some(path) => {
                    let mut w = create(&path)?;
                    write_dataset(&produced, &mut w).and_then(|_| w.flush()).context("writing dataset")?;
                }
                None => write_dataset(&produced, &mut stdout).context("writing dataset")?,
            }
            if let Some(path) = maps {
                let mut w = create(&path)?;
                for line in map_lines {
                    writeln!(w, "{line}").context("writing maps")?;
                }
                w.flush().context("writing maps")?;
            }
        }
        Command::Judge { dataset, outputs, model, dimensions, kind, mode, replay, log } => {
            let instances = load_dataset(&dataset)?;
            let instances = match outputs {
                Some(path) => with_generations(&instances, &load_outputs(&path, Some(&instances))?, model.as_deref())?,
                None => instances,
            };
            let transport: Box<dyn Transport> = match replay {
                Some(path) => Box::new(
                    ReplayTransport::from_jsonl(model.clone().unwrap_or_else(|| "replay".into()), open(&path)?)
                        .map_err(|e| anyhow!("{}: {e}", path.display()))?,
                ),
                None => Box::new(http::ChatTransport::from_settings(&config.judge).map_err(|e| config_error(anyhow!(e)))?),
            };
            let kind = match kind {
                Kind::Tagger => JudgeKind::Tagger,
                Kind::Scorer => JudgeKind::Scorer,
            };
            let mode = match mode {
                Mode::ReferenceBased => JudgeMode::ReferenceBased,
                Mode::ReferenceFree => JudgeMode::ReferenceFree,
            };
            let report = judge_batch(&instances, &dimensions, kind, mode, transport.as_ref(), &config.judge).map_err(|e| anyhow!(e))?;
            if let Some(path) = log {
                let mut w = create(&path)?;
                for entry in &report.logs {
                    serde_json::to_writer(&mut w, entry).context("writing log")?;
                    writeln!(w).context("writing log")?;
                }
                w.flush().context("writing log")?;
            }
            write!(stdout, "{}", render_judge(&report, format)).context("writing report")?;
        }
        Command::Report { records, judgments } => {
            let all = parse_records(open(&records)?).with_context(|| format!("in {}", records.display()))?;
            let judgments = match judgments {
                Some(path) => parse_judgments(open(&path)?).with_context(|| format!("in {}", path.display()))?,
                None => Vec::new(),
            };
            let report = aggregate(&all, &judgments, &config).map_err(|e| anyhow!(e))?;
            write!(stdout, "{}", render(&report, format)).context("writing report")?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(2)
        }
    }
}
