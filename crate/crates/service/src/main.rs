use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Context;
use clap::{Parser, Subcommand};

use vizassist_core::augment::augment;
use vizassist_core::classifier::{classify, extract_features};
use vizassist_core::corpus::{compute_stats, fixture_csv, ingest, CorpusStats};
use vizassist_core::dataset::{load_dataset, select_attributes, DataFormat};
use vizassist_core::fitter::{fit_template_with, AttributeBinding, FitOptions};
use vizassist_core::mdp::{cross_validate, MdpModel};
use vizassist_core::templates::get_viz_template;
use vizassist_core::{InteractionState, InteractionType, VizType};
use vizassist_service::{run, ServiceConfig, ServiceError, DEFAULT_MAX_UPLOAD};

#[derive(Parser)]
#[command(
    name = "vizassist",
    version,
    about = "Fit, augment and recommend interactions for D3 programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a visualization template to a dataset and print the program.
    Fit {
        #[arg(long)]
        template: VizType,
        #[arg(long)]
        data: PathBuf,
        /// Explicit slot binding, e.g. `x=petalLength`.
        #[arg(long = "bind", value_parser = parse_pair)]
        bind: Vec<(String, String)>,
        /// URL the program loads its data from.
        #[arg(long, default_value = "data.csv")]
        data_url: String,
    },
    /// Add one interaction to a program read from a file or stdin.
    Augment {
        #[arg(long)]
        viz: VizType,
        #[arg(long)]
        interaction: InteractionType,
        /// Interactions already implemented, comma separated.
        #[arg(long, default_value = "")]
        state: String,
        /// Program file; `-` or absent reads stdin.
        #[arg(long)]
        source: Option<PathBuf>,
        /// Print the full result as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Rank interactions for a state.
    Recommend {
        /// Visualization type, or `any` for the all-type table.
        #[arg(long, default_value = "any")]
        viz: String,
        #[arg(long, default_value = "")]
        state: String,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, env = "VIZASSIST_MODEL")]
        model: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Predict the visualization type of an SVG file (or stdin).
    Classify {
        svg: Option<PathBuf>,
        /// Include the feature vector.
        #[arg(long)]
        features: bool,
    },
    /// Summarize a coded corpus.
    Stats {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Leave-one-out validation of the recommender.
    Xval {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long)]
        json: bool,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long, env = "VIZASSIST_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "VIZASSIST_MODEL")]
        model: Option<PathBuf>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, env = "VIZASSIST_EVENT_DIR")]
        event_dir: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_UPLOAD)]
        max_upload: usize,
        /// Seconds between model snapshots; 0 disables them.
        #[arg(long, default_value_t = 300)]
        persist_every: u64,
    },
    /// Write the shipped fixture corpus as CSV.
    #[command(hide = true)]
    GenCorpus {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_pair(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
        .ok_or_else(|| format!("expected SLOT=ATTRIBUTE, got `{s}`"))
}

fn read_input(path: Option<&Path>) -> anyhow::Result<String> {
    match path {
        Some(p) if p != Path::new("-") => {
            std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
        }
        _ => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn load_corpus(path: Option<&Path>) -> anyhow::Result<CorpusStats> {
    let bytes = match path {
        Some(p) => std::fs::read(p).with_context(|| format!("reading {}", p.display()))?,
        None => fixture_csv().into_bytes(),
    };
    let examples = ingest(&bytes).map_err(ServiceError::from)?;
    Ok(compute_stats(&examples).map_err(ServiceError::from)?)
}

fn load_model(model: Option<&Path>, corpus: Option<&Path>) -> anyhow::Result<MdpModel> {
    if let Some(p) = model.filter(|p| p.exists()) {
        let bytes = std::fs::read(p)?;
        return Ok(MdpModel::restore(&bytes).map_err(ServiceError::from)?);
    }
    Ok(vizassist_core::mdp::seed(&load_corpus(corpus)?).map_err(ServiceError::from)?)
}

fn parse_state(s: &str) -> anyhow::Result<InteractionState> {
    Ok(InteractionState::parse_key(s).map_err(|e| ServiceError::InvalidRequest(e.to_string()))?)
}

fn execute(cmd: Command) -> anyhow::Result<()> {
    let mut stdout = std::io::stdout().lock();
    match cmd {
        Command::Fit {
            template,
            data,
            bind,
            data_url,
        } => {
            let bytes =
                std::fs::read(&data).with_context(|| format!("reading {}", data.display()))?;
            let name = data
                .file_name()
                .map_or("data".into(), |n| n.to_string_lossy().into_owned());
            let format = if name.ends_with(".json") {
                DataFormat::Json
            } else {
                DataFormat::Csv
            };
            let dataset = load_dataset(&name, &bytes, format).map_err(ServiceError::from)?;
            let binding = if bind.is_empty() {
                select_attributes(&dataset, template, &BTreeSet::new())
                    .map_err(ServiceError::from)?
            } else {
                AttributeBinding::from_pairs(bind.iter().map(|(a, b)| (a.as_str(), b.as_str())))
            };
            let program = fit_template_with(
                get_viz_template(template),
                &dataset,
                &binding,
                &FitOptions { data_url },
            )
            .map_err(ServiceError::from)?;
            write!(stdout, "{}", program.source)?;
        }
        Command::Augment {
            viz,
            interaction,
            state,
            source,
            json,
        } => {
            let text = read_input(source.as_deref())?;
            let out = augment(&text, interaction, viz, parse_state(&state)?)
                .map_err(ServiceError::from)?;
            if json {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&out)?)?;
            } else {
                write!(stdout, "{}", out.source)?;
            }
        }
        Command::Recommend {
            viz,
            state,
            corpus,
            model,
            json,
        } => {
            let m = load_model(model.as_deref(), corpus.as_deref())?;
            let s = parse_state(&state)?;
            let recs = if viz == "any" {
                m.recommend(s, None)
            } else {
                m.recommend_named(s, &viz).map_err(ServiceError::from)?
            };
            if json {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&recs)?)?;
            } else {
                for r in recs {
                    writeln!(stdout, "{}\t{}\t{:.4}", r.rank, r.interaction, r.score)?;
                }
            }
        }
        Command::Classify { svg, features } => {
            let text = read_input(svg.as_deref())?;
            let f = extract_features(&text).map_err(ServiceError::from)?;
            let c = classify(&f);
            let out = if features {
                serde_json::json!({ "classification": c, "features": f })
            } else {
                serde_json::to_value(&c)?
            };
            writeln!(stdout, "{}", serde_json::to_string_pretty(&out)?)?;
        }
        Command::Stats { corpus, json } => {
            let stats = load_corpus(corpus.as_deref())?;
            if json {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&stats)?)?;
            } else {
                print_stats(&mut stdout, &stats)?;
            }
        }
        Command::Xval { corpus, k, json } => {
            let stats = load_corpus(corpus.as_deref())?;
            let cv = cross_validate(&stats, k).map_err(ServiceError::from)?;
            if json {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&cv)?)?;
            } else {
                writeln!(stdout, "k = {}", cv.k)?;
                for (i, a) in &cv.per_interaction {
                    writeln!(
                        stdout,
                        "{i}\t{:.4}\t({}/{})",
                        a.accuracy, a.correct, a.support
                    )?;
                }
                writeln!(
                    stdout,
                    "overall\t{:.4}\t({}/{})",
                    cv.overall, cv.correct, cv.evaluated
                )?;
            }
        }
        Command::Serve {
            port,
            host,
            model,
            corpus,
            event_dir,
            max_upload,
            persist_every,
        } => {
            let m = load_model(model.as_deref(), corpus.as_deref())?;
            let addr: SocketAddr = format!("{host}:{port}")
                .parse()
                .context("bad listen address")?;
            let config = ServiceConfig {
                addr,
                model_path: model,
                event_dir,
                max_upload,
                persist_every: (persist_every > 0).then(|| Duration::from_secs(persist_every)),
            };
            tokio::runtime::Runtime::new()?.block_on(run(config, m))?;
        }
        Command::GenCorpus { out: path } => match path {
            Some(p) => std::fs::write(p, fixture_csv())?,
            None => write!(stdout, "{}", fixture_csv())?,
        },
    }
    Ok(())
}

fn print_stats(out: &mut impl Write, stats: &CorpusStats) -> std::io::Result<()> {
    writeln!(out, "examples\t{}", stats.total_examples)?;
    writeln!(out, "viable\t{}", stats.viable_examples)?;
    writeln!(
        out,
        "interactive\t{} ({:.1}%)",
        stats.interactive_examples,
        100.0 * stats.interactive_fraction()
    )?;
    writeln!(out, "visualization instances\t{}", stats.viz_instances)?;
    for v in &stats.viz {
        writeln!(out, "viz\t{}\t{}\t{:.1}%", v.label, v.count, v.percent)?;
    }
    for i in InteractionType::ALL {
        writeln!(out, "interaction\t{i}\t{}", stats.interaction_count(i))?;
    }
    writeln!(out, "distinct pairs\t{}", stats.distinct_pairs())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e)
            if e.downcast_ref::<std::io::Error>()
                .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            match e.downcast_ref::<ServiceError>() {
                Some(se) => eprintln!("error[{}]: {se}", se.code()),
                None => eprintln!("error: {e:#}"),
            }
            ExitCode::FAILURE
        }
    }
}
