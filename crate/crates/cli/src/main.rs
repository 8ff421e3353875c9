use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use encfair::dataset::category_stats;
use encfair::harness::lab::write_lab_tabular;
use encfair::harness::results::{write_structured, write_tabular, TOOL_NAME, TOOL_VERSION};
use encfair::harness::{
    emit_results, run_audit, run_intersectional, run_lab, run_sweep, ExperimentConfig,
    OutputFormat, ResultDocument, SweepRecord,
};

#[derive(Parser)]
#[command(
    name = "encfair",
    version,
    about = "Audit how categorical encodings affect accuracy and group fairness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured encoder once at its fixed settings.
    Audit(Common),
    /// Run every encoder over its regularization grid.
    Sweep(Common),
    /// Audit each attribute in `concat` alone and concatenated.
    Intersect(Common),
    /// Split each metric into irreducible and reducible parts on a synthetic population.
    Synth(Common),
    /// Per-category counts and positive rates of the protected attribute.
    Stats(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML, or JSON by extension).
    #[arg(long)]
    config: PathBuf,
    /// Output file; defaults to `output.path` from the config, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the split seed and the noise seed.
    #[arg(long)]
    seed: Option<u64>,
    /// `tabular` (CSV) or `structured` (JSON).
    #[arg(long)]
    format: Option<OutputFormat>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut config = ExperimentConfig::load(&self.config)
            .with_context(|| format!("loading {}", self.config.display()))?;
        if let Some(seed) = self.seed {
            config.set_seed(seed);
        }
        if let Some(format) = self.format {
            config.output.format = format;
        }
        if let Some(out) = &self.out {
            config.output.path = Some(out.clone());
        }
        config.validate()?;
        Ok(config)
    }
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_records(config: &ExperimentConfig, doc: &ResultDocument) -> Result<()> {
    match &config.output.path {
        Some(path) => {
            emit_results(doc, path, config.output.format)?;
            log::info!("wrote {} records to {}", doc.records.len(), path.display());
        }
        None => {
            if doc.records.is_empty() {
                bail!("no records to write");
            }
            let mut out = sink(None)?;
            match config.output.format {
                OutputFormat::Tabular => write_tabular(&doc.records, &mut out)?,
                OutputFormat::Structured => {
                    write_structured(doc, &mut out)?;
                    writeln!(out)?;
                }
            }
            out.flush()?;
        }
    }
    Ok(())
}

fn records(config: &ExperimentConfig, records: Vec<SweepRecord>) -> Result<()> {
    let failed = records.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        log::warn!("{failed} of {} points failed", records.len());
    }
    write_records(config, &ResultDocument::new(config.echo(), records))
}

fn write_json(config: &ExperimentConfig, value: &serde_json::Value) -> Result<()> {
    let mut out = sink(config.output.path.as_deref())?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Audit(c) => {
            let config = c.load()?;
            records(&config, run_audit(&config)?)
        }
        Command::Sweep(c) => {
            let config = c.load()?;
            records(&config, run_sweep(&config)?)
        }
        Command::Intersect(c) => {
            let config = c.load()?;
            let report = run_intersectional(&config)?;
            for f in report.flags.iter().filter(|f| f.exceeds_all) {
                let at = f
                    .param_value
                    .map(|v| format!(" at {v}"))
                    .unwrap_or_default();
                log::info!(
                    "{}{at}: concatenated {} exceeds every single attribute",
                    f.encoder,
                    f.metric
                );
            }
            let mut doc = ResultDocument::new(config.echo(), report.records());
            doc.intersect_flags = Some(report.flags);
            write_records(&config, &doc)
        }
        Command::Synth(c) => {
            let config = c.load()?;
            let report = run_lab(&config)?;
            match config.output.format {
                OutputFormat::Tabular => {
                    let mut out = sink(config.output.path.as_deref())?;
                    write_lab_tabular(&report, &mut out)?;
                    out.flush()?;
                    Ok(())
                }
                OutputFormat::Structured => write_json(
                    &config,
                    &serde_json::json!({
                        "tool": TOOL_NAME,
                        "version": TOOL_VERSION,
                        "config": config.echo(),
                        "lab": report,
                    }),
                ),
            }
        }
        Command::Stats(c) => {
            let config = c.load()?;
            let data = config.load_data()?;
            let mut attributes: Vec<String> = Vec::new();
            for a in std::iter::once(config.protected.attribute.clone())
                .chain(config.concat.iter().cloned())
                .chain(config.concat_name())
            {
                if !attributes.contains(&a) {
                    attributes.push(a);
                }
            }
            let stats = attributes
                .iter()
                .map(|a| category_stats(&data, a))
                .collect::<encfair::Result<Vec<_>>>()?;
            write_json(
                &config,
                &serde_json::json!({ "rows": data.n(), "attributes": stats }),
            )
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
