use clap::{Args, Parser, Subcommand};
use riskbt_pipeline::commands::{self, appendix_a_manifest, appendix_d_manifest, execute};
use riskbt_pipeline::config::{parse_hac, Input, RunConfig, Scores, Targets};
use riskbt_pipeline::emit::{Format, Manifest};
use riskbt_pipeline::methods::parse_method_list;
use riskbt_pipeline::Result;
use serde_json::json;
use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "riskbt",
    version,
    about = "Backtest VaR, expectile and (VaR, ES) forecasts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rolling-window backtest of a CSV loss or price series.
    Backtest {
        /// CSV with a `price` or `loss` column.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Use log-returns instead of negated log-returns for price input.
        #[arg(long)]
        no_negate: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Backtest on a simulated AR(1)-GARCH(1,1) skewed-t series.
    Simulate {
        #[arg(long)]
        out_of_sample: Option<usize>,
        /// Full scale: 5000 verifying observations.
        #[arg(long)]
        full: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Magician against historian forecasters.
    AppendixA {
        /// Series lengths to run.
        #[arg(long, value_delimiter = ',', default_value = "95000,5000")]
        length: Vec<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Replicated small out-of-sample study.
    AppendixD {
        #[arg(long, default_value_t = 200)]
        replicates: usize,
        #[arg(long, default_value_t = 250)]
        out_of_sample: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Run the built-in numerical checks.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Rerun the command recorded in a manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    window: Option<usize>,
    /// Comma-separated method ids (e.g. `n-FP,st-EVT,opt`) or `all`.
    #[arg(long)]
    methods: Option<String>,
    /// Levels per functional, e.g. `var=0.99;vares=0.975`.
    #[arg(long)]
    levels: Option<String>,
    /// Scores per functional, e.g. `var=linear,log;vares=log`.
    #[arg(long)]
    scores: Option<String>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// `lag0`, `bartlett` or `bartlett:<lags>`.
    #[arg(long)]
    hac: Option<String>,
    /// FHS bootstrap size; 0 uses the residuals directly.
    #[arg(long)]
    fhs_draws: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output formats: csv, svg, term.
    #[arg(long, value_delimiter = ',', default_value = "csv,svg,term")]
    format: Vec<Format>,
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(w) = self.window {
            c.window = w;
        }
        if let Some(m) = &self.methods {
            c.methods = parse_method_list(m)?;
        }
        if let Some(l) = &self.levels {
            c.targets = Targets::parse(l)?;
        }
        if let Some(s) = &self.scores {
            c.scores = Scores::parse(s)?;
        }
        if let Some(e) = self.eta {
            c.eta = e;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(h) = &self.hac {
            parse_hac(h)?;
            c.hac = h.clone();
        }
        if let Some(d) = self.fhs_draws {
            c.fhs_draws = d;
        }
        if let Some(o) = &self.out {
            c.out = o.clone();
        }
        Ok(c)
    }
}

fn build(command: Command) -> Result<(Manifest, PathBuf)> {
    let (manifest, config) = match command {
        Command::Backtest {
            input,
            no_negate,
            common,
        } => {
            let mut c = common.config()?;
            if let Some(path) = input {
                c.input = Input::Csv {
                    path,
                    negate: !no_negate,
                };
            }
            if c.is_simulated() {
                return Err(riskbt_pipeline::Error::Config(
                    "backtest needs --input or a csv input block".into(),
                ));
            }
            (
                Manifest::new(commands::BACKTEST, &c, json!({}), &common.format),
                c,
            )
        }
        Command::Simulate {
            out_of_sample,
            full,
            common,
        } => {
            let mut c = common.config()?;
            let burnin = match c.input {
                Input::Simulation { burnin, .. } => burnin,
                Input::Csv { .. } => 1000,
            };
            let current = match c.input {
                Input::Simulation { out_of_sample, .. } => out_of_sample,
                Input::Csv { .. } => 1000,
            };
            let oos = if full {
                5000
            } else {
                out_of_sample.unwrap_or(current)
            };
            c.input = Input::Simulation {
                out_of_sample: oos,
                burnin,
            };
            (
                Manifest::new(commands::SIMULATE, &c, json!({}), &common.format),
                c,
            )
        }
        Command::AppendixA { length, common } => {
            let c = common.config()?;
            (appendix_a_manifest(&c, &length, &common.format), c)
        }
        Command::AppendixD {
            replicates,
            out_of_sample,
            common,
        } => {
            let mut c = common.config()?;
            let burnin = match c.input {
                Input::Simulation { burnin, .. } => burnin,
                Input::Csv { .. } => 1000,
            };
            c.input = Input::Simulation {
                out_of_sample,
                burnin,
            };
            (appendix_d_manifest(&c, replicates, &common.format), c)
        }
        Command::Validate { common } => {
            let c = common.config()?;
            (
                Manifest::new(commands::VALIDATE, &c, json!({}), &common.format),
                c,
            )
        }
        Command::Replay { manifest, out } => {
            let m = Manifest::load(&manifest)?;
            let dir = out.unwrap_or_else(|| m.config.out.clone());
            return Ok((m, dir));
        }
    };
    Ok((manifest, config.out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = build(cli.command).and_then(|(manifest, out)| {
        let color = manifest.formats.contains(&Format::Term) && std::io::stdout().is_terminal();
        execute(&manifest, &out, color).map(|o| (manifest, o))
    });
    match run {
        Ok((manifest, outcome)) => {
            if manifest.formats.contains(&Format::Term) || manifest.command == commands::VALIDATE {
                print!("{}", outcome.text);
            }
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            if outcome.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
