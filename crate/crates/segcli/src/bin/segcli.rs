use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use segcli::config::{EngineName, NeighborhoodName, Overrides, PipelineConfig};
use segcli::synthetic::{write_synthetic, SyntheticSpec};
use segcli::{run_pipeline, run_stage, Error, Result};

/// Unsupervised multispectral segmentation.
#[derive(Parser)]
#[command(name = "segcli", version)]
struct Cli {
    /// Worker threads for intra-stage parallelism (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage and write a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Run one stage from the intermediates in the output directory.
    Stage {
        /// gradient, seeds, label, segment or vectorize
        name: String,
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Write a synthetic test image and its ground truth.
    GenSynthetic {
        #[arg(long)]
        spec: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum NeighborhoodArg {
    Moore8,
    Vn4,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Synchronous,
    ActiveSet,
}

#[derive(Args)]
struct OverrideArgs {
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    asf_radius: Option<usize>,
    #[arg(long)]
    scales: Option<usize>,
    #[arg(long)]
    quant_levels: Option<usize>,
    #[arg(long)]
    min_seed_size: Option<usize>,
    #[arg(long)]
    red_band: Option<usize>,
    #[arg(long)]
    nir_band: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    /// PRNG seed for k-means restarts.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    neighborhood: Option<NeighborhoodArg>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long, value_enum)]
    engine: Option<EngineArg>,
    /// Three comma-separated band indices.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    rgb_bands: Option<Vec<usize>>,
    /// Three comma-separated 0-255 components.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    overlay_color: Option<Vec<u8>>,
}

fn triple<T: Copy>(v: Option<Vec<T>>) -> Option<[T; 3]> {
    v.map(|v| [v[0], v[1], v[2]])
}

impl OverrideArgs {
    fn into_overrides(self) -> Overrides {
        Overrides {
            output_dir: self.output_dir,
            asf_radius: self.asf_radius,
            scales: self.scales,
            quant_levels: self.quant_levels,
            min_seed_size: self.min_seed_size,
            red_band: self.red_band,
            nir_band: self.nir_band,
            k: self.k,
            restarts: self.restarts,
            prng_seed: self.seed,
            neighborhood: self.neighborhood.map(|n| match n {
                NeighborhoodArg::Moore8 => NeighborhoodName::Moore8,
                NeighborhoodArg::Vn4 => NeighborhoodName::Vn4,
            }),
            max_iters: self.max_iters,
            engine: self.engine.map(|e| match e {
                EngineArg::Synchronous => EngineName::Synchronous,
                EngineArg::ActiveSet => EngineName::ActiveSet,
            }),
            rgb_bands: triple(self.rgb_bands),
            overlay_color: triple(self.overlay_color),
        }
    }
}

fn load_config(path: &std::path::Path, overrides: OverrideArgs) -> Result<PipelineConfig> {
    let mut cfg = PipelineConfig::load(path)?;
    overrides.into_overrides().apply(&mut cfg);
    cfg.validate(None)?;
    Ok(cfg)
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run { config, overrides } => {
            let cfg = load_config(&config, overrides)?;
            let m = run_pipeline(&cfg)?;
            log::info!(
                "{} seeds ({} before pruning), k = {}, {} generations, converged = {}",
                m.seeds.after_pruning,
                m.seeds.before_pruning,
                m.labeling.k_used,
                m.growcut.iterations,
                m.growcut.converged
            );
            println!("{}", cfg.output_dir.join(segcli::pipeline::MANIFEST).display());
        }
        Command::Stage { name, config, overrides } => {
            let cfg = load_config(&config, overrides)?;
            let outcome = run_stage(&name, &cfg)?;
            for file in outcome.outputs.keys() {
                println!("{}", cfg.output_dir.join(file).display());
            }
        }
        Command::GenSynthetic { spec } => {
            let spec = SyntheticSpec::load(&spec)?;
            write_synthetic(&spec)?;
            for p in [&spec.output_header, &spec.output_data, &spec.ground_truth] {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {}", Error::Config(e.to_string()));
            return ExitCode::from(2);
        }
    }
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
