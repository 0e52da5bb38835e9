use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use antisym::circuit::text::{from_text, to_text};
use antisym::config::{
    self, BuildConfig, NoiseStudyConfig, ResourcesConfig, SynthConfig, VerifyConfig,
};
use antisym::experiments::{
    resource_table, resource_text, run_build, run_noise_study, synth_table, write_csv,
};
use antisym::synth::SynthCache;
use antisym::verify::{test_pairs, verify_circuit};
use antisym::{Error, Result};

#[derive(Parser)]
#[command(
    name = "antisym",
    version,
    about = "Fermionic antisymmetrization circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON config for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for random orbitals without their own seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for sweeps; 0 uses all cores.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Build a circuit; writes it in text form and prints gate counts.
    Build,
    /// Noisy fidelity and antisymmetry sweep; writes CSV.
    NoiseStudy,
    /// Comparator and gate-count tables; writes CSV, prints aligned text.
    Resources,
    /// Check a circuit file against the antisymmetrized orbitals.
    Verify,
    /// Clifford+T words for one rotation at several tolerances; writes CSV.
    Synth,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::InvalidArgument("--config <path> is required".into()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    match cli.command {
        Command::Build => {
            let cfg: BuildConfig = config::load(path)?;
            let art = run_build(&cfg, cli.seed, base)?;
            emit(cli.out.as_deref(), to_text(art.output_circuit()).as_bytes())?;
            eprint!("{}", art.report());
        }
        Command::NoiseStudy => {
            let cfg: NoiseStudyConfig = config::load(path)?;
            let cache_path = cfg.synth_cache.as_ref().map(|p| base.join(p));
            let mut cache = match &cache_path {
                Some(p) if p.exists() => SynthCache::load(p)?,
                _ => SynthCache::new(),
            };
            let rows = run_noise_study(&cfg, cli.seed, base, &mut cache)?;
            if let Some(p) = &cache_path {
                cache.save(p)?;
            }
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf)?;
            emit(cli.out.as_deref(), &buf)?;
        }
        Command::Resources => {
            let cfg: ResourcesConfig = config::load(path)?;
            let rows = resource_table(&cfg)?;
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf)?;
            emit(cli.out.as_deref(), &buf)?;
            eprint!("{}", resource_text(&rows, &cfg.hybrid)?);
        }
        Command::Verify => {
            let cfg: VerifyConfig = config::load(path)?;
            let text = fs::read_to_string(base.join(&cfg.circuit))?;
            let circuit = from_text(&text)?;
            let orbitals = cfg.orbitals.resolve(cfg.eta, cli.seed, base)?;
            let r = verify_circuit(&circuit, &orbitals)?;
            let mut s = format!(
                "branches={}\noverlap={:.12}\nfidelity={:.12}\nancilla_zero_probability={:.12}\n",
                r.branches, r.min_overlap, r.fidelity, r.ancilla_zero_probability
            );
            for ((i, j), p) in test_pairs(orbitals.len()).iter().zip(&r.pair_probabilities) {
                s.push_str(&format!("pair_{i}_{j}={p:.12}\n"));
            }
            emit(cli.out.as_deref(), s.as_bytes())?;
        }
        Command::Synth => {
            let cfg: SynthConfig = config::load(path)?;
            let cache_path = cfg.cache.as_ref().map(|p| base.join(p));
            let mut cache = match &cache_path {
                Some(p) if p.exists() => SynthCache::load(p)?,
                _ => SynthCache::new(),
            };
            let rows = synth_table(&cfg, &mut cache)?;
            if let Some(p) = &cache_path {
                cache.save(p)?;
            }
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf)?;
            emit(cli.out.as_deref(), &buf)?;
        }
    }
    Ok(())
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, bytes)?,
        None => io::stdout().write_all(bytes)?,
    }
    Ok(())
}
