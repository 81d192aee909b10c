use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ddmod::bases::{Basis, SchemeId};
use ddmod::experiments::{
    energy_cv, run_ber, run_energy_profile, run_estimated, run_nmse, run_property_suite, table_one,
    write_rows_csv, write_table_csv, CsiMode, ExperimentConfig,
};
use ddmod::properties::{equivalence_report, write_report, write_verdicts_csv};

#[derive(Parser)]
#[command(name = "ddmod", version, about = "Delay-Doppler modulation link-level simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config file).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for CSV files.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Monte-Carlo trials per SNR point (overrides the config file).
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Csi {
    Perfect,
    Estimated,
}

#[derive(Subcommand)]
enum Command {
    /// Per-carrier received energy over one channel draw.
    Energy(Common),
    /// Bit error rate against SNR.
    Ber {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "perfect")]
        csi: Csi,
        /// In estimated mode, also write nmse.csv from the same trials.
        #[arg(long)]
        with_nmse: bool,
    },
    /// Channel-estimation NMSE against pilot SNR.
    Nmse(Common),
    /// Non-selectivity, predictability and equivalence verdicts with the comparison table.
    Props(Common),
    /// Unitary-equivalence report.
    Equiv(Common),
    /// Export one basis as a DDMB matrix file.
    Basis {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        scheme: String,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::parse(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.trials = trials;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    eprintln!("writing {}", path.display());
    Ok(BufWriter::new(file))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Energy(common) => {
            let cfg = load(&common)?;
            let rows = run_energy_profile(&cfg)?;
            write_rows_csv(&rows, create(&common.out, "energy.csv")?)?;
            for &s in &cfg.schemes {
                println!("{:<9} cv={:.3e}", s.name(), energy_cv(&rows, s));
            }
        }
        Command::Ber { common, csi, with_nmse } => {
            let mut cfg = load(&common)?;
            match csi {
                Csi::Perfect => {
                    cfg.csi_mode = CsiMode::Perfect;
                    write_rows_csv(&run_ber(&cfg)?, create(&common.out, "ber_perfect.csv")?)?;
                }
                Csi::Estimated => {
                    cfg.csi_mode = CsiMode::Estimated;
                    let (ber, nmse) = run_estimated(&cfg)?;
                    write_rows_csv(&ber, create(&common.out, "ber_estimated.csv")?)?;
                    if with_nmse {
                        write_rows_csv(&nmse, create(&common.out, "nmse.csv")?)?;
                    }
                }
            }
        }
        Command::Nmse(common) => {
            let mut cfg = load(&common)?;
            cfg.csi_mode = CsiMode::Estimated;
            write_rows_csv(&run_nmse(&cfg)?, create(&common.out, "nmse.csv")?)?;
        }
        Command::Props(common) => {
            let cfg = load(&common)?;
            let verdicts = run_property_suite(&cfg)?;
            write_report(&verdicts, io::stdout().lock())?;
            let table = table_one(&verdicts);
            write_verdicts_csv(&verdicts, create(&common.out, "properties.csv")?)?;
            write_table_csv(&table, create(&common.out, "table1.csv")?)?;
            write_table_csv(&table, io::stdout().lock())?;
            if verdicts.iter().any(|v| v.agrees() == Some(false)) {
                bail!("at least one verdict contradicts its prediction");
            }
        }
        Command::Equiv(common) => {
            let cfg = load(&common)?;
            let verdicts = equivalence_report(&cfg.frame::<f64>()?, &cfg.afdm)?;
            write_report(&verdicts, io::stdout().lock())?;
            write_verdicts_csv(&verdicts, create(&common.out, "equivalence.csv")?)?;
        }
        Command::Basis { common, scheme } => {
            let cfg = load(&common)?;
            let scheme = SchemeId::from_str(&scheme)?;
            let frame = cfg.frame::<f64>()?;
            let basis = Basis::generate(scheme, &frame, (scheme == SchemeId::Afdm).then_some(cfg.afdm))?;
            let name = format!("{}.ddmb", scheme.name().to_ascii_lowercase());
            let mut w = create(&common.out, &name)?;
            basis.write_ddmb(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}
