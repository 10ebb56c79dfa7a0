use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lbsim::config::{Mode, ScenarioConfig};
use lbsim::output;
use lbsim::sim;

/// Intra-cell 5G multicast delivery simulator: core-anchored path vs.
/// base-station local breakout.
#[derive(Parser)]
#[command(name = "lbsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario file (TOML); see presets/ for ready-made scenarios.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for CSV outputs.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write per-packet and UE-position CSVs.
    Run(CommonArgs),
    /// Run both paths with identical draws and write the per-packet gap CSV.
    Compare(CommonArgs),
    /// Sweep the receiver count over both paths and write the sweep CSV.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Receiver counts: lo:hi:step (e.g. 10:150:10) or a comma list.
        #[arg(long, value_name = "SPEC")]
        sizes: String,
        /// Number of consecutive seeds to average per size.
        #[arg(long, default_value_t = 1)]
        seeds: u32,
    },
    /// Check a scenario file and report every invariant violation.
    Validate {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
    },
}

fn parse_sizes(spec: &str) -> Result<Vec<u32>, String> {
    let spec = spec.trim();
    let parts: Vec<&str> = spec.split(':').collect();
    let sizes: Vec<u32> = if parts.len() == 3 {
        let lo: u32 = parts[0].parse().map_err(|_| format!("bad size '{}'", parts[0]))?;
        let hi: u32 = parts[1].parse().map_err(|_| format!("bad size '{}'", parts[1]))?;
        let step: u32 = parts[2].parse().map_err(|_| format!("bad step '{}'", parts[2]))?;
        if step == 0 {
            return Err("size step must be positive".into());
        }
        (lo..=hi).step_by(step as usize).collect()
    } else if parts.len() == 1 {
        spec.split(',')
            .map(|p| p.trim().parse::<u32>().map_err(|_| format!("bad size '{p}'")))
            .collect::<Result<_, _>>()?
    } else {
        return Err(format!("cannot parse sizes '{spec}': use lo:hi:step or a comma list"));
    };
    if sizes.is_empty() {
        return Err("size list is empty".into());
    }
    if sizes.iter().any(|&s| s < 1 || s > 150) {
        return Err("sizes must lie in [1, 150]".into());
    }
    Ok(sizes)
}

fn load_checked(path: &PathBuf) -> Result<ScenarioConfig, String> {
    let cfg = ScenarioConfig::load(path).map_err(|e| e.to_string())?;
    cfg.check().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn write_out(dir: &PathBuf, name: &str, contents: &str) -> Result<PathBuf, String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    Ok(path)
}

fn cmd_run(args: &CommonArgs) -> Result<(), String> {
    let cfg = load_checked(&args.config)?;
    if cfg.mode == Mode::Paired {
        return Err("mode = \"paired\" scenarios run through the `compare` subcommand".into());
    }
    let seed = args.seed.unwrap_or(cfg.seed);
    let out = sim::run_configured(&cfg, seed);
    let packets = write_out(&args.out, "packets.csv", &output::packet_csv(&out, cfg.deadline_us))?;
    let positions = write_out(&args.out, "ue_positions.csv", &output::positions_csv(&out))?;
    print!("{}", output::run_summary(&out, &cfg, seed));
    println!("wrote {} and {}", packets.display(), positions.display());
    Ok(())
}

fn cmd_compare(args: &CommonArgs) -> Result<(), String> {
    let cfg = load_checked(&args.config)?;
    if cfg.mode != Mode::Paired {
        return Err("`compare` needs a scenario with mode = \"paired\"".into());
    }
    let seed = args.seed.unwrap_or(cfg.seed);
    let cmp = sim::compare(&cfg, seed);
    let path = write_out(&args.out, "compare.csv", &output::compare_csv(&cmp))?;
    print!("{}", output::compare_summary(&cmp, &cfg, seed));
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_sweep(common: &CommonArgs, sizes: &str, seeds: u32) -> Result<(), String> {
    let cfg = load_checked(&common.config)?;
    let sizes = parse_sizes(sizes)?;
    if seeds == 0 {
        return Err("--seeds must be at least 1".into());
    }
    let base_seed = common.seed.unwrap_or(cfg.seed);
    let seed_list: Vec<u64> = (0..seeds as u64).map(|k| base_seed + k).collect();
    let points = sim::sweep(&cfg, &sizes, &seed_list);
    let path = write_out(&common.out, "sweep.csv", &output::sweep_csv(&points))?;
    println!(
        "sweep: sizes {:?}  seeds {}..={}  dl_only={}",
        sizes,
        base_seed,
        base_seed + seeds as u64 - 1,
        cfg.dl_only
    );
    for p in &points {
        println!(
            "n={:3}  lb mean={:9.1}us  ca mean={:9.1}us  gap={:9.1}us",
            p.n_receivers,
            p.lb.mean_us,
            p.ca.mean_us,
            p.gap_us()
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_validate(path: &PathBuf) -> Result<(), String> {
    let cfg = ScenarioConfig::load(path).map_err(|e| e.to_string())?;
    let problems = cfg.validate();
    if problems.is_empty() {
        println!("{}: ok", path.display());
        Ok(())
    } else {
        for p in &problems {
            println!("{}: {}", path.display(), p);
        }
        Err(format!("{} violation(s)", problems.len()))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's own help/version output is not an error
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };

    let result = std::panic::catch_unwind(|| match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Sweep { common, sizes, seeds } => cmd_sweep(common, sizes, *seeds),
        Command::Validate { config } => cmd_validate(config),
    });

    match result {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        // an internal invariant tripped; the panic hook already printed it
        Err(_) => ExitCode::from(2),
    }
}
