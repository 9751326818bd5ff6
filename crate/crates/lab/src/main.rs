use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sctl_core::certify::{worst_status, Status};
use sctl_lab::campaign::{run_campaign, write_campaign, Campaign};
use sctl_lab::formats::{read_field, read_state, write_json};
use sctl_lab::report::certify_constants;
use sctl_lab::runner::{measure_pair, run_scenario, RunOptions, RunSummary};
use sctl_lab::scenario::Scenario;
use sctl_lab::{exit_code, LabError, LabResult, ToleranceProfile};

#[derive(Parser)]
#[command(name = "sctl", version, about = "Semiclassical transport lab: Vlasov/Hartree comparison runs, W_hbar estimates and certificates")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; the SCTL_OUT environment variable takes precedence.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = ToleranceProfile::Default)]
    tolerance_profile: ToleranceProfile,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario at the ħ values of its config.
    Simulate {
        /// Reuse per-ħ results already present in the output directory.
        #[arg(long)]
        resume: bool,
    },
    /// Run a scenario over ħ = 2^-k, k = k_min..=k_max.
    Sweep {
        #[arg(long, default_value_t = 3)]
        k_min: u32,
        #[arg(long, default_value_t = 8)]
        k_max: u32,
        #[arg(long)]
        resume: bool,
    },
    /// W_ħ estimates between a phase field and a density operator (binary
    /// files), or for the initial pairs of `--config`.
    Distance {
        #[arg(long, requires = "state")]
        field: Option<PathBuf>,
        #[arg(long, requires = "field")]
        state: Option<PathBuf>,
        /// Symbol of the state when it is a Toeplitz quantization.
        #[arg(long)]
        symbol: Option<PathBuf>,
    },
    /// Print the explicit constants against their intervals.
    CertifyConstants,
    /// Seeded certificate campaign.
    Campaign {
        /// coulomb_elementary, loglip, loglip2, gronwall or classical.
        name: String,
        #[arg(long, short = 'n', default_value_t = 1000)]
        samples: usize,
    },
}

fn out_dir(g: &Global, default: &str) -> PathBuf {
    resolve_out(std::env::var_os("SCTL_OUT"), g.out.as_deref(), default)
}

fn resolve_out(env: Option<OsString>, flag: Option<&Path>, default: &str) -> PathBuf {
    match env.filter(|v| !v.is_empty()) {
        Some(v) => PathBuf::from(v),
        None => flag.map_or_else(|| PathBuf::from(default), Path::to_path_buf),
    }
}

fn load_scenario(g: &Global) -> LabResult<Scenario> {
    let path = g.config.as_deref().ok_or_else(|| LabError::Usage("--config is required".into()))?;
    let mut sc = Scenario::load(path)?;
    if let Some(s) = g.seed {
        sc.seed = s;
    }
    Ok(sc)
}

fn print_run(summary: &RunSummary, out: &Path) {
    println!("{}: {} certificates, {} pass, {} inconclusive, {} fail", summary.name, summary.certificates, summary.passed, summary.inconclusive, summary.failed);
    for (h, w) in &summary.final_upper {
        println!("  hbar {h:<12} W_hbar(T) <= {w:.6}");
    }
    if let Some(s) = summary.slope {
        println!("  slope of log W_hbar(T) against log hbar: {s:.4}");
    }
    println!("  output: {}", out.display());
}

fn run(cli: Cli) -> LabResult<Status> {
    let g = &cli.global;
    if let Some(n) = g.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| LabError::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Simulate { resume } => {
            let sc = load_scenario(g)?;
            let out = out_dir(g, "sctl-out");
            let summary = run_scenario(&sc, &RunOptions { out: out.clone(), profile: g.tolerance_profile, resume })?;
            print_run(&summary, &out);
            Ok(summary.status)
        }
        Command::Sweep { k_min, k_max, resume } => {
            if k_min > k_max || k_max > 30 {
                return Err(LabError::Usage(format!("need k_min <= k_max <= 30, got {k_min}..{k_max}")));
            }
            let mut sc = load_scenario(g)?;
            sc.hbar = (k_min..=k_max).map(|k| 0.5f64.powi(k as i32)).collect();
            sc.validate().map_err(|(field, message)| LabError::Config { field, line: None, message })?;
            let out = out_dir(g, "sctl-sweep");
            let summary = run_scenario(&sc, &RunOptions { out: out.clone(), profile: g.tolerance_profile, resume })?;
            print_run(&summary, &out);
            Ok(summary.status)
        }
        Command::Distance { field, state, symbol } => {
            let out = out_dir(g, "sctl-distance");
            let pairs = match (field, state) {
                (Some(f), Some(s)) => {
                    let sym = symbol.as_deref().map(read_field).transpose()?;
                    vec![measure_pair(&read_field(&f)?, &read_state(&s)?, sym.as_ref(), g.tolerance_profile)?]
                }
                _ => {
                    let sc = load_scenario(g)?;
                    sc.hbar
                        .iter()
                        .map(|&h| {
                            let init = sc.initial_pair(h)?;
                            measure_pair(&init.f, &init.op, init.symbol.as_ref(), g.tolerance_profile)
                        })
                        .collect::<LabResult<_>>()?
                }
            };
            for p in &pairs {
                let e = &p.estimate;
                let exact = e.exact.map_or(String::new(), |x| format!(" exact {x:.6}"));
                println!("hbar {}: {:.6} <= W_hbar <= {:.6}{exact} ({})", e.hbar, e.lower, e.upper, e.method);
            }
            write_json(&out.join("distance.json"), &pairs)?;
            Ok(worst_status(pairs.iter().flat_map(|p| &p.certificates)))
        }
        Command::CertifyConstants => {
            let report = certify_constants();
            print!("{}", report.render());
            if g.out.is_some() || std::env::var_os("SCTL_OUT").is_some() {
                write_json(&out_dir(g, "sctl-constants").join("constants.json"), &report)?;
            }
            Ok(report.status)
        }
        Command::Campaign { name, samples } => {
            let campaign: Campaign = name.parse()?;
            let seed = g.seed.unwrap_or(0);
            let out = out_dir(g, "sctl-campaign");
            let (summary, kept) = run_campaign(campaign, samples, seed)?;
            write_campaign(&out, &summary, &kept)?;
            println!(
                "{campaign} seed {seed}: {} samples, {} pass, {} inconclusive, {} fail (worst margin {:e} at sample {})",
                summary.n_samples, summary.passed, summary.inconclusive, summary.failed, summary.worst_margin, summary.worst_index
            );
            Ok(summary.status)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(status) => ExitCode::from(exit_code(status) as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
