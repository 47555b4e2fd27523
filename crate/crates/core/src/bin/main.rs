use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ale_kahler::analysis::{fit_decay_exponent, DecayFit, FitOutcome};
use ale_kahler::energy::energy_report;
use ale_kahler::geodesic::PathGrid;
use ale_kahler::geometry::{curvature_scan, default_tau_grid, lebrun_profile_n, ricci_sign_scan, write_scan_csv, ProfileDoc};
use ale_kahler::runner::{batch, parse_scenarios, run_scenario, write_summary, GeodesicConfig, RunOptions, Scenario};
use ale_kahler::toric::intersection_report;
use ale_kahler::Error;

#[derive(Parser)]
#[command(name = "ale-kahler", version, about = "ε-geodesics, K-energy and curvature of U(n)-invariant ALE Kähler metrics")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Recompute even when a cached run with the same content hash exists.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Worker threads for batches (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one ε-geodesic; writes grid.csv, solver_report.json, manifest.json.
    SolveGeodesic {
        #[arg(long)]
        config: PathBuf,
    },
    /// K-energy along a solved path.
    KEnergy {
        /// Geodesic config the path was solved with.
        #[arg(long)]
        config: PathBuf,
        /// `rho,t,phi` CSV.
        #[arg(long)]
        path: PathBuf,
        #[arg(long)]
        epsilon: f64,
    },
    /// Curvature scan and Ricci sign classification of a profile.
    RicciScan {
        /// Profile JSON; otherwise the LeBrun profile for --n, --k, --tau-min.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        tau_min: f64,
        #[arg(long, default_value_t = 1e3)]
        tau_max: f64,
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Intersection numbers and the mixed-type certificate on M_k.
    Intersect {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Add quadrature values over the explicit representatives.
        #[arg(long)]
        oracle: bool,
    },
    /// Fit a power-law decay exponent to one CSV column.
    DecayFit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        column: String,
        /// Radius column.
        #[arg(long, default_value = "r")]
        radius: String,
        /// Window `a,b` in r.
        #[arg(long, value_parser = parse_window)]
        window: (f64, f64),
        /// Predicted exponent, reported with the margin.
        #[arg(long, allow_hyphen_values = true)]
        predicted: Option<f64>,
    },
    /// Run a JSON array of scenarios in parallel.
    Batch {
        #[arg(long)]
        config: PathBuf,
    },
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected a,b")?;
    let a = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
    let b = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((a, b))
}

enum Failure {
    Validation(String),
    Numerical(String),
    Partial(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Validation(m) => (2, m),
                Failure::Numerical(m) => (3, m),
                Failure::Partial(m) => (4, m),
            };
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn print_json<T: Serialize>(v: &T) -> Outcome {
    let text = serde_json::to_string_pretty(v).map_err(Error::from)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Outcome {
    let mut text = serde_json::to_string_pretty(v).map_err(Error::from)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn options(g: &Global) -> RunOptions {
    RunOptions {
        out: g.out.clone().unwrap_or_else(|| PathBuf::from("runs")),
        use_cache: !g.no_cache,
    }
}

/// A config without an `id` gets one derived from its content hash.
fn single_scenario(text: &str) -> Result<Scenario, Error> {
    let mut v: serde_json::Value = serde_json::from_str(text)?;
    let missing = v.get("id").is_none();
    if missing {
        let config: GeodesicConfig = serde_json::from_value(v.clone())?;
        let probe = Scenario {
            id: "x".into(),
            config,
            analyses: Default::default(),
            output_dir: None,
        };
        let id = format!("solve-{}", &probe.content_hash()[..12]);
        v.as_object_mut()
            .ok_or_else(|| Error::InvalidParameter { field: "config", reason: "expected a JSON object".into() })?
            .insert("id".into(), id.into());
    }
    Ok(serde_json::from_value(v)?)
}

fn dispatch(cli: &Cli) -> Outcome {
    let g = &cli.global;
    match &cli.command {
        Command::SolveGeodesic { config } => {
            let s = single_scenario(&fs::read_to_string(config)?)?;
            match run_scenario(&s, &options(g)) {
                Ok(m) => {
                    print_json(&m)?;
                    if m.passed() {
                        Ok(())
                    } else {
                        Err(Failure::Numerical(format!("scenario `{}` failed checks", s.id)))
                    }
                }
                Err(e) if e.is_validation() => Err(Failure::Validation(e.to_string())),
                Err(e) => Err(Failure::Numerical(e.to_string())),
            }
        }
        Command::KEnergy { config, path, epsilon } => {
            let c: GeodesicConfig = serde_json::from_str(&fs::read_to_string(config)?).map_err(Error::from)?;
            let mut grid = PathGrid::new(c.grid, c.background()?, c.psi0.clone(), c.psi1.clone(), *epsilon)?;
            grid.read_phi_csv(fs::File::open(path)?)?;
            let rep = energy_report(&grid, *epsilon)?;
            if let Some(out) = &g.out {
                fs::create_dir_all(out)?;
                write_json(&out.join("energy.json"), &rep)?;
                rep.write_csv(fs::File::create(out.join("energy.csv"))?)?;
            }
            print_json(&rep)
        }
        Command::RicciScan {
            config,
            n,
            k,
            tau_min,
            tau_max,
            count,
            tol,
        } => {
            let p = match config {
                Some(path) => {
                    let doc: ProfileDoc = serde_json::from_str(&fs::read_to_string(path)?).map_err(Error::from)?;
                    doc.to_profile()?
                }
                None => lebrun_profile_n(*n, *k, *tau_min)?,
            };
            let taus = default_tau_grid(&p, *tau_max, *count);
            let scan = ricci_sign_scan(&p, &taus, *tol)?;
            if let Some(out) = &g.out {
                fs::create_dir_all(out)?;
                write_scan_csv(fs::File::create(out.join("scan.csv"))?, &curvature_scan(&p, &taus)?)?;
                write_json(&out.join("sign.json"), &scan)?;
            }
            print_json(&scan)
        }
        Command::Intersect { n, k, oracle } => print_json(&intersection_report(*n, *k, *oracle)?),
        Command::DecayFit {
            input,
            column,
            radius,
            window,
            predicted,
        } => {
            let samples = read_columns(input, radius, column)?;
            let outcome = match (fit_decay_exponent(&samples, *window)?, predicted) {
                (FitOutcome::Fit(f), Some(p)) => FitOutcome::Fit(DecayFit::with_prediction(f, *p)),
                (o, _) => o,
            };
            print_json(&outcome)
        }
        Command::Batch { config } => {
            let scenarios = parse_scenarios(&fs::read_to_string(config)?)?;
            let opts = options(g);
            let summary = batch(&scenarios, &opts)?;
            write_summary(&summary, &opts.out)?;
            print_json(&summary)?;
            if summary.all_passed() {
                Ok(())
            } else {
                Err(Failure::Partial(format!(
                    "{} of {} scenarios failed",
                    summary.failures,
                    summary.rows.len()
                )))
            }
        }
    }
}

fn read_columns(path: &Path, x: &str, y: &str) -> Result<Vec<(f64, f64)>, Failure> {
    let mut r = csv::Reader::from_path(path).map_err(Error::from)?;
    let headers = r.headers().map_err(Error::from)?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Failure::Validation(format!("column `{name}` not found in {}", path.display())))
    };
    let (ix, iy) = (find(x)?, find(y)?);
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(Error::from)?;
        let parse = |i: usize| {
            rec[i]
                .trim()
                .parse::<f64>()
                .map_err(|e| Failure::Validation(format!("bad number {:?}: {e}", &rec[i])))
        };
        out.push((parse(ix)?, parse(iy)?));
    }
    Ok(out)
}
