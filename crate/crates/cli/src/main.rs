use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wyf_core::driver::{self, execute, initial_field, stabilize, RecordOptions};
use wyf_core::entropy::{ce_of_state, CESpec};
use wyf_core::experiments::{self, detect_collapse, evaluate, peak_retention, write_verdicts, PRESET_NAMES};
use wyf_core::io::config::{parse_slice_rule, RunConfig};
use wyf_core::io::csv::{write_ce, write_profile, CeRow};
use wyf_core::io::snapshot::{read_snapshot, FieldId};
use wyf_core::zk::{default_r_max, solve_radial, DEFAULT_DR, DEFAULT_TOL};
use wyf_core::Error;

mod checks;

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BLOW_UP: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(name = "wyflab", version, about = "Vortex evolution in the WYF equation with shear flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the radial ZK solitary wave and save it as CSV (r, phi).
    ZkProfile {
        #[arg(long)]
        c: f64,
        #[arg(long)]
        r_max: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_DR)]
        dr: f64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evolve one configuration, writing series CSV and snapshots.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Store the stream function next to xi in every snapshot.
        #[arg(long)]
        emit_eta: bool,
        /// Keep the configured dt even when it is outside the stability bound.
        #[arg(long)]
        fixed_dt: bool,
    },
    /// Run one configuration for several shear strengths from the same
    /// initial state.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        f1: Vec<f64>,
        #[arg(long)]
        t_end: f64,
        #[arg(long)]
        fixed_dt: bool,
    },
    /// Configurational entropy of every xi snapshot in a directory.
    Entropy {
        #[arg(long)]
        snapshots: PathBuf,
        /// `through-peak` or `y=<real>`.
        #[arg(long, default_value = "through-peak")]
        slice: String,
        /// Shear value written in the f1 column; read from the run's
        /// config.txt when omitted.
        #[arg(long)]
        f1: Option<f64>,
        /// Keep the mean mode in the spectrum.
        #[arg(long)]
        keep_mean: bool,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print measured convergence orders of the stencils and of RK4.
    Convergence,
    /// Run the quick property checks, or the experiment presets.
    Verify {
        /// Run one preset and emit its verdict CSV.
        #[arg(long, conflicts_with = "all")]
        preset: Option<String>,
        /// Run every preset.
        #[arg(long)]
        all: bool,
        /// Verdict CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for the preset run outputs.
        #[arg(long, default_value = "out")]
        output_dir: String,
    },
}

enum Failure {
    Usage(String),
    Core(Error),
    BlowUp(String),
    Failed(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn io_err(context: &str, e: io::Error) -> Failure {
    Failure::Core(Error::io(context.to_string(), e))
}

fn exit_code(f: &Failure) -> u8 {
    match f {
        Failure::Usage(_) => EXIT_USAGE,
        Failure::BlowUp(_) => EXIT_BLOW_UP,
        Failure::Failed(_) => EXIT_FAILED,
        Failure::Core(e) => match e {
            Error::Io { .. } => EXIT_IO,
            Error::BlowUp { .. } => EXIT_BLOW_UP,
            Error::Config { .. } | Error::InvalidParameter { .. } | Error::UnknownPreset(_) | Error::InvalidGrid(_) => {
                EXIT_USAGE
            }
            Error::BadMagic | Error::Truncated { .. } | Error::DimensionOverflow { .. } | Error::BadHeader(_) => EXIT_IO,
            _ => EXIT_FAILED,
        },
    }
}

fn message(f: &Failure) -> String {
    match f {
        Failure::Usage(m) | Failure::BlowUp(m) | Failure::Failed(m) => m.clone(),
        Failure::Core(e) => e.to_string(),
    }
}

fn load_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_err(&format!("reading {}", path.display()), e))?;
    RunConfig::parse(&text).map_err(|e| match e {
        Error::Config { line, message } => Failure::Usage(format!("{}:{line}: {message}", path.display())),
        other => Failure::Core(other),
    })
}

fn prepare_dt(cfg: &mut RunConfig, fixed_dt: bool) -> Result<(), Failure> {
    if fixed_dt {
        if driver::dt_exceeds_bound(cfg)? {
            eprintln!(
                "warning: dt = {} is outside the stability bound for f1 = {}; expect a blow-up",
                cfg.integrator.dt, cfg.shear.f1
            );
        }
        return Ok(());
    }
    let k = stabilize(cfg)?;
    if k > 1 {
        eprintln!(
            "note: dt reduced to {:e} ({k} substeps) to stay inside the stability bound for f1 = {}",
            cfg.integrator.dt, cfg.shear.f1
        );
    }
    Ok(())
}

fn cmd_zk_profile(c: f64, r_max: Option<f64>, dr: f64, tol: f64, out: &Path) -> Result<(), Failure> {
    let r_max = r_max.unwrap_or_else(|| default_r_max(c));
    let profile = solve_radial(c, r_max, dr, tol)?;
    let file = fs::File::create(out).map_err(|e| io_err(&format!("creating {}", out.display()), e))?;
    write_profile(io::BufWriter::new(file), &profile)?;
    println!(
        "c = {c}: amplitude {:.15}, tail from r = {:.3}, {} samples -> {}",
        profile.amplitude(),
        profile.tail_radius(),
        profile.values.len(),
        out.display()
    );
    Ok(())
}

fn summarize(art: &driver::RunArtifacts) {
    let s = &art.outcome.state;
    println!(
        "{}: {} steps, T = {:.4}, peak {:.6}, retention {:.4}, collapse {}",
        art.config.run_label,
        s.step,
        s.time,
        art.series.last().map_or(f64::NAN, |r| r.peak_value),
        peak_retention(&art.series).unwrap_or(f64::NAN),
        detect_collapse(&art.series, art.blow_up_time()).map_or("none".to_string(), |t| format!("at T = {t:.2}")),
    );
}

fn cmd_run(config: &Path, emit_eta: bool, fixed_dt: bool) -> Result<(), Failure> {
    let mut cfg = load_config(config)?;
    cfg.emit_eta |= emit_eta;
    prepare_dt(&mut cfg, fixed_dt)?;
    let art = execute(&cfg, None, RecordOptions { write_files: true, keep_snapshots: false })?;
    summarize(&art);
    if let Some(b) = art.outcome.blow_up {
        return Err(Failure::BlowUp(format!(
            "blow-up at step {} (T = {}) in cell ({}, {}); see {}",
            b.step,
            b.time,
            b.i,
            b.j,
            driver::run_dir(&cfg).join(driver::FAILURE_FILE).display()
        )));
    }
    Ok(())
}

fn cmd_sweep(config: &Path, f1s: &[f64], t_end: f64, fixed_dt: bool) -> Result<(), Failure> {
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Failure::Usage(format!("--t-end must be non-negative, got {t_end}")));
    }
    let base = load_config(config)?;
    let initial = initial_field(&base)?;
    let mut blown = Vec::new();
    for &f1 in f1s {
        if !f1.is_finite() {
            return Err(Failure::Usage(format!("--f1 values must be finite, got {f1}")));
        }
        let mut cfg = base.clone();
        cfg.shear.f1 = f1;
        cfg.integrator.t_end = t_end;
        cfg.run_label = format!("{}_f1_{f1}", base.run_label);
        prepare_dt(&mut cfg, fixed_dt)?;
        let art = execute(&cfg, Some(initial.clone()), RecordOptions { write_files: true, keep_snapshots: false })?;
        summarize(&art);
        if art.outcome.blow_up.is_some() {
            blown.push(f1);
        }
    }
    if !blown.is_empty() {
        return Err(Failure::BlowUp(format!("runs with f1 = {blown:?} blew up")));
    }
    Ok(())
}

fn cmd_entropy(
    dir: &Path,
    slice: &str,
    f1: Option<f64>,
    keep_mean: bool,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let rule = parse_slice_rule(slice)
        .ok_or_else(|| Failure::Usage(format!("--slice expects through-peak or y=<real>, got `{slice}`")))?;
    let spec = CESpec {
        slice_rule: rule,
        exclude_mean: !keep_mean,
    };
    let f1 = match f1 {
        Some(v) => v,
        None => dir
            .parent()
            .map(|p| p.join(driver::CONFIG_FILE))
            .and_then(|p| fs::read_to_string(p).ok())
            .and_then(|t| RunConfig::parse(&t).ok())
            .map_or(f64::NAN, |c| c.shear.f1),
    };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| io_err(&format!("listing {}", dir.display()), e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "bin"))
        .collect();
    paths.sort();
    let mut rows = Vec::new();
    for path in &paths {
        let (header, field) = read_snapshot(path)?;
        if header.field_id != FieldId::Xi {
            continue;
        }
        let ce = match ce_of_state(&field, &spec) {
            Ok(v) => v,
            Err(Error::DegenerateSpectrum) => f64::NAN,
            Err(e) => return Err(e.into()),
        };
        rows.push(CeRow { f1, time: header.time, ce });
    }
    rows.sort_by(|a, b| a.time.total_cmp(&b.time));
    match out {
        Some(p) => {
            let file = fs::File::create(p).map_err(|e| io_err(&format!("creating {}", p.display()), e))?;
            write_ce(io::BufWriter::new(file), &rows)?;
        }
        None => write_ce(io::stdout().lock(), &rows)?,
    }
    Ok(())
}

fn cmd_verify(preset: Option<&str>, all: bool, out: Option<&Path>, output_dir: &str) -> Result<(), Failure> {
    let names: Vec<&str> = match (preset, all) {
        (Some(p), _) => vec![p],
        (None, true) => PRESET_NAMES.to_vec(),
        (None, false) => {
            let ok = checks::run_quick_checks();
            return if ok {
                Ok(())
            } else {
                Err(Failure::Failed("some property checks failed".to_string()))
            };
        }
    };
    let mut verdicts = Vec::new();
    for name in names {
        let p = experiments::preset(name)?;
        let mut arts = Vec::new();
        for (cfg, &keep) in p.runs.iter().zip(&p.keep_snapshots) {
            let mut cfg = cfg.clone();
            cfg.output_dir = format!("{output_dir}/{name}");
            let art = execute(&cfg, None, RecordOptions { write_files: true, keep_snapshots: keep })?;
            summarize(&art);
            arts.push(art);
        }
        verdicts.extend(evaluate(&p, &arts));
    }
    match out {
        Some(p) => {
            let file = fs::File::create(p).map_err(|e| io_err(&format!("creating {}", p.display()), e))?;
            write_verdicts(file, &verdicts)?;
        }
        None => {
            let mut buf = Vec::new();
            write_verdicts(&mut buf, &verdicts)?;
            io::stdout().write_all(&buf).map_err(|e| io_err("writing stdout", e))?;
        }
    }
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    if failed > 0 {
        return Err(Failure::Failed(format!("{failed} of {} verdicts failed", verdicts.len())));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::ZkProfile { c, r_max, dr, tol, out } => cmd_zk_profile(*c, *r_max, *dr, *tol, out),
        Command::Run { config, emit_eta, fixed_dt } => cmd_run(config, *emit_eta, *fixed_dt),
        Command::Sweep { config, f1, t_end, fixed_dt } => cmd_sweep(config, f1, *t_end, *fixed_dt),
        Command::Entropy { snapshots, slice, f1, keep_mean, out } => {
            cmd_entropy(snapshots, slice, *f1, *keep_mean, out.as_deref())
        }
        Command::Convergence => {
            checks::print_convergence();
            Ok(())
        }
        Command::Verify { preset, all, out, output_dir } => cmd_verify(preset.as_deref(), *all, out.as_deref(), output_dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", message(&f));
            ExitCode::from(exit_code(&f))
        }
    }
}
