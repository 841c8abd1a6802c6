//! Builds runs from a [`RunConfig`] and records their output.
//!
//! A run directory `output_dir/run_label/` holds `config.txt`, `series.csv`,
//! `snapshots/xi_<step>.bin` (plus `eta_<step>.bin` with `emit_eta`) and,
//! after a blow-up, `failure.txt`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::diagnostics::{reconstruct_eta, DiagnosticsRecord};
use crate::entropy::CESpec;
use crate::error::{Error, Result};
use crate::io::config::{InitKind, ModelChoice, RunConfig};
use crate::io::csv::{read_profile_file, SeriesWriter};
use crate::io::snapshot::{snapshot_file_name, write_snapshot, FieldId, SnapshotHeader};
use crate::timestep::{run, RunOutcome, SimulationState, Sink};
use crate::timestep::Scheme;
use crate::wyf::{linear_spectral_radius, rk4_substeps, Model, Rhs, ShearFlow};
use crate::zk::{deposit_radial, solve_radial_default, RadialProfile};
use crate::{Field, Grid};

pub const CONFIG_FILE: &str = "config.txt";
pub const SERIES_FILE: &str = "series.csv";
pub const FAILURE_FILE: &str = "failure.txt";
pub const SNAPSHOT_DIR: &str = "snapshots";

/// Reference step for the paper grid; presets divide it by the substep
/// count the wall stability bound asks for.
pub const BASE_DT: f64 = 1.0e-4;
pub const STABILITY_SAFETY: f64 = 0.95;

fn profile_for(cfg: &RunConfig, c: f64) -> Result<RadialProfile> {
    match &cfg.init.profile {
        Some(path) => read_profile_file(Path::new(path), c),
        None => solve_radial_default(c),
    }
}

/// Initial field described by `cfg.init`. Vortices are deposited as ξ (φ in
/// ZK mode).
pub fn initial_field(cfg: &RunConfig) -> Result<Field> {
    let grid = cfg.grid()?;
    let init = &cfg.init;
    match init.kind {
        InitKind::Gaussian => Ok(crate::grid::sample_gaussian(grid, init.amplitude, init.x0, init.y0)),
        InitKind::Zk => Ok(deposit_radial(grid, &profile_for(cfg, init.c)?, init.x0, init.y0)),
        InitKind::TwoZk => {
            let second = init
                .second
                .ok_or_else(|| Error::param("init", "two_zk needs a second vortex"))?;
            let mut field = deposit_radial(grid, &profile_for(cfg, init.c)?, init.x0, init.y0);
            let other = if second.c == init.c {
                deposit_radial(grid, &profile_for(cfg, init.c)?, second.x, second.y)
            } else {
                deposit_radial(grid, &solve_radial_default(second.c)?, second.x, second.y)
            };
            field.axpy(1.0, &other);
            Ok(field)
        }
    }
}

/// Substeps per base step that keep RK4 inside its stability region on
/// this grid and model.
pub fn substeps(cfg: &RunConfig) -> Result<u64> {
    substeps_for(cfg, BASE_DT)
}

/// Substeps needed for step `dt` under the configured scheme. Leapfrog is
/// stable on the imaginary axis up to 1, RK4 up to 2√2.
pub fn substeps_for(cfg: &RunConfig, dt: f64) -> Result<u64> {
    let (grid, model) = (cfg.grid()?, cfg.model());
    Ok(match cfg.integrator.scheme {
        Scheme::Rk4 => rk4_substeps(&grid, &model, dt, STABILITY_SAFETY),
        Scheme::Leapfrog => {
            let rho = linear_spectral_radius(&grid, &model);
            ((rho * dt) / STABILITY_SAFETY).ceil().max(1.0) as u64
        }
    })
}

/// Splits the configured step into the substep count the stability bound
/// asks for and scales the cadences to match, so outputs keep their T
/// spacing. Returns the substep count.
pub fn stabilize(cfg: &mut RunConfig) -> Result<u64> {
    let k = substeps_for(cfg, cfg.integrator.dt)?;
    if k > 1 {
        cfg.integrator.dt /= k as f64;
        cfg.integrator.snapshot_every *= k;
        cfg.integrator.series_every *= k;
    }
    Ok(k)
}

/// True when the configured dt lies outside the stability margin.
pub fn dt_exceeds_bound(cfg: &RunConfig) -> Result<bool> {
    Ok(substeps_for(cfg, cfg.integrator.dt)? > 1)
}

/// Shear used for diagnostics; ZK mode has no background flow.
pub fn diagnostics_shear(cfg: &RunConfig) -> ShearFlow<f64> {
    match cfg.model.kind {
        ModelChoice::Wyf => cfg.shear,
        ModelChoice::Zk => ShearFlow::new(0.0, 0.0),
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RecordOptions {
    /// Write the run directory.
    pub write_files: bool,
    /// Keep every snapshot in memory.
    pub keep_snapshots: bool,
}

/// Sink that keeps the series in memory and optionally writes files.
pub struct Recorder {
    shear: ShearFlow<f64>,
    ce: CESpec,
    model: Model<f64>,
    emit_eta: bool,
    dir: Option<PathBuf>,
    series_out: Option<SeriesWriter<fs::File>>,
    keep_snapshots: bool,
    pub series: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<(f64, Field)>,
}

impl Recorder {
    pub fn new(cfg: &RunConfig, options: RecordOptions) -> Result<Self> {
        let mut rec = Recorder {
            shear: diagnostics_shear(cfg),
            ce: cfg.ce,
            model: cfg.model(),
            emit_eta: cfg.emit_eta && cfg.model.kind == ModelChoice::Wyf,
            dir: None,
            series_out: None,
            keep_snapshots: options.keep_snapshots,
            series: Vec::new(),
            snapshots: Vec::new(),
        };
        if options.write_files {
            let dir = run_dir(cfg);
            let snaps = dir.join(SNAPSHOT_DIR);
            fs::create_dir_all(&snaps).map_err(|e| Error::io(format!("creating {}", snaps.display()), e))?;
            let cfg_path = dir.join(CONFIG_FILE);
            fs::write(&cfg_path, cfg.to_text()).map_err(|e| Error::io(format!("writing {}", cfg_path.display()), e))?;
            let failure = dir.join(FAILURE_FILE);
            if failure.exists() {
                fs::remove_file(&failure).map_err(|e| Error::io(format!("removing {}", failure.display()), e))?;
            }
            rec.series_out = Some(SeriesWriter::create(&dir.join(SERIES_FILE))?);
            rec.dir = Some(dir);
        }
        Ok(rec)
    }

    pub fn finish(&mut self) -> Result<()> {
        if let Some(w) = &mut self.series_out {
            w.flush()?;
        }
        Ok(())
    }
}

impl Sink<f64> for Recorder {
    fn series(&mut self, state: &SimulationState<f64>) -> Result<()> {
        let record = DiagnosticsRecord::measure(state, &self.shear, &self.ce);
        if let Some(w) = &mut self.series_out {
            w.append(&record)?;
        }
        self.series.push(record);
        Ok(())
    }

    fn snapshot(&mut self, state: &SimulationState<f64>) -> Result<()> {
        if self.keep_snapshots {
            self.snapshots.push((state.time, state.xi.clone()));
        }
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        let snaps = dir.join(SNAPSHOT_DIR);
        let header = SnapshotHeader::for_field(&state.xi, state.time, FieldId::Xi)?;
        write_snapshot(&snaps.join(snapshot_file_name(FieldId::Xi, state.step)), &state.xi, &header)?;
        if self.emit_eta {
            let eta = reconstruct_eta(&state.xi, &self.model.shear);
            let header = SnapshotHeader { field_id: FieldId::Eta, ..header };
            write_snapshot(&snaps.join(snapshot_file_name(FieldId::Eta, state.step)), &eta, &header)?;
        }
        Ok(())
    }

    fn blow_up(&mut self, last_healthy: &SimulationState<f64>, error: &Error) -> Result<()> {
        self.finish()?;
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        let path = dir.join(FAILURE_FILE);
        let mut f = fs::File::create(&path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
        writeln!(
            f,
            "last_healthy_step = {}\nlast_healthy_time = {:?}\nerror = {error}",
            last_healthy.step, last_healthy.time
        )
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }
}

pub fn run_dir(cfg: &RunConfig) -> PathBuf {
    Path::new(&cfg.output_dir).join(&cfg.run_label)
}

/// Everything a finished (or failed) run leaves behind in memory.
pub struct RunArtifacts {
    pub config: RunConfig,
    pub outcome: RunOutcome<f64>,
    pub series: Vec<DiagnosticsRecord>,
    pub snapshots: Vec<(f64, Field)>,
}

impl RunArtifacts {
    pub fn blow_up_time(&self) -> Option<f64> {
        self.outcome.blow_up.map(|b| b.time)
    }
}

/// Runs `cfg` from `initial` (or from the configured initial condition).
pub fn execute(cfg: &RunConfig, initial: Option<Field>, options: RecordOptions) -> Result<RunArtifacts> {
    cfg.integrator.validate()?;
    let grid: Grid = cfg.grid()?;
    let xi = match initial {
        Some(f) if f.grid().same_as(&grid) => f,
        Some(_) => return Err(Error::GridMismatch),
        None => initial_field(cfg)?,
    };
    let mut rhs = Rhs::new(grid, cfg.model());
    let mut recorder = Recorder::new(cfg, options)?;
    let outcome = run(SimulationState::new(xi), &cfg.integrator, &mut rhs, &mut recorder)?;
    recorder.finish()?;
    Ok(RunArtifacts {
        config: cfg.clone(),
        outcome,
        series: recorder.series,
        snapshots: recorder.snapshots,
    })
}
