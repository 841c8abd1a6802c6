//! Line-oriented `key = value` run configuration.
//!
//! Keys carry dotted section prefixes (`shear.f1 = 1.2`); `#` starts a
//! comment. Every key has a default, so empty text is a complete config.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::arakawa::JacobianScheme;
use crate::entropy::{CESpec, SliceRule};
use crate::error::{Error, Result};
use crate::grid::{Grid2D, MIN_POINTS};
use crate::timestep::{IntegratorConfig, Scheme};
use crate::wyf::{Model, ModelKind, ShearFlow};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            nx: 200,
            ny: 100,
            lx: 20.0,
            ly: 10.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ModelChoice {
    #[default]
    Wyf,
    Zk,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelConfig {
    pub kind: ModelChoice,
    pub include_jacobian: bool,
    pub jacobian_order: u8,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            kind: ModelChoice::Wyf,
            include_jacobian: true,
            jacobian_order: 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum InitKind {
    Gaussian,
    #[default]
    Zk,
    TwoZk,
}

/// Second vortex of a `two_zk` initial condition.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecondVortex {
    pub c: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitConfig {
    pub kind: InitKind,
    /// Gaussian amplitude.
    pub amplitude: f64,
    /// ZK speed of the (first) radial profile.
    pub c: f64,
    pub x0: f64,
    pub y0: f64,
    pub second: Option<SecondVortex>,
    /// Radial profile CSV to deposit instead of solving for `c`.
    pub profile: Option<String>,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self {
            kind: InitKind::Zk,
            amplitude: 3.0,
            c: 1.0,
            x0: 0.0,
            y0: 1.0,
            second: None,
            profile: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub integrator: IntegratorConfig<f64>,
    pub shear: ShearFlow<f64>,
    pub model: ModelConfig,
    pub init: InitConfig,
    pub ce: CESpec,
    pub output_dir: String,
    pub run_label: String,
    /// Store the stream function next to ξ in every snapshot.
    pub emit_eta: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            integrator: IntegratorConfig::default(),
            shear: ShearFlow::original(),
            model: ModelConfig::default(),
            init: InitConfig::default(),
            ce: CESpec::default(),
            output_dir: "out".to_string(),
            run_label: "run".to_string(),
            emit_eta: false,
        }
    }
}

fn config_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

fn parse_value<V: FromStr>(line: usize, key: &str, raw: &str) -> Result<V> {
    raw.parse()
        .map_err(|_| config_err(line, format!("`{key}`: cannot parse `{raw}`")))
}

fn parse_bool(line: usize, key: &str, raw: &str) -> Result<bool> {
    match raw {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(config_err(line, format!("`{key}`: expected true or false, got `{raw}`"))),
    }
}

fn finite(line: usize, key: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(config_err(line, format!("`{key}` must be finite")))
    }
}

fn positive(line: usize, key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(config_err(line, format!("`{key}` must be positive, got {v}")))
    }
}

/// Parses `ce.slice` values: `through_peak` or `y=<real>`.
pub fn parse_slice_rule(raw: &str) -> Option<SliceRule> {
    let raw = raw.trim();
    if raw == "through_peak" || raw == "through-peak" {
        return Some(SliceRule::ThroughPeak);
    }
    let y = raw.strip_prefix("y=")?.trim().parse::<f64>().ok()?;
    y.is_finite().then_some(SliceRule::FixedY(y))
}

pub fn format_slice_rule(rule: SliceRule) -> String {
    match rule {
        SliceRule::ThroughPeak => "through_peak".to_string(),
        SliceRule::FixedY(y) => format!("y={y:?}"),
    }
}

impl RunConfig {
    /// Parses config text; errors carry the 1-based line number.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = HashSet::new();
        let mut kind_line = 0;
        let (mut c2, mut x2, mut y2) = (None, None, None);
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| config_err(line, format!("expected `key = value`, got `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(config_err(line, format!("duplicate key `{key}`")));
            }
            let num = |v: &str| parse_value::<f64>(line, key, v);
            let count = |v: &str| parse_value::<usize>(line, key, v);
            let steps = |v: &str| parse_value::<u64>(line, key, v);
            match key {
                "grid.nx" => cfg.grid.nx = count(value)?,
                "grid.ny" => cfg.grid.ny = count(value)?,
                "grid.lx" => cfg.grid.lx = positive(line, key, num(value)?)?,
                "grid.ly" => cfg.grid.ly = positive(line, key, num(value)?)?,
                "integrator.scheme" => {
                    cfg.integrator.scheme = match value {
                        "rk4" => Scheme::Rk4,
                        "leapfrog" => Scheme::Leapfrog,
                        _ => return Err(config_err(line, format!("`{key}`: expected rk4 or leapfrog, got `{value}`"))),
                    }
                }
                "integrator.dt" => cfg.integrator.dt = positive(line, key, num(value)?)?,
                "integrator.t_end" => {
                    let v = num(value)?;
                    if !(v >= 0.0) || !v.is_finite() {
                        return Err(config_err(line, format!("`{key}` must be non-negative, got {v}")));
                    }
                    cfg.integrator.t_end = v;
                }
                "integrator.snapshot_every" | "integrator.series_every" => {
                    let v = steps(value)?;
                    if v == 0 {
                        return Err(config_err(line, format!("`{key}` must be at least 1")));
                    }
                    if key.ends_with("snapshot_every") {
                        cfg.integrator.snapshot_every = v;
                    } else {
                        cfg.integrator.series_every = v;
                    }
                }
                "shear.f0" => cfg.shear.f0 = finite(line, key, num(value)?)?,
                "shear.f1" => cfg.shear.f1 = finite(line, key, num(value)?)?,
                "model.kind" => {
                    cfg.model.kind = match value {
                        "wyf" => ModelChoice::Wyf,
                        "zk" | "zk_limit" => ModelChoice::Zk,
                        _ => return Err(config_err(line, format!("`{key}`: expected wyf or zk, got `{value}`"))),
                    }
                }
                "model.include_jacobian" => cfg.model.include_jacobian = parse_bool(line, key, value)?,
                "model.jacobian_order" => {
                    let v = parse_value::<u8>(line, key, value)?;
                    if JacobianScheme::from_order(v).is_none() {
                        return Err(config_err(line, format!("`{key}` must be 2 or 4, got {v}")));
                    }
                    cfg.model.jacobian_order = v;
                }
                "init.kind" => {
                    kind_line = line;
                    cfg.init.kind = match value {
                        "gaussian" => InitKind::Gaussian,
                        "zk" => InitKind::Zk,
                        "two_zk" => InitKind::TwoZk,
                        _ => {
                            return Err(config_err(
                                line,
                                format!("`{key}`: expected gaussian, zk or two_zk, got `{value}`"),
                            ))
                        }
                    }
                }
                "init.amplitude" => cfg.init.amplitude = finite(line, key, num(value)?)?,
                "init.c" => cfg.init.c = positive(line, key, num(value)?)?,
                "init.x0" => cfg.init.x0 = finite(line, key, num(value)?)?,
                "init.y0" => cfg.init.y0 = finite(line, key, num(value)?)?,
                "init.c2" => c2 = Some(positive(line, key, num(value)?)?),
                "init.x2" => x2 = Some(finite(line, key, num(value)?)?),
                "init.y2" => y2 = Some(finite(line, key, num(value)?)?),
                "init.profile" => cfg.init.profile = Some(value.to_string()),
                "ce.slice" => {
                    cfg.ce.slice_rule = parse_slice_rule(value).ok_or_else(|| {
                        config_err(line, format!("`{key}`: expected through_peak or y=<real>, got `{value}`"))
                    })?
                }
                "ce.exclude_mean" => cfg.ce.exclude_mean = parse_bool(line, key, value)?,
                "output_dir" => cfg.output_dir = value.to_string(),
                "run_label" => cfg.run_label = value.to_string(),
                "emit_eta" => cfg.emit_eta = parse_bool(line, key, value)?,
                _ => return Err(config_err(line, format!("unknown key `{key}`"))),
            }
        }

        match (c2, x2, y2) {
            (Some(c), Some(x), Some(y)) => cfg.init.second = Some(SecondVortex { c, x, y }),
            (None, None, None) => {}
            _ => return Err(config_err(kind_line, "init.c2, init.x2 and init.y2 must be given together")),
        }
        if cfg.init.kind == InitKind::TwoZk && cfg.init.second.is_none() {
            return Err(config_err(kind_line, "init.kind = two_zk requires init.c2, init.x2 and init.y2"));
        }
        if cfg.grid.nx < MIN_POINTS || cfg.grid.ny < MIN_POINTS {
            return Err(config_err(0, format!("grid.nx and grid.ny must be at least {MIN_POINTS}")));
        }
        if let SliceRule::FixedY(y) = cfg.ce.slice_rule {
            if y.abs() > cfg.grid.ly {
                return Err(config_err(0, format!("ce.slice y = {y} lies outside the domain")));
            }
        }
        Ok(cfg)
    }

    /// Complete config text that parses back to an equal value.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let g = &self.grid;
        let it = &self.integrator;
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("grid.nx", g.nx.to_string());
        put("grid.ny", g.ny.to_string());
        put("grid.lx", format!("{:?}", g.lx));
        put("grid.ly", format!("{:?}", g.ly));
        put(
            "integrator.scheme",
            match it.scheme {
                Scheme::Rk4 => "rk4",
                Scheme::Leapfrog => "leapfrog",
            }
            .to_string(),
        );
        put("integrator.dt", format!("{:?}", it.dt));
        put("integrator.t_end", format!("{:?}", it.t_end));
        put("integrator.snapshot_every", it.snapshot_every.to_string());
        put("integrator.series_every", it.series_every.to_string());
        put("shear.f0", format!("{:?}", self.shear.f0));
        put("shear.f1", format!("{:?}", self.shear.f1));
        put(
            "model.kind",
            match self.model.kind {
                ModelChoice::Wyf => "wyf",
                ModelChoice::Zk => "zk",
            }
            .to_string(),
        );
        put("model.include_jacobian", self.model.include_jacobian.to_string());
        put("model.jacobian_order", self.model.jacobian_order.to_string());
        let init = &self.init;
        put(
            "init.kind",
            match init.kind {
                InitKind::Gaussian => "gaussian",
                InitKind::Zk => "zk",
                InitKind::TwoZk => "two_zk",
            }
            .to_string(),
        );
        put("init.amplitude", format!("{:?}", init.amplitude));
        put("init.c", format!("{:?}", init.c));
        put("init.x0", format!("{:?}", init.x0));
        put("init.y0", format!("{:?}", init.y0));
        if let Some(v) = init.second {
            put("init.c2", format!("{:?}", v.c));
            put("init.x2", format!("{:?}", v.x));
            put("init.y2", format!("{:?}", v.y));
        }
        if let Some(p) = &init.profile {
            put("init.profile", p.clone());
        }
        put("ce.slice", format_slice_rule(self.ce.slice_rule));
        put("ce.exclude_mean", self.ce.exclude_mean.to_string());
        put("output_dir", self.output_dir.clone());
        put("run_label", self.run_label.clone());
        put("emit_eta", self.emit_eta.to_string());
        s
    }

    pub fn grid(&self) -> Result<Grid2D<f64>> {
        Grid2D::new(self.grid.nx, self.grid.ny, self.grid.lx, self.grid.ly)
    }

    pub fn model(&self) -> Model<f64> {
        let scheme = JacobianScheme::from_order(self.model.jacobian_order).unwrap_or_default();
        match self.model.kind {
            ModelChoice::Zk => Model { scheme, ..Model::zk() },
            ModelChoice::Wyf => Model {
                kind: ModelKind::Wyf {
                    include_jacobian: self.model.include_jacobian,
                },
                shear: self.shear,
                scheme,
            },
        }
    }
}
