//! Canned experiments, event detectors and verdicts.
//!
//! Presets run on the paper grid to a scaled horizon (T = 50, the collapse
//! preset to T = 60). Each carries assertions drawn from the published
//! runs; [`evaluate`] turns finished runs into pass/fail verdicts.

use std::io::Write;

use crate::diagnostics::DiagnosticsRecord;
use crate::driver::{stabilize, RunArtifacts, BASE_DT};
use crate::error::{Error, Result};
use crate::io::config::{InitKind, InitConfig, RunConfig, SecondVortex};
use crate::wyf::ShearFlow;
use crate::Field;

pub const COLLAPSE_FRACTION: f64 = 0.5;
pub const MERGE_FRACTION: f64 = 0.25;
pub const OSCILLATION_AMPLITUDE: f64 = 0.02;
pub const OSCILLATION_WINDOW: f64 = 20.0;
pub const OSCILLATION_EXTREMA: usize = 5;
/// Binomial smoothing passes applied before counting maxima.
pub const MERGE_SMOOTHING_PASSES: usize = 2;

pub const PRESET_NAMES: [&str; 7] = [
    "longevity_zk_f12",
    "gauss_vs_zk",
    "uniform_flow",
    "collapse_f02",
    "oscillation_onset",
    "merge_two_vortices",
    "ce_scan",
];

/// A scalar read off one run (or, for `ArgmaxCe`, off all of them).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Quantity {
    CollapseTime(usize),
    MergeTime(usize),
    /// Final peak over initial peak.
    PeakRetention(usize),
    /// Final peak over the peak at the merge time.
    PostMergeRetention(usize),
    /// 1 when the peak series oscillates, else 0.
    Oscillates { run: usize, at_y1: bool },
    FinalCe(usize),
    /// `f1` of the run with the largest final CE.
    ArgmaxCe,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Relation {
    Within { value: f64, tol: f64 },
    AtLeast(f64),
    Exceeds(Quantity),
    /// The quantity must be absent (the detector does not fire).
    Absent,
    Is(bool),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Expectation {
    pub quantity: Quantity,
    pub relation: Relation,
    /// What the published run shows.
    pub evidence: &'static str,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentPreset {
    pub name: String,
    /// Runs in index order; quantities refer to these indices.
    pub runs: Vec<RunConfig>,
    pub expected: Vec<Expectation>,
    /// Runs whose snapshots the evaluation needs in memory.
    pub keep_snapshots: Vec<bool>,
}

impl ExperimentPreset {
    /// The primary run.
    pub fn config(&self) -> &RunConfig {
        &self.runs[0]
    }
}

/// Config for a paper-grid WYF run. `dt` and the cadences are scaled by the
/// substep count the wall stability bound asks for, so outputs stay on the
/// same T grid as the base step.
pub fn paper_run(label: &str, f0: f64, f1: f64, init: InitConfig, t_end: f64) -> RunConfig {
    let mut cfg = RunConfig {
        shear: ShearFlow::new(f0, f1),
        init,
        run_label: label.to_string(),
        ..RunConfig::default()
    };
    cfg.integrator.t_end = t_end;
    apply_substeps(&mut cfg);
    cfg
}

/// Rescales dt and cadences of `cfg` from the base step.
pub fn apply_substeps(cfg: &mut RunConfig) {
    cfg.integrator.dt = BASE_DT;
    cfg.integrator.snapshot_every = 10_000;
    cfg.integrator.series_every = 100;
    let _ = stabilize(cfg);
}

pub fn zk_init() -> InitConfig {
    InitConfig::default()
}

pub fn gaussian_init() -> InitConfig {
    InitConfig {
        kind: InitKind::Gaussian,
        amplitude: 3.0,
        ..InitConfig::default()
    }
}

pub fn two_vortex_init() -> InitConfig {
    InitConfig {
        kind: InitKind::TwoZk,
        c: 1.5,
        x0: -5.0,
        y0: 1.0,
        second: Some(SecondVortex { c: 1.0, x: 5.0, y: 1.0 }),
        ..InitConfig::default()
    }
}

fn f1_label(prefix: &str, f1: f64) -> String {
    format!("{prefix}_f1_{f1:.1}")
}

pub fn preset(name: &str) -> Result<ExperimentPreset> {
    let t50 = 50.0;
    let (runs, expected, keep) = match name {
        "longevity_zk_f12" => (
            vec![
                paper_run("longevity_f1_1.2", 0.0, 1.2, zk_init(), t50),
                paper_run("longevity_f1_0.6", 0.0, 0.6, zk_init(), t50),
            ],
            vec![Expectation {
                quantity: Quantity::PeakRetention(0),
                relation: Relation::Exceeds(Quantity::PeakRetention(1)),
                evidence: "more likely to stay stable in the case f1=1.2",
            }],
            vec![false, false],
        ),
        "gauss_vs_zk" => (
            vec![
                paper_run("zk_f1_1.2", 0.0, 1.2, zk_init(), t50),
                paper_run("gauss_f1_1.2", 0.0, 1.2, gaussian_init(), t50),
            ],
            vec![Expectation {
                quantity: Quantity::PeakRetention(0),
                relation: Relation::Exceeds(Quantity::PeakRetention(1)),
                evidence: "the ZK profile has advantageous than the Gaussian",
            }],
            vec![false, false],
        ),
        "uniform_flow" => (
            vec![
                paper_run("uniform_f0_-1.0", -1.0, 1.2, zk_init(), t50),
                paper_run("uniform_f0_0.0", 0.0, 1.2, zk_init(), t50),
            ],
            vec![
                Expectation {
                    quantity: Quantity::CollapseTime(0),
                    relation: Relation::Absent,
                    evidence: "with the uniform flow the solution keeps the shape at the beginning",
                },
                Expectation {
                    quantity: Quantity::CollapseTime(1),
                    relation: Relation::Absent,
                    evidence: "without the uniform flow the vortex relaxes to a stable state",
                },
            ],
            vec![false, false],
        ),
        "collapse_f02" => (
            vec![paper_run("collapse_f1_0.2", 0.0, 0.2, zk_init(), 60.0)],
            vec![Expectation {
                quantity: Quantity::CollapseTime(0),
                relation: Relation::Within { value: 38.0, tol: 12.0 },
                evidence: "in the case f1=0.2, the solution collapses at T~38",
            }],
            vec![false],
        ),
        "oscillation_onset" => {
            let f1s = [1.2, 1.4, 1.6, 1.8];
            let runs = f1s.iter().map(|&f1| paper_run(&f1_label("onset", f1), 0.0, f1, zk_init(), t50)).collect();
            let expected = f1s
                .iter()
                .enumerate()
                .map(|(run, &f1)| Expectation {
                    // the f1=1.8 peak escapes to a wall, so that run is read at y~1
                    quantity: Quantity::Oscillates { run, at_y1: f1 > 1.7 },
                    relation: Relation::Is(f1 > 1.3),
                    evidence: "the oscillation of the peak amplitude begins when f1>=1.4",
                })
                .collect();
            (runs, expected, vec![false; 4])
        }
        "merge_two_vortices" => (
            vec![paper_run("merge_f1_1.0", 0.0, 1.0, two_vortex_init(), t50)],
            vec![
                Expectation {
                    quantity: Quantity::MergeTime(0),
                    relation: Relation::Within { value: 15.0, tol: 5.0 },
                    evidence: "at T~15 where the two vortices collide and merge",
                },
                Expectation {
                    quantity: Quantity::PostMergeRetention(0),
                    relation: Relation::AtLeast(0.9),
                    evidence: "after the collision, the solutions behave as single large vortices without large dissipation",
                },
            ],
            vec![true],
        ),
        "ce_scan" => {
            let runs: Vec<RunConfig> = (1..=9)
                .map(|k| {
                    let f1 = 0.2 * k as f64;
                    paper_run(&f1_label("ce", f1), 0.0, f1, zk_init(), t50)
                })
                .collect();
            let n = runs.len();
            (
                runs,
                vec![Expectation {
                    quantity: Quantity::ArgmaxCe,
                    relation: Relation::Within { value: 1.2, tol: 1e-9 },
                    evidence: "the CE always takes the maximal value at f1=1.2",
                }],
                vec![false; n],
            )
        }
        _ => return Err(Error::UnknownPreset(name.to_string())),
    };
    Ok(ExperimentPreset {
        name: name.to_string(),
        runs,
        expected,
        keep_snapshots: keep,
    })
}

/// First time the peak drops below half its initial value, or the blow-up
/// time when the run failed first.
pub fn detect_collapse(series: &[DiagnosticsRecord], blow_up_time: Option<f64>) -> Option<f64> {
    let first = series.first()?;
    let threshold = COLLAPSE_FRACTION * first.peak_value;
    series
        .iter()
        .find(|r| !(r.peak_value >= threshold))
        .map(|r| r.time)
        .or(blow_up_time)
}

/// Times of the alternating turning points whose swings from the previous
/// turning point exceed `threshold`. The starting sample is not counted.
fn zigzag(samples: &[(f64, f64)], threshold: f64) -> Vec<f64> {
    let mut pivots = Vec::new();
    let Some(&(_, v0)) = samples.first() else {
        return pivots;
    };
    let anchor = v0;
    let (mut dir, mut ext_t, mut ext_v) = (0i8, samples[0].0, v0);
    for &(t, v) in &samples[1..] {
        match dir {
            0 => {
                if (v - anchor).abs() > threshold {
                    dir = if v > anchor { 1 } else { -1 };
                    ext_t = t;
                    ext_v = v;
                }
            }
            1 => {
                if v > ext_v {
                    ext_t = t;
                    ext_v = v;
                } else if ext_v - v > threshold {
                    pivots.push(ext_t);
                    dir = -1;
                    ext_t = t;
                    ext_v = v;
                }
            }
            _ => {
                if v < ext_v {
                    ext_t = t;
                    ext_v = v;
                } else if v - ext_v > threshold {
                    pivots.push(ext_t);
                    dir = 1;
                    ext_t = t;
                    ext_v = v;
                }
            }
        }
    }
    pivots
}

/// True when some window of [`OSCILLATION_WINDOW`] holds at least
/// [`OSCILLATION_EXTREMA`] alternating extrema whose swings exceed
/// [`OSCILLATION_AMPLITUDE`] of the window mean.
pub fn detect_oscillation_samples(samples: &[(f64, f64)]) -> bool {
    let n = samples.len();
    let mut end = 0;
    for start in 0..n {
        let t0 = samples[start].0;
        while end < n && samples[end].0 <= t0 + OSCILLATION_WINDOW {
            end += 1;
        }
        let window = &samples[start..end];
        if window.len() < 2 * OSCILLATION_EXTREMA {
            continue;
        }
        let mean = window.iter().map(|s| s.1).sum::<f64>() / window.len() as f64;
        let threshold = OSCILLATION_AMPLITUDE * mean.abs();
        if zigzag(window, threshold).len() >= OSCILLATION_EXTREMA {
            return true;
        }
        if end == n {
            break;
        }
    }
    false
}

/// Oscillation test on the peak series (or on the value at `y ≈ 1`).
pub fn detect_oscillation(series: &[DiagnosticsRecord], at_y1: bool) -> bool {
    let samples: Vec<(f64, f64)> = series
        .iter()
        .map(|r| (r.time, if at_y1 { r.peak_value_at_y1 } else { r.peak_value }))
        .collect();
    detect_oscillation_samples(&samples)
}

/// One pass of the (1 2 1)⊗(1 2 1)/16 filter, periodic in x, reflected at
/// the walls.
pub fn smooth(field: &Field) -> Field {
    let mut padded = field.clone();
    padded.apply_boundary();
    let g = field.grid();
    let (nx, rows) = (g.nx as isize, g.rows() as isize);
    let mut out = field.clone();
    for j in 0..rows {
        for i in 0..nx {
            let mut acc = 0.0;
            for (dj, wj) in [(-1isize, 1.0), (0, 2.0), (1, 1.0)] {
                for (di, wi) in [(-1isize, 1.0), (0, 2.0), (1, 1.0)] {
                    acc += wj * wi * padded.get(i + di, j + dj);
                }
            }
            out.set(i, j, acc / 16.0);
        }
    }
    out.apply_boundary();
    out
}

/// Interior local maxima of `field` above `threshold` (8-neighbourhood,
/// strict against earlier neighbours to count plateaus once).
pub fn count_maxima(field: &Field, threshold: f64) -> usize {
    let g = field.grid();
    let (nx, rows) = (g.nx as isize, g.rows() as isize);
    let mut count = 0;
    for j in 0..rows {
        for i in 0..nx {
            let v = field.get(i, j);
            if !(v > threshold) {
                continue;
            }
            let mut is_max = true;
            'nb: for dj in -1..=1isize {
                let jj = j + dj;
                if jj < 0 || jj >= rows {
                    continue;
                }
                for di in -1..=1isize {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let w = field.get((i + di).rem_euclid(nx), jj);
                    let earlier = (dj, di) < (0, 0);
                    if w > v || (earlier && w == v) {
                        is_max = false;
                        break 'nb;
                    }
                }
            }
            if is_max {
                count += 1;
            }
        }
    }
    count
}

/// Maxima counted by the merge detector.
pub fn merge_maxima(field: &Field, reference_peak: f64) -> usize {
    let mut s = field.clone();
    for _ in 0..MERGE_SMOOTHING_PASSES {
        s = smooth(&s);
    }
    count_maxima(&s, MERGE_FRACTION * reference_peak)
}

/// First snapshot time with exactly one significant maximum after one with
/// two. The reference is the taller peak of the first snapshot.
pub fn detect_merge(snapshots: &[(f64, Field)]) -> Option<f64> {
    let (_, first) = snapshots.first()?;
    let reference = first.max_abs();
    let mut seen_two = false;
    for (t, f) in snapshots {
        match merge_maxima(f, reference) {
            2 => seen_two = true,
            1 if seen_two => return Some(*t),
            _ => {}
        }
    }
    None
}

pub fn peak_retention(series: &[DiagnosticsRecord]) -> Option<f64> {
    let first = series.first()?;
    let last = series.last()?;
    Some(last.peak_value / first.peak_value)
}

/// Lowest peak after the merge over the peak at the first record at or
/// after `merge_time`.
pub fn post_merge_retention(series: &[DiagnosticsRecord], merge_time: f64) -> Option<f64> {
    let k = series.iter().position(|r| r.time >= merge_time - 1e-9)?;
    let low = series[k..].iter().map(|r| r.peak_value).fold(f64::INFINITY, f64::min);
    Some(low / series[k].peak_value)
}

/// Final-record CE of each run, paired with its `f1`.
pub fn final_ce(runs: &[RunArtifacts]) -> Vec<(f64, f64)> {
    runs.iter()
        .map(|r| (r.config.shear.f1, r.series.last().map_or(f64::NAN, |s| s.ce_periodic)))
        .collect()
}

fn measure(q: Quantity, runs: &[RunArtifacts]) -> Option<f64> {
    let get = |k: usize| runs.get(k);
    match q {
        Quantity::CollapseTime(k) => get(k).and_then(|r| detect_collapse(&r.series, r.blow_up_time())),
        Quantity::MergeTime(k) => get(k).and_then(|r| detect_merge(&r.snapshots)),
        Quantity::PeakRetention(k) => get(k).and_then(|r| {
            if r.outcome.completed() {
                peak_retention(&r.series)
            } else {
                Some(0.0)
            }
        }),
        Quantity::PostMergeRetention(k) => get(k).and_then(|r| {
            let t = detect_merge(&r.snapshots)?;
            if !r.outcome.completed() {
                return Some(0.0);
            }
            post_merge_retention(&r.series, t)
        }),
        Quantity::Oscillates { run, at_y1 } => {
            get(run).map(|r| if detect_oscillation(&r.series, at_y1) { 1.0 } else { 0.0 })
        }
        Quantity::FinalCe(k) => get(k).and_then(|r| r.series.last()).map(|s| s.ce_periodic),
        Quantity::ArgmaxCe => final_ce(runs)
            .into_iter()
            .filter(|(_, ce)| ce.is_finite())
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(f1, _)| f1),
    }
}

fn quantity_label(q: Quantity, preset: &ExperimentPreset) -> String {
    let label = |k: usize| preset.runs.get(k).map_or("?", |r| r.run_label.as_str()).to_string();
    match q {
        Quantity::CollapseTime(k) => format!("collapse_time[{}]", label(k)),
        Quantity::MergeTime(k) => format!("merge_time[{}]", label(k)),
        Quantity::PeakRetention(k) => format!("peak_retention[{}]", label(k)),
        Quantity::PostMergeRetention(k) => format!("post_merge_retention[{}]", label(k)),
        Quantity::Oscillates { run, at_y1 } => {
            format!("oscillates{}[{}]", if at_y1 { "_at_y1" } else { "" }, label(run))
        }
        Quantity::FinalCe(k) => format!("final_ce[{}]", label(k)),
        Quantity::ArgmaxCe => "argmax_f1_ce".to_string(),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("none".to_string(), |v| format!("{v:.6}"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub preset: String,
    pub quantity: String,
    pub expected: String,
    pub measured: String,
    pub pass: bool,
}

/// Checks every expectation of `preset` against its finished runs.
pub fn evaluate(preset: &ExperimentPreset, runs: &[RunArtifacts]) -> Vec<Verdict> {
    preset
        .expected
        .iter()
        .map(|e| {
            let measured = measure(e.quantity, runs);
            let (expected, pass) = match e.relation {
                Relation::Within { value, tol } => (
                    format!("{value} ± {tol}"),
                    measured.is_some_and(|m| (m - value).abs() <= tol),
                ),
                Relation::AtLeast(v) => (format!(">= {v}"), measured.is_some_and(|m| m >= v)),
                Relation::Exceeds(other) => {
                    let o = measure(other, runs);
                    (
                        format!("> {} = {}", quantity_label(other, preset), fmt_opt(o)),
                        matches!((measured, o), (Some(m), Some(o)) if m > o),
                    )
                }
                Relation::Absent => ("none".to_string(), measured.is_none()),
                Relation::Is(b) => (
                    if b { "true" } else { "false" }.to_string(),
                    measured == Some(if b { 1.0 } else { 0.0 }),
                ),
            };
            let measured = match e.relation {
                Relation::Is(_) => match measured {
                    Some(v) => (v == 1.0).to_string(),
                    None => "none".to_string(),
                },
                _ => fmt_opt(measured),
            };
            Verdict {
                preset: preset.name.clone(),
                quantity: quantity_label(e.quantity, preset),
                expected,
                measured,
                pass,
            }
        })
        .collect()
}

pub fn write_verdicts<W: Write>(out: W, verdicts: &[Verdict]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let map = |e: csv::Error| Error::io("writing verdicts", std::io::Error::other(e));
    w.write_record(["preset", "quantity", "expected", "measured", "pass"]).map_err(map)?;
    for v in verdicts {
        w.write_record([
            v.preset.as_str(),
            v.quantity.as_str(),
            v.expected.as_str(),
            v.measured.as_str(),
            if v.pass { "true" } else { "false" },
        ])
        .map_err(map)?;
    }
    w.flush().map_err(|e| Error::io("writing verdicts", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample_gaussian, Grid2D};

    fn series(values: &[(f64, f64)]) -> Vec<DiagnosticsRecord> {
        values
            .iter()
            .enumerate()
            .map(|(k, &(t, v))| {
                let mut vals = [0.0; 13];
                vals[0] = t;
                vals[1] = v;
                vals[4] = v;
                DiagnosticsRecord::from_values(k as u64, vals)
            })
            .collect()
    }

    #[test]
    fn flat_series_has_no_events() {
        let s = series(&(0..500).map(|k| (k as f64 * 0.1, 2.0)).collect::<Vec<_>>());
        assert_eq!(detect_collapse(&s, None), None);
        assert!(!detect_oscillation(&s, false));
        let decaying = series(&(0..500).map(|k| (k as f64 * 0.1, 2.0 * (-0.01 * k as f64).exp())).collect::<Vec<_>>());
        assert!(!detect_oscillation(&decaying, false));
    }

    #[test]
    fn collapse_step_at_38() {
        let s = series(&(0..=600).map(|k| {
            let t = k as f64 * 0.1;
            (t, if t < 38.0 - 1e-9 { 2.4 } else { 0.4 * 2.4 })
        }).collect::<Vec<_>>());
        assert!((detect_collapse(&s, None).unwrap() - 38.0).abs() < 1e-9);
        let flat = series(&[(0.0, 1.0), (1.0, 1.0)]);
        assert_eq!(detect_collapse(&flat, Some(0.7)), Some(0.7));
    }

    #[test]
    fn oscillation_thresholds() {
        let make = |amp: f64| {
            series(&(0..2000).map(|k| {
                let t = k as f64 * 0.025;
                (t, 2.0 + amp * (2.0 * std::f64::consts::PI * t / 5.0).sin())
            }).collect::<Vec<_>>())
        };
        // period 5: about eight extrema per window of 20
        assert!(detect_oscillation(&make(0.1), false));
        // swing 2·0.01 = 1% of the mean
        assert!(!detect_oscillation(&make(0.01), false));
    }

    #[test]
    fn synthetic_merge_at_15() {
        let g = Grid2D::new(200, 100, 20.0, 10.0).unwrap();
        let snaps: Vec<(f64, Field)> = (0..=30)
            .map(|k| {
                let t = k as f64;
                let sep = if t < 15.0 { 1.5 + 5.0 * (15.0 - t) / 15.0 } else { 0.0 };
                let mut f = sample_gaussian(g, 3.0, -sep, 1.0);
                f.axpy(1.0, &sample_gaussian(g, 2.0, sep, 1.0));
                (t, f)
            })
            .collect();
        assert_eq!(merge_maxima(&snaps[0].1, 3.0), 2);
        assert_eq!(detect_merge(&snaps), Some(15.0));
    }

    #[test]
    fn presets_exist_and_round_trip() {
        for name in PRESET_NAMES {
            let p = preset(name).unwrap();
            assert!(!p.expected.is_empty());
            assert_eq!(p.keep_snapshots.len(), p.runs.len());
            for cfg in &p.runs {
                assert_eq!(&RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
            }
        }
        assert!(matches!(preset("nope"), Err(Error::UnknownPreset(_))));
        let c = preset("collapse_f02").unwrap();
        assert_eq!(c.expected[0].relation, Relation::Within { value: 38.0, tol: 12.0 });
        let m = preset("merge_two_vortices").unwrap();
        assert_eq!(m.expected[0].relation, Relation::Within { value: 15.0, tol: 5.0 });
    }

    #[test]
    fn substep_policy() {
        let p = preset("longevity_zk_f12").unwrap();
        assert_eq!(p.runs[0].integrator.dt, 5e-5);
        assert_eq!(p.runs[0].integrator.series_every, 200);
        assert_eq!(p.runs[1].integrator.dt, 1e-4);
        assert_eq!(p.runs[1].integrator.snapshot_every, 10_000);
    }
}
