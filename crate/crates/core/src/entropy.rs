//! Configurational entropy of field slices.
//!
//! Periodic slices use the discrete Fourier series with the unitary
//! normalization `A_n = N^{-1/2} Σ u_k e^{-2πi nk/N}`, so that
//! `Σ|A_n|² = Σ u_k²`. Localized samples use a trapezoid approximation of
//! the continuum transform.

use num_complex::Complex;
use rustfft::FftPlanner;

use crate::diagnostics::peak;
use crate::error::{Error, Result};
use crate::grid::Field2D;
use crate::scalar::Scalar;

/// Localized input must fall below this fraction of its maximum at both ends.
pub const LOCALIZATION_RATIO: f64 = 1.0e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct ModalSpectrum {
    pub coefficients: Vec<Complex<f64>>,
    /// `|A_n|² / Σ|A_m|²`; entry 0 is zero when the mean was excluded.
    pub fractions: Vec<f64>,
    pub exclude_mean: bool,
}

impl ModalSpectrum {
    pub fn len(&self) -> usize {
        self.fractions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fractions.is_empty()
    }

    /// Modes taking part in the fraction sum.
    pub fn retained_modes(&self) -> usize {
        self.len() - usize::from(self.exclude_mean)
    }
}

fn dft(values: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Fourier coefficients and modal fractions of a periodic slice.
pub fn spectrum_1d(slice: &[f64], exclude_mean: bool) -> Result<ModalSpectrum> {
    let n = slice.len();
    if n < 2 {
        return Err(Error::param("slice", format!("need at least 2 samples, got {n}")));
    }
    let scale = slice.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !scale.is_finite() {
        return Err(Error::param("slice", "contains non-finite values"));
    }
    let mean = if exclude_mean { slice.iter().sum::<f64>() / n as f64 } else { 0.0 };
    let centred: Vec<f64> = slice.iter().map(|v| v - mean).collect();
    let norm = 1.0 / (n as f64).sqrt();
    let coefficients: Vec<Complex<f64>> = dft(&centred).into_iter().map(|a| a * norm).collect();
    let first = usize::from(exclude_mean);
    let mut fractions: Vec<f64> = coefficients.iter().map(|a| a.norm_sqr()).collect();
    if exclude_mean {
        fractions[0] = 0.0;
    }
    let total: f64 = fractions[first..].iter().sum();
    // anything at round-off level relative to the input counts as empty
    let floor = n as f64 * (1.0e-13 * scale).powi(2);
    if total <= floor || total == 0.0 {
        return Err(Error::DegenerateSpectrum);
    }
    for f in &mut fractions {
        *f /= total;
    }
    Ok(ModalSpectrum {
        coefficients,
        fractions,
        exclude_mean,
    })
}

fn shannon(fractions: &[f64]) -> f64 {
    -fractions.iter().filter(|&&f| f > 0.0).map(|&f| f * f.ln()).sum::<f64>()
}

/// `-Σ f_n ln f_n` with `0 ln 0 = 0`.
pub fn ce_periodic(spectrum: &ModalSpectrum) -> f64 {
    shannon(&spectrum.fractions)
}

/// Non-periodic CE of localized samples with spacing `spacing`: power
/// spectrum normalized by its maximum, `-∫ f̃ ln f̃ dk` by the trapezoid rule.
pub fn ce_nonperiodic(samples: &[f64], spacing: f64) -> Result<f64> {
    let n = samples.len();
    if n < 3 {
        return Err(Error::param("samples", format!("need at least 3 samples, got {n}")));
    }
    if !(spacing > 0.0) {
        return Err(Error::param("spacing", format!("must be positive, got {spacing}")));
    }
    let max = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 || !max.is_finite() {
        return Err(Error::DegenerateSpectrum);
    }
    let edge = samples[0].abs().max(samples[n - 1].abs());
    if edge > LOCALIZATION_RATIO * max {
        return Err(Error::NotLocalized { ratio: edge / max });
    }
    // |F(k)|² is blind to the phase, so the window origin does not matter
    let power: Vec<f64> = dft(samples).iter().map(|a| (a * spacing).norm_sqr()).collect();
    let shifted: Vec<f64> = (0..n).map(|m| power[(m + n.div_ceil(2)) % n]).collect();
    let peak = shifted.iter().fold(0.0f64, |m, &v| m.max(v));
    let dk = 2.0 * std::f64::consts::PI / (n as f64 * spacing);
    let integrand: Vec<f64> = shifted
        .iter()
        .map(|&p| {
            let f = p / peak;
            if f > 0.0 {
                -f * f.ln()
            } else {
                0.0
            }
        })
        .collect();
    let inner: f64 = integrand[1..n - 1].iter().sum();
    Ok(dk * (inner + 0.5 * (integrand[0] + integrand[n - 1])))
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum SliceRule {
    /// Row containing the global peak.
    #[default]
    ThroughPeak,
    /// Row nearest to the given `y`.
    FixedY(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CESpec {
    pub slice_rule: SliceRule,
    pub exclude_mean: bool,
}

impl Default for CESpec {
    fn default() -> Self {
        Self {
            slice_rule: SliceRule::ThroughPeak,
            exclude_mean: true,
        }
    }
}

/// Row index selected by `rule`.
pub fn slice_row<T: Scalar>(xi: &Field2D<T>, rule: SliceRule) -> Result<usize> {
    let grid = xi.grid();
    match rule {
        SliceRule::ThroughPeak => {
            let p = peak(xi);
            Ok(p.j)
        }
        SliceRule::FixedY(y) => {
            let ly = grid.ly.as_f64();
            if !(-ly..=ly).contains(&y) {
                return Err(Error::param("ce.slice", format!("y = {y} outside [-{ly}, {ly}]")));
            }
            Ok(grid.nearest_row(T::lit(y)))
        }
    }
}

/// Periodic CE of the x-section selected by `spec`.
pub fn ce_of_state<T: Scalar>(xi: &Field2D<T>, spec: &CESpec) -> Result<f64> {
    let j = slice_row(xi, spec.slice_rule)?;
    let row: Vec<f64> = xi.interior_row(j).iter().map(|v| v.as_f64()).collect();
    Ok(ce_periodic(&spectrum_1d(&row, spec.exclude_mean)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cosine(n: usize, k: usize, phase: f64) -> Vec<f64> {
        (0..n).map(|i| (2.0 * PI * (k * i) as f64 / n as f64 + phase).cos()).collect()
    }

    #[test]
    fn single_mode_pair() {
        let s = spectrum_1d(&cosine(64, 5, 0.3), true).unwrap();
        let big: Vec<usize> = (0..64).filter(|&n| s.fractions[n] > 1e-20).collect();
        assert_eq!(big, vec![5, 59]);
        assert!((s.fractions[5] - 0.5).abs() < 1e-14);
        assert!((ce_periodic(&s) - 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn constant_slice_is_degenerate() {
        assert!(matches!(spectrum_1d(&[3.0; 32], true), Err(Error::DegenerateSpectrum)));
        assert!(matches!(spectrum_1d(&[0.0; 32], false), Err(Error::DegenerateSpectrum)));
        let s = spectrum_1d(&[3.0; 32], false).unwrap();
        assert_eq!(ce_periodic(&s), 0.0);
    }

    #[test]
    fn parseval_and_conjugate_symmetry() {
        let slice: Vec<f64> = (0..50).map(|i| ((i * 37 % 11) as f64).sin() + 0.1 * i as f64).collect();
        let s = spectrum_1d(&slice, false).unwrap();
        let energy: f64 = s.coefficients.iter().map(|a| a.norm_sqr()).sum();
        let mean_sq = slice.iter().map(|v| v * v).sum::<f64>() / 50.0;
        assert!((energy - 50.0 * mean_sq).abs() < 1e-10 * energy);
        for n in 1..50 {
            assert!((s.coefficients[n].norm() - s.coefficients[50 - n].norm()).abs() < 1e-12);
        }
        assert!((s.fractions.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nonperiodic_gaussian_ordering() {
        let h = 0.05;
        let xs: Vec<f64> = (0..801).map(|i| -20.0 + i as f64 * h).collect();
        let ce = |alpha: f64| {
            let s: Vec<f64> = xs.iter().map(|x| (-alpha * x * x).exp()).collect();
            ce_nonperiodic(&s, h).unwrap()
        };
        let (a, b, c) = (ce(0.25), ce(1.0), ce(4.0));
        assert!(a < b && b < c, "{a} {b} {c}");

        let s: Vec<f64> = xs.iter().map(|x| (-x * x).exp()).collect();
        let shifted: Vec<f64> = xs.iter().map(|x| (-(x - 1.3) * (x - 1.3)).exp()).collect();
        assert!((ce_nonperiodic(&s, h).unwrap() - ce_nonperiodic(&shifted, h).unwrap()).abs() < 1e-10);
        let doubled: Vec<f64> = s.iter().map(|v| 2.0 * v).collect();
        assert_eq!(ce_nonperiodic(&doubled, h).unwrap(), ce_nonperiodic(&s, h).unwrap());
    }

    #[test]
    fn nonperiodic_rejects_wide_input() {
        let s: Vec<f64> = (0..100).map(|i| (i as f64 * 0.1).cos() + 2.0).collect();
        assert!(matches!(ce_nonperiodic(&s, 0.1), Err(Error::NotLocalized { .. })));
    }
}
