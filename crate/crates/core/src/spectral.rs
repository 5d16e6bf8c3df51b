//! Wavelet periodograms, bias correction, positive-definite regularization
//! and symmetric padding to dyadic length.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::symmetrize;
use crate::scalar::{cast, from_usize, Real};
use crate::wavelet::WaveletCoefficients;

/// Relative eigenvalue floor used by [`regularize_pd`] throughout the pipeline.
pub const DEFAULT_EPS_REL: f64 = 1e-6;

/// What a [`WaveletSpectrum`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum SpectrumKind {
    /// Bias-corrected estimate of the observed process spectrum.
    SHatX,
    /// Spectrum prescribed for the surrogate process.
    SHatY,
    /// Raw-periodogram expectation `sum_l C_jl S_l`.
    Beta,
    /// Time (and possibly replicate) averaged periodogram.
    AveragedPeriodogram,
}

/// One symmetric `P x P` matrix per scale, finest first.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletSpectrum<T: Real> {
    pub kind: SpectrumKind,
    pub scales: Vec<DMatrix<T>>,
}

impl<T: Real> WaveletSpectrum<T> {
    pub fn new(kind: SpectrumKind, scales: Vec<DMatrix<T>>) -> Self {
        WaveletSpectrum { kind, scales }
    }

    pub fn levels(&self) -> usize {
        self.scales.len()
    }

    pub fn channels(&self) -> usize {
        self.scales.first().map_or(0, DMatrix::nrows)
    }

    /// Matrix at scale `j` (1-based).
    pub fn scale(&self, j: usize) -> &DMatrix<T> {
        &self.scales[j - 1]
    }

    /// Entrywise `out_j = sum_l mix[(j, l)] * self_l`.
    pub fn mix(&self, mix: &DMatrix<T>, kind: SpectrumKind) -> Result<Self> {
        let levels = self.levels();
        if mix.nrows() != levels || mix.ncols() != levels {
            return Err(Error::config(format!(
                "mixing matrix is {}x{} but the spectrum has {levels} scales",
                mix.nrows(),
                mix.ncols()
            )));
        }
        let p = self.channels();
        let scales = (0..levels)
            .map(|j| {
                let mut acc = DMatrix::zeros(p, p);
                for (l, m) in self.scales.iter().enumerate() {
                    acc += m * mix[(j, l)];
                }
                symmetrize(&acc)
            })
            .collect();
        Ok(WaveletSpectrum { kind, scales })
    }
}

/// Raw wavelet periodogram `I_{j,k} = d_{j,k} d_{j,k}^T`.
///
/// The rank-one matrices are formed on demand; only the coefficients are
/// stored.
#[derive(Debug, Clone)]
pub struct RawPeriodogram<'a, T: Real> {
    coefficients: &'a WaveletCoefficients<T>,
}

impl<'a, T: Real> RawPeriodogram<'a, T> {
    pub fn new(coefficients: &'a WaveletCoefficients<T>) -> Self {
        RawPeriodogram { coefficients }
    }

    pub fn levels(&self) -> usize {
        self.coefficients.levels()
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// `I_{j,k}` for scale `j` (1-based) and location `k`.
    pub fn at(&self, j: usize, k: usize) -> DMatrix<T> {
        let d = self.coefficients.scale(j).row(k).transpose();
        &d * d.transpose()
    }
}

/// `(1/T) sum_k I_{j,k}` at every scale.
pub fn time_averaged_periodogram<T: Real>(
    periodogram: &RawPeriodogram<'_, T>,
) -> WaveletSpectrum<T> {
    let coeffs = periodogram.coefficients;
    let inv_len = T::one() / from_usize::<T>(coeffs.len().max(1));
    let scales = (1..=coeffs.levels())
        .map(|j| {
            let d = coeffs.scale(j);
            symmetrize(&(d.tr_mul(d) * inv_len))
        })
        .collect();
    WaveletSpectrum::new(SpectrumKind::AveragedPeriodogram, scales)
}

/// Bias-corrected spectrum `S_j = sum_l (C^-1)_{jl} I_l`, regularized to be
/// positive definite at every scale.
pub fn bias_correct<T: Real>(
    averaged: &WaveletSpectrum<T>,
    c_inv: &DMatrix<T>,
    eps_rel: T,
) -> Result<WaveletSpectrum<T>> {
    let mut corrected = averaged.mix(c_inv, SpectrumKind::SHatX)?;
    for m in corrected.scales.iter_mut() {
        *m = regularize_pd(m, eps_rel);
    }
    Ok(corrected)
}

/// Clips the eigenvalues of a symmetric matrix from below at
/// `eps_rel * max(lambda_max, 1e-12)`.
///
/// A matrix whose smallest eigenvalue already clears the floor is returned
/// unchanged.
pub fn regularize_pd<T: Real>(m: &DMatrix<T>, eps_rel: T) -> DMatrix<T> {
    let n = m.nrows();
    if n == 0 {
        return m.clone();
    }
    let sym = symmetrize(m);
    let eig = sym.clone().symmetric_eigen();
    let lambda_max = eig.eigenvalues.max();
    let lambda_min = eig.eigenvalues.min();
    let floor = eps_rel * lambda_max.max(cast(1e-12));
    // Slack absorbs the round-off of a previous reconstruction so the map is
    // idempotent.
    if lambda_min >= floor * cast::<T>(1.0 - 1e-8) {
        return m.clone();
    }
    let clipped = eig.eigenvalues.map(|v| v.max(floor));
    let v = &eig.eigenvectors;
    symmetrize(&(v * DMatrix::from_diagonal(&clipped) * v.transpose()))
}

/// A series extended to dyadic length by symmetric padding.
#[derive(Debug, Clone, PartialEq)]
pub struct PaddedSeries<T: Real> {
    pub data: DMatrix<T>,
    pub original_len: usize,
}

/// Extends `x` to the next power of two by appending its time-reversed tail.
pub fn symmetric_pad<T: Real>(x: &DMatrix<T>) -> Result<PaddedSeries<T>> {
    let t = x.nrows();
    if t < 2 {
        return Err(Error::data(format!(
            "need at least 2 observations, got {t}"
        )));
    }
    let target = t.next_power_of_two();
    let data = DMatrix::from_fn(target, x.ncols(), |i, c| {
        if i < t {
            x[(i, c)]
        } else {
            x[(2 * t - 1 - i, c)]
        }
    });
    Ok(PaddedSeries {
        data,
        original_len: t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn pad_lengths() {
        let x = DMatrix::<f64>::zeros(456, 2);
        assert_eq!(symmetric_pad(&x).unwrap().data.nrows(), 512);
        let y = DMatrix::from_fn(1024, 1, |i, _| i as f64);
        let padded = symmetric_pad(&y).unwrap();
        assert_eq!(padded.data, y);
        assert_eq!(padded.original_len, 1024);
        assert!(symmetric_pad(&DMatrix::<f64>::zeros(1, 3)).is_err());
    }

    #[test]
    fn pad_reflects_tail() {
        // rows: 0, 1, a, b, c  ->  ..., c, b, a
        let x = DMatrix::from_row_slice(5, 1, &[0.0, 1.0, 10.0, 20.0, 30.0]);
        let padded = symmetric_pad(&x).unwrap().data;
        assert_eq!(padded.nrows(), 8);
        assert_eq!(
            padded.rows(5, 3).iter().copied().collect::<Vec<_>>(),
            vec![30.0, 20.0, 10.0]
        );
    }

    #[test]
    fn regularize_examples() {
        let id = DMatrix::<f64>::identity(3, 3);
        assert_eq!(regularize_pd(&id, 1e-6), id);
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0f64, -0.1]));
        let r = regularize_pd(&m, 1e-6);
        assert!((r[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((r[(1, 1)] - 1e-6).abs() < 1e-12);
        assert!(r[(0, 1)].abs() < 1e-12);
    }

    #[test]
    fn regularize_indefinite_and_idempotent() {
        let a = DMatrix::from_fn(5, 5, |i, j| ((i * 31 + j * 17) % 11) as f64 - 5.0);
        let m = symmetrize(&a);
        let r = regularize_pd(&m, 1e-6);
        let eig = r.clone().symmetric_eigen().eigenvalues;
        assert!(eig.min() >= 1e-6 * eig.max() * (1.0 - 1e-6));
        let again = regularize_pd(&r, 1e-6);
        assert!(max_abs_diff(&r, &again) < 1e-12);
    }

    #[test]
    fn identity_mixing_is_a_no_op() {
        let spec = WaveletSpectrum::new(
            SpectrumKind::AveragedPeriodogram,
            vec![DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]); 3],
        );
        let out = bias_correct(&spec, &DMatrix::identity(3, 3), 1e-6).unwrap();
        assert_eq!(out.kind, SpectrumKind::SHatX);
        for j in 1..=3 {
            assert!(max_abs_diff(out.scale(j), spec.scale(j)) < 1e-15);
        }
        assert!(spec
            .mix(&DMatrix::identity(2, 2), SpectrumKind::Beta)
            .is_err());
    }
}
