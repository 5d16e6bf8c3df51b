//! Non-decimated wavelet filters, circular wavelet transforms and the
//! autocorrelation-wavelet inner-product matrix.
//!
//! Scales are indexed from `j = 1` (finest) to `j = J` (coarsest). All
//! transforms use periodic boundaries: a filter longer than the series is
//! folded modulo the series length before use.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::scalar::{cast, from_usize, Real};

const HAAR: [f64; 2] = [
    std::f64::consts::FRAC_1_SQRT_2,
    std::f64::consts::FRAC_1_SQRT_2,
];

// Extremal-phase Daubechies low-pass filters, indexed by vanishing moments.
const DAUB2: [f64; 4] = [
    0.48296291314453414337,
    0.83651630373780790558,
    0.22414386804201338103,
    -0.12940952255126038117,
];
const DAUB3: [f64; 6] = [
    0.33267055295008261600,
    0.80689150931109257649,
    0.45987750211849157010,
    -0.13501102001025458870,
    -0.085441273882026661693,
    0.035226291885709536603,
];
const DAUB4: [f64; 8] = [
    0.23037781330889650086,
    0.71484657055291564709,
    0.63088076792985890788,
    -0.027983769416859854211,
    -0.18703481171909308408,
    0.030841381835560763627,
    0.032883011666885199735,
    -0.010597401785069032105,
];
const DAUB5: [f64; 10] = [
    0.16010239797419291448,
    0.60382926979718967054,
    0.72430852843777292773,
    0.13842814590132073151,
    -0.24229488706638203186,
    -0.032244869584638374648,
    0.077571493840045713523,
    -0.0062414902127982742742,
    -0.012580751999081999469,
    0.0033357252854737712780,
];
const DAUB6: [f64; 12] = [
    0.11154074335010946362,
    0.49462389039845308568,
    0.75113390802109535068,
    0.31525035170919762909,
    -0.22626469396543982008,
    -0.12976686756726193556,
    0.097501605587323049102,
    0.027522865530305728626,
    -0.031582039317486029565,
    0.00055384220116149613925,
    0.0047772575109455106396,
    -0.0010773010853084795649,
];
const DAUB7: [f64; 14] = [
    0.077852054085009179020,
    0.39653931948191730654,
    0.72913209084623511992,
    0.46978228740519312247,
    -0.14390600392856497541,
    -0.22403618499387498264,
    0.071309219266830264751,
    0.080612609151083071913,
    -0.038029936935014413580,
    -0.016574541630666880654,
    0.012550998556099840613,
    0.00042957797292136652113,
    -0.0018016407040474909153,
    0.00035371379997452024845,
];
const DAUB8: [f64; 16] = [
    0.054415842243104009955,
    0.31287159091429997066,
    0.67563073629728980681,
    0.58535468365420671277,
    -0.015829105256349305667,
    -0.28401554296154692652,
    0.00047248457391328277036,
    0.12874742662047845886,
    -0.017369301001807546170,
    -0.044088253930794751507,
    0.013981027917398281649,
    0.0087460940474057767164,
    -0.0048703529934515743104,
    -0.00039174037337694704630,
    0.00067544940645056936637,
    -0.00011747678412476953373,
];
const DAUB9: [f64; 18] = [
    0.038077947363878346589,
    0.24383467461259035373,
    0.60482312369011111190,
    0.65728807805130053808,
    0.13319738582500757619,
    -0.29327378327917490881,
    -0.096840783222976460514,
    0.14854074933810638014,
    0.030725681479333379212,
    -0.067632829061329973676,
    0.00025094711483145195759,
    0.022361662123679097205,
    -0.0047232047577513972779,
    -0.0042815036824634298345,
    0.0018476468830562264766,
    0.00023038576352319596721,
    -0.00025196318894271013697,
    0.000039347320316271599481,
];
const DAUB10: [f64; 20] = [
    0.026670057900555553587,
    0.18817680007769148902,
    0.52720118893172558648,
    0.68845903945360356574,
    0.28117234366057746075,
    -0.24984642432731537942,
    -0.19594627437737704350,
    0.12736934033579326008,
    0.093057364603572351160,
    -0.071394147166397087145,
    -0.029457536821875812858,
    0.033212674059341001740,
    0.0036065535669561696554,
    -0.010733175483330575044,
    0.0013953517470529011658,
    0.0019924052951850561172,
    -0.00068585669495971162656,
    -0.00011646685512928545095,
    0.000093588670320069591334,
    -0.000013264202894521244812,
];

/// Wavelet family. `Daubechies(n)` is the extremal-phase filter with `n`
/// vanishing moments (`2n` taps); `Daubechies(2)` is the classic 4-tap D4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum WaveletFamily {
    #[default]
    Haar,
    Daubechies(usize),
}

impl WaveletFamily {
    fn lowpass(self) -> Result<&'static [f64]> {
        Ok(match self {
            WaveletFamily::Haar => &HAAR,
            WaveletFamily::Daubechies(2) => &DAUB2,
            WaveletFamily::Daubechies(3) => &DAUB3,
            WaveletFamily::Daubechies(4) => &DAUB4,
            WaveletFamily::Daubechies(5) => &DAUB5,
            WaveletFamily::Daubechies(6) => &DAUB6,
            WaveletFamily::Daubechies(7) => &DAUB7,
            WaveletFamily::Daubechies(8) => &DAUB8,
            WaveletFamily::Daubechies(9) => &DAUB9,
            WaveletFamily::Daubechies(10) => &DAUB10,
            WaveletFamily::Daubechies(n) => {
                return Err(Error::config(format!(
                    "unsupported Daubechies order {n}; expected 2..=10 vanishing moments"
                )))
            }
        })
    }

    /// Number of taps of the level-1 filter.
    pub fn base_len(self) -> Result<usize> {
        self.lowpass().map(<[f64]>::len)
    }
}

impl fmt::Display for WaveletFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WaveletFamily::Haar => write!(f, "haar"),
            WaveletFamily::Daubechies(n) => write!(f, "db{n}"),
        }
    }
}

impl FromStr for WaveletFamily {
    type Err = Error;

    /// Accepts `haar`, `db1` (Haar) and `db2`..`db10`.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        if lower == "haar" || lower == "db1" {
            return Ok(WaveletFamily::Haar);
        }
        let order = lower
            .strip_prefix("db")
            .and_then(|n| n.parse::<usize>().ok())
            .ok_or_else(|| Error::config(format!("unknown wavelet family '{s}'")))?;
        let family = WaveletFamily::Daubechies(order);
        family.lowpass()?;
        Ok(family)
    }
}

/// Non-decimated wavelet filters for levels `1..=J`.
#[derive(Debug, Clone)]
pub struct WaveletFilters<T> {
    family: WaveletFamily,
    taps: Vec<Vec<T>>,
}

impl<T: Real> WaveletFilters<T> {
    pub fn family(&self) -> WaveletFamily {
        self.family
    }

    pub fn levels(&self) -> usize {
        self.taps.len()
    }

    /// Taps `psi_{j,0..L_j}` of level `j` (1-based, finest first).
    pub fn taps(&self, j: usize) -> &[T] {
        &self.taps[j - 1]
    }
}

/// Builds the level-`1..=levels` wavelet filters by the usual cascade:
/// the level-`j` filter is the level-`j-1` scaling filter convolved with the
/// high-pass filter upsampled by `2^(j-1)`.
pub fn build_filters<T: Real>(family: WaveletFamily, levels: usize) -> Result<WaveletFilters<T>> {
    if levels == 0 {
        return Err(Error::config("wavelet filters need at least one level"));
    }
    if levels > 24 {
        return Err(Error::config(format!(
            "{levels} levels is beyond the supported range"
        )));
    }
    let h = family.lowpass()?;
    let n = h.len();
    // Quadrature mirror: g_k = (-1)^k h_{N-1-k}.
    let g: Vec<f64> = (0..n)
        .map(|k| {
            if k % 2 == 0 {
                h[n - 1 - k]
            } else {
                -h[n - 1 - k]
            }
        })
        .collect();

    let mut taps = Vec::with_capacity(levels);
    let mut scaling: Vec<f64> = vec![1.0];
    for j in 1..=levels {
        let step = 1usize << (j - 1);
        taps.push(upsampled_conv(&scaling, &g, step));
        scaling = upsampled_conv(&scaling, h, step);
    }
    Ok(WaveletFilters {
        family,
        taps: taps
            .into_iter()
            .map(|v| v.into_iter().map(cast).collect())
            .collect(),
    })
}

/// `a * up(b, step)` where `up` inserts `step - 1` zeros between taps.
fn upsampled_conv(a: &[f64], b: &[f64], step: usize) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + (b.len() - 1) * step];
    for (k, &bk) in b.iter().enumerate() {
        let shift = k * step;
        for (n, &an) in a.iter().enumerate() {
            out[n + shift] += an * bk;
        }
    }
    out
}

/// Empirical wavelet coefficients `d_{j,k}^{(p)}`: one `T x P` matrix per scale.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletCoefficients<T: Real> {
    scales: Vec<DMatrix<T>>,
}

impl<T: Real> WaveletCoefficients<T> {
    pub fn levels(&self) -> usize {
        self.scales.len()
    }

    /// Coefficients at scale `j` (1-based); rows are locations `k`.
    pub fn scale(&self, j: usize) -> &DMatrix<T> {
        &self.scales[j - 1]
    }

    pub fn len(&self) -> usize {
        self.scales.first().map_or(0, DMatrix::nrows)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channels(&self) -> usize {
        self.scales.first().map_or(0, DMatrix::ncols)
    }
}

/// Frequency responses of the folded wavelet filters for one series length.
///
/// Holding the FFT plans lets the analysis (`d = psi (*) x`) and synthesis
/// (`y = psi * z`) steps be reused across channels and bootstrap replicates.
pub struct FilterBank<T: Real> {
    len: usize,
    responses: Vec<Vec<Complex<T>>>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> fmt::Debug for FilterBank<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FilterBank")
            .field("len", &self.len)
            .field("levels", &self.responses.len())
            .finish()
    }
}

impl<T: Real> FilterBank<T> {
    /// Prepares the bank for series of length `len`, which must equal
    /// `2^levels`.
    pub fn new(filters: &WaveletFilters<T>, len: usize) -> Result<Self> {
        let levels = filters.levels();
        if !len.is_power_of_two() {
            return Err(Error::data(format!(
                "series length {len} is not dyadic; pad it to a power of two first"
            )));
        }
        if len.trailing_zeros() as usize != levels {
            return Err(Error::config(format!(
                "filters have {levels} levels but a series of length {len} needs {}",
                len.trailing_zeros()
            )));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let responses = (1..=levels)
            .map(|j| {
                let mut folded = vec![Complex::new(T::zero(), T::zero()); len];
                for (m, &tap) in filters.taps(j).iter().enumerate() {
                    folded[m % len].re += tap;
                }
                forward.process(&mut folded);
                folded
            })
            .collect();
        Ok(FilterBank {
            len,
            responses,
            forward,
            inverse,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn levels(&self) -> usize {
        self.responses.len()
    }

    fn filter_column(&self, j: usize, input: &[T], conjugate: bool) -> Vec<T> {
        let mut buf: Vec<Complex<T>> = input.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.forward.process(&mut buf);
        for (b, r) in buf.iter_mut().zip(&self.responses[j - 1]) {
            *b *= if conjugate { r.conj() } else { *r };
        }
        self.inverse.process(&mut buf);
        let scale = T::one() / from_usize::<T>(self.len);
        buf.into_iter().map(|c| c.re * scale).collect()
    }

    /// Circular correlation `d_k = sum_m psi_{j,m} x_{(k+m) mod T}`.
    pub fn analyze(&self, j: usize, x: &[T]) -> Vec<T> {
        self.filter_column(j, x, true)
    }

    /// Circular convolution `y_t = sum_m psi_{j,m} z_{(t-m) mod T}`.
    pub fn synthesize(&self, j: usize, z: &[T]) -> Vec<T> {
        self.filter_column(j, z, false)
    }

    /// Wavelet coefficients of every channel of `x` (rows are time points).
    pub fn coefficients(&self, x: &DMatrix<T>) -> Result<WaveletCoefficients<T>> {
        if x.nrows() != self.len {
            return Err(Error::data(format!(
                "series has {} rows but the filter bank expects {}",
                x.nrows(),
                self.len
            )));
        }
        let p = x.ncols();
        let scales = (1..=self.levels())
            .map(|j| {
                let columns: Vec<Vec<T>> = (0..p)
                    .into_par_iter()
                    .map(|c| self.analyze(j, x.column(c).as_slice()))
                    .collect();
                DMatrix::from_fn(self.len, p, |k, c| columns[c][k])
            })
            .collect();
        Ok(WaveletCoefficients { scales })
    }
}

/// Non-decimated wavelet transform of a multichannel series of dyadic length.
pub fn ndwt_coefficients<T: Real>(
    x: &DMatrix<T>,
    filters: &WaveletFilters<T>,
) -> Result<WaveletCoefficients<T>> {
    FilterBank::new(filters, x.nrows())?.coefficients(x)
}

/// Discrete autocorrelation wavelets and their inner-product matrix `C`.
#[derive(Debug, Clone)]
pub struct AutocorrInnerProduct<T: Real> {
    family: WaveletFamily,
    // autocorr[j-1][tau] for tau >= 0; the functions are even in tau.
    autocorr: Vec<Vec<T>>,
    c: DMatrix<T>,
    c_inv: DMatrix<T>,
}

impl<T: Real> AutocorrInnerProduct<T> {
    pub fn levels(&self) -> usize {
        self.autocorr.len()
    }

    pub fn family(&self) -> WaveletFamily {
        self.family
    }

    /// `Psi_j(tau)`; zero outside the support.
    pub fn psi(&self, j: usize, tau: isize) -> T {
        self.autocorr[j - 1]
            .get(tau.unsigned_abs())
            .copied()
            .unwrap_or_else(T::zero)
    }

    /// Largest lag with a (structurally) nonzero `Psi_j`.
    pub fn max_lag(&self, j: usize) -> usize {
        self.autocorr[j - 1].len() - 1
    }

    pub fn c(&self) -> &DMatrix<T> {
        &self.c
    }

    pub fn c_inv(&self) -> &DMatrix<T> {
        &self.c_inv
    }
}

/// Computes `Psi_j(tau) = sum_k psi_{j,k} psi_{j,k-tau}`, the Gram matrix
/// `C_{jl} = sum_tau Psi_j(tau) Psi_l(tau)` and its inverse.
pub fn autocorrelation_inner_product<T: Real>(
    filters: &WaveletFilters<T>,
) -> Result<AutocorrInnerProduct<T>> {
    let levels = filters.levels();
    let mut planner = FftPlanner::<T>::new();
    let autocorr: Vec<Vec<T>> = (1..=levels)
        .map(|j| fft_autocorrelation(filters.taps(j), &mut planner))
        .collect();

    let two = cast::<T>(2.0);
    let c = DMatrix::from_fn(levels, levels, |a, b| {
        let (x, y) = (&autocorr[a], &autocorr[b]);
        let overlap = x.len().min(y.len());
        let tail: T = (1..overlap).map(|t| x[t] * y[t]).sum();
        x[0] * y[0] + two * tail
    });
    let c_inv = nalgebra::Cholesky::new(c.clone())
        .map(|chol| crate::linalg::symmetrize(&chol.inverse()))
        .ok_or_else(|| {
            Error::numerical(format!(
                "autocorrelation inner-product matrix is singular for {} with J = {levels}",
                filters.family()
            ))
        })?;
    Ok(AutocorrInnerProduct {
        family: filters.family(),
        autocorr,
        c,
        c_inv,
    })
}

fn fft_autocorrelation<T: Real>(taps: &[T], planner: &mut FftPlanner<T>) -> Vec<T> {
    let len = taps.len();
    let n = (2 * len - 1).next_power_of_two();
    let mut buf = vec![Complex::new(T::zero(), T::zero()); n];
    for (b, &t) in buf.iter_mut().zip(taps) {
        b.re = t;
    }
    planner.plan_fft_forward(n).process(&mut buf);
    for b in buf.iter_mut() {
        *b = Complex::new(b.norm_sqr(), T::zero());
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = T::one() / from_usize::<T>(n);
    buf.iter().take(len).map(|c| c.re * scale).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_autocorr(taps: &[f64], tau: isize) -> f64 {
        let n = taps.len() as isize;
        (0..n)
            .filter(|k| (0..n).contains(&(k - tau)))
            .map(|k| taps[k as usize] * taps[(k - tau) as usize])
            .sum()
    }

    #[test]
    fn haar_level_one_and_two() {
        let f = build_filters::<f64>(WaveletFamily::Haar, 2).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(f.taps(1).len(), 2);
        assert!((f.taps(1)[0] - h).abs() < 1e-15 && (f.taps(1)[1] + h).abs() < 1e-15);
        for (got, want) in f.taps(2).iter().zip([0.5, 0.5, -0.5, -0.5]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn support_lengths_and_unit_norm() {
        for family in [
            WaveletFamily::Haar,
            WaveletFamily::Daubechies(2),
            WaveletFamily::Daubechies(5),
            WaveletFamily::Daubechies(10),
        ] {
            let n = family.base_len().unwrap();
            let f = build_filters::<f64>(family, 6).unwrap();
            for j in 1..=6 {
                assert_eq!(f.taps(j).len(), ((1 << j) - 1) * (n - 1) + 1);
                let norm: f64 = f.taps(j).iter().map(|v| v * v).sum();
                assert!((norm - 1.0).abs() < 1e-12, "{family} level {j}: {norm}");
            }
        }
        // D4 level 3: (2^3 - 1)(4 - 1) + 1 taps.
        let d4 = build_filters::<f64>(WaveletFamily::Daubechies(2), 3).unwrap();
        assert_eq!(d4.taps(3).len(), 22);
    }

    #[test]
    fn daubechies_filters_are_orthonormal_with_vanishing_moments() {
        for order in 2..=10 {
            let h = WaveletFamily::Daubechies(order).lowpass().unwrap();
            let sum: f64 = h.iter().sum();
            assert!((sum - std::f64::consts::SQRT_2).abs() < 1e-14);
            for shift in 1..order {
                let dot: f64 = (0..h.len() - 2 * shift)
                    .map(|k| h[k] * h[k + 2 * shift])
                    .sum();
                assert!(dot.abs() < 1e-14, "order {order} shift {shift}: {dot}");
            }
            // Moments of the high-pass filter vanish up to order - 1.
            let n = h.len();
            for moment in 0..order as i32 {
                let m: f64 = (0..n)
                    .map(|k| {
                        let g = if k % 2 == 0 {
                            h[n - 1 - k]
                        } else {
                            -h[n - 1 - k]
                        };
                        g * (k as f64).powi(moment)
                    })
                    .sum();
                assert!(
                    m.abs() < 1e-8 * (n as f64).powi(moment),
                    "order {order} moment {moment}: {m}"
                );
            }
        }
    }

    #[test]
    fn rejects_bad_configuration() {
        assert!(matches!(
            build_filters::<f64>(WaveletFamily::Daubechies(11), 3),
            Err(Error::Config(_))
        ));
        assert!(build_filters::<f64>(WaveletFamily::Haar, 0).is_err());
        assert!("db12".parse::<WaveletFamily>().is_err());
        assert_eq!(
            "DB4".parse::<WaveletFamily>().unwrap(),
            WaveletFamily::Daubechies(4)
        );
        assert_eq!(
            "haar".parse::<WaveletFamily>().unwrap(),
            WaveletFamily::Haar
        );
    }

    #[test]
    fn haar_autocorrelation_and_c11() {
        let f = build_filters::<f64>(WaveletFamily::Haar, 3).unwrap();
        let acf = autocorrelation_inner_product(&f).unwrap();
        assert!((acf.psi(1, 0) - 1.0).abs() < 1e-14);
        assert!((acf.psi(1, 1) + 0.5).abs() < 1e-14);
        assert!((acf.psi(1, -1) + 0.5).abs() < 1e-14);
        assert!(acf.psi(1, 2).abs() < 1e-14);
        assert!((acf.c()[(0, 0)] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn cascade_autocorrelation_matches_double_sum() {
        for family in [
            WaveletFamily::Haar,
            WaveletFamily::Daubechies(2),
            WaveletFamily::Daubechies(7),
        ] {
            let f = build_filters::<f64>(family, 5).unwrap();
            let acf = autocorrelation_inner_product(&f).unwrap();
            for j in 1..=5 {
                let taps = f.taps(j);
                let max = taps.len() as isize;
                for tau in -max..=max {
                    let want = brute_autocorr(taps, tau);
                    assert!(
                        (acf.psi(j, tau) - want).abs() < 1e-12,
                        "{family} j={j} tau={tau}"
                    );
                }
                assert!((acf.psi(j, 0) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn c_is_spd_and_inverse_is_accurate() {
        for family in [
            WaveletFamily::Haar,
            WaveletFamily::Daubechies(2),
            WaveletFamily::Daubechies(10),
        ] {
            for levels in [1, 4, 10] {
                let f = build_filters::<f64>(family, levels).unwrap();
                let acf = autocorrelation_inner_product(&f).unwrap();
                let c = acf.c();
                assert!(crate::linalg::max_asymmetry(c) < 1e-12);
                assert!(nalgebra::Cholesky::new(c.clone()).is_some());
                let id = c * acf.c_inv();
                let err = crate::linalg::max_abs_diff(&id, &DMatrix::identity(levels, levels));
                assert!(err < 1e-8, "{family} J={levels}: {err}");
            }
        }
    }

    #[test]
    fn impulse_response_is_reversed_filter() {
        let f = build_filters::<f64>(WaveletFamily::Haar, 2).unwrap();
        let mut x = DMatrix::zeros(4, 1);
        x[(0, 0)] = 1.0;
        let d = ndwt_coefficients(&x, &f).unwrap();
        // d_k = psi_{1,(-k) mod 4}: (psi_0, 0, 0, psi_1).
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = [h, 0.0, 0.0, -h];
        for (k, want) in expected.iter().enumerate() {
            assert!((d.scale(1)[(k, 0)] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn direct_circular_sum_matches_fft_path() {
        let f = build_filters::<f64>(WaveletFamily::Daubechies(3), 4).unwrap();
        let t = 16;
        let x = DMatrix::from_fn(t, 2, |i, c| {
            ((i * 7 + c * 3) % 5) as f64 - 2.0 + 0.1 * i as f64
        });
        let d = ndwt_coefficients(&x, &f).unwrap();
        for j in 1..=4 {
            for k in 0..t {
                for c in 0..2 {
                    let want: f64 = f
                        .taps(j)
                        .iter()
                        .enumerate()
                        .map(|(m, psi)| psi * x[((k + m) % t, c)])
                        .sum();
                    assert!((d.scale(j)[(k, c)] - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn transform_rejects_non_dyadic_or_mismatched_input() {
        let f = build_filters::<f64>(WaveletFamily::Haar, 3).unwrap();
        assert!(matches!(
            ndwt_coefficients(&DMatrix::<f64>::zeros(6, 1), &f),
            Err(Error::Data(_))
        ));
        assert!(matches!(
            ndwt_coefficients(&DMatrix::<f64>::zeros(16, 1), &f),
            Err(Error::Config(_))
        ));
        let zero = ndwt_coefficients(&DMatrix::<f64>::zeros(8, 3), &f).unwrap();
        assert!((1..=3).all(|j| zero.scale(j).iter().all(|v| *v == 0.0)));
    }

    #[test]
    fn works_in_single_precision() {
        let f = build_filters::<f32>(WaveletFamily::Daubechies(2), 4).unwrap();
        let acf = autocorrelation_inner_product(&f).unwrap();
        assert!((acf.psi(2, 0) - 1.0).abs() < 1e-5);
        let id = acf.c() * acf.c_inv();
        assert!(crate::linalg::max_abs_diff(&id, &DMatrix::identity(4, 4)) < 1e-3);
    }
}
