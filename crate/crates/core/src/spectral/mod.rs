//! From segmented recordings to eigen-Laplacian features: epoch assembly,
//! averaged periodogram spectra, total variation dissimilarity, affinity,
//! normalized graph Laplacian and its leading eigenvectors.

pub mod eigen;
pub mod kmeans;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::model::{Dataset, SubjectData};
use crate::scalar::{cnt, lit, Scalar};
use crate::sim::SegmentedRecording;

/// Per-segment taper applied before the FFT.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Taper {
    None,
    /// Full cosine (Hann) taper.
    Cosine,
}

/// Epoch assembly and embedding configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpochConfig<T> {
    /// Segments per epoch.
    pub gamma: usize,
    /// Overlap fraction between adjacent epochs, in `[0, 1)`.
    pub delta: T,
    /// Number of Laplacian eigenvectors kept.
    pub d: usize,
    pub taper: Taper,
    pub band_lo_hz: T,
    pub band_hi_hz: T,
    /// Half-width, in bins, of a moving-average smoother applied to the
    /// averaged periodogram before normalization. 0 disables smoothing.
    #[serde(default)]
    pub smoothing_half_bins: usize,
}

impl<T: Scalar> EpochConfig<T> {
    pub fn with_dim(gamma: usize, delta: T, d: usize) -> Self {
        EpochConfig {
            gamma,
            delta,
            d,
            taper: Taper::Cosine,
            band_lo_hz: lit(0.5),
            band_hi_hz: lit(50.0),
            smoothing_half_bins: 0,
        }
    }

    /// Epoch stride in segments: `round(gamma * (1 - delta))`.
    pub fn step(&self) -> usize {
        (cnt::<T>(self.gamma) * (T::one() - self.delta))
            .round()
            .to_usize()
            .unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma < 1 {
            return Err(Error::invalid("gamma must be >= 1"));
        }
        if self.delta < T::zero() || self.delta >= T::one() {
            return Err(Error::invalid("delta must lie in [0, 1)"));
        }
        if self.step() < 1 {
            return Err(Error::invalid("epoch stride rounds to zero; reduce delta"));
        }
        if self.d < 1 {
            return Err(Error::invalid("d must be >= 1"));
        }
        if self.band_lo_hz >= self.band_hi_hz || self.band_lo_hz < T::zero() {
            return Err(Error::invalid("need 0 <= band_lo < band_hi"));
        }
        Ok(())
    }
}

/// Window of consecutive retained segments forming one epoch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpochWindow {
    /// Position in the retained-segment sequence (gaps already ignored).
    pub start: usize,
    pub len: usize,
}

/// Sliding epoch windows over the retained segments of a recording.
pub fn build_epochs<T: Scalar>(
    rec: &SegmentedRecording<T>,
    cfg: &EpochConfig<T>,
) -> Result<Vec<EpochWindow>> {
    cfg.validate()?;
    let n = rec.segments.len();
    if n < cfg.gamma {
        return Err(Error::NotEnoughSegments {
            subject: rec.subject,
            available: n,
            needed: cfg.gamma,
        });
    }
    let step = cfg.step();
    let mut windows = Vec::new();
    let mut start = 0;
    while start + cfg.gamma <= n {
        windows.push(EpochWindow { start, len: cfg.gamma });
        start += step;
    }
    Ok(windows)
}

/// Band-restricted frequency grid of an averaged periodogram.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid<T> {
    pub freqs_hz: Vec<T>,
    /// Bin spacing in Hz; densities integrate to 1 with this spacing.
    pub delta_hz: T,
}

/// Unit-integral spectral densities for all channels of one epoch.
#[derive(Clone, Debug)]
pub struct EpochSpectra<T> {
    pub subject: usize,
    pub epoch: usize,
    /// `n_channels x n_freq`.
    pub densities: Mat<T>,
    pub grid: FrequencyGrid<T>,
}

/// Averaged-periodogram estimator for fixed segment length and band.
pub struct SpectrumEstimator<T: Scalar> {
    fft: Arc<dyn Fft<T>>,
    taper: Vec<T>,
    segment_len: usize,
    smoothing_half_bins: usize,
    /// Bin indices of the analysis band within the one-sided spectrum.
    band_bins: Vec<usize>,
    grid: FrequencyGrid<T>,
}

impl<T: Scalar> SpectrumEstimator<T> {
    pub fn new(segment_len: usize, fs_hz: T, cfg: &EpochConfig<T>) -> Result<Self> {
        cfg.validate()?;
        if segment_len < 64 {
            return Err(Error::invalid("segments must hold at least 64 samples"));
        }
        let delta_hz = fs_hz / cnt(segment_len);
        let band_bins: Vec<usize> = (0..=segment_len / 2)
            .filter(|&k| {
                let f = cnt::<T>(k) * delta_hz;
                f >= cfg.band_lo_hz && f <= cfg.band_hi_hz
            })
            .collect();
        if band_bins.is_empty() {
            return Err(Error::invalid("analysis band contains no frequency bins"));
        }
        let freqs_hz = band_bins.iter().map(|&k| cnt::<T>(k) * delta_hz).collect();
        let taper = match cfg.taper {
            Taper::None => vec![T::one(); segment_len],
            Taper::Cosine => {
                let denom = cnt::<T>(segment_len - 1);
                (0..segment_len)
                    .map(|t| {
                        let phase = lit::<T>(2.0 * std::f64::consts::PI) * cnt::<T>(t) / denom;
                        lit::<T>(0.5) * (T::one() - phase.cos())
                    })
                    .collect()
            }
        };
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(segment_len);
        Ok(SpectrumEstimator {
            fft,
            taper,
            segment_len,
            smoothing_half_bins: cfg.smoothing_half_bins,
            band_bins,
            grid: FrequencyGrid { freqs_hz, delta_hz },
        })
    }

    pub fn grid(&self) -> &FrequencyGrid<T> {
        &self.grid
    }

    /// One-sided periodogram of a mean-removed, tapered segment.
    fn segment_periodogram(&self, samples: &[T]) -> Vec<T> {
        debug_assert_eq!(samples.len(), self.segment_len);
        let n = cnt::<T>(self.segment_len);
        let mean = samples.iter().copied().sum::<T>() / n;
        let mut buf: Vec<Complex<T>> = samples
            .iter()
            .zip(&self.taper)
            .map(|(&x, &w)| Complex::new((x - mean) * w, T::zero()))
            .collect();
        self.fft.process(&mut buf);
        buf[..=self.segment_len / 2]
            .iter()
            .map(|c| c.re * c.re + c.im * c.im)
            .collect()
    }

    /// Averaged, band-restricted, unit-integral density for every channel of
    /// the epoch. Channels with no band power get a uniform density.
    pub fn epoch_density(&self, rec: &SegmentedRecording<T>, window: &EpochWindow) -> Mat<T> {
        let p = rec.n_channels();
        let n_freq = self.band_bins.len();
        let mut densities = Mat::zeros(p, n_freq);
        for j in 0..p {
            let mut acc = vec![T::zero(); self.segment_len / 2 + 1];
            for s in window.start..window.start + window.len {
                let pg = self.segment_periodogram(rec.segments[s].row(j));
                for (a, v) in acc.iter_mut().zip(pg) {
                    *a += v;
                }
            }
            if self.smoothing_half_bins > 0 {
                acc = moving_average(&acc, self.smoothing_half_bins);
            }
            let total: T = self.band_bins.iter().map(|&k| acc[k]).sum::<T>() * self.grid.delta_hz;
            let row = densities.row_mut(j);
            if total > T::zero() && total.is_finite() {
                for (r, &k) in row.iter_mut().zip(&self.band_bins) {
                    *r = acc[k] / total;
                }
            } else {
                log::warn!(
                    "subject {} epoch window at {}: channel {j} has no band power; substituting a uniform density",
                    rec.subject,
                    window.start
                );
                let uniform = T::one() / (cnt::<T>(n_freq) * self.grid.delta_hz);
                for r in row.iter_mut() {
                    *r = uniform;
                }
            }
        }
        densities
    }
}

/// Moving average with shrinking windows at the edges.
fn moving_average<T: Scalar>(values: &[T], half: usize) -> Vec<T> {
    let n = values.len();
    (0..n)
        .map(|k| {
            let lo = k.saturating_sub(half);
            let hi = (k + half).min(n - 1);
            let span = cnt::<T>(hi - lo + 1);
            values[lo..=hi].iter().copied().sum::<T>() / span
        })
        .collect()
}

/// Total variation distance `1 - sum_k min(f_k, g_k) * delta` between two
/// unit-integral densities on the same grid, clamped into `[0, 1]`.
pub fn tvd<T: Scalar>(f: &[T], g: &[T], delta: T) -> Result<T> {
    if f.len() != g.len() {
        return Err(Error::GridMismatch {
            left: f.len(),
            right: g.len(),
            dl: delta.to_f64().unwrap_or(f64::NAN),
            dr: delta.to_f64().unwrap_or(f64::NAN),
        });
    }
    let overlap: T = f.iter().zip(g).map(|(&a, &b)| a.min(b)).sum::<T>() * delta;
    Ok((T::one() - overlap).max(T::zero()).min(T::one()))
}

/// Pairwise TVD matrix between the rows of a density matrix.
pub fn tvd_matrix<T: Scalar>(densities: &Mat<T>, delta: T) -> Mat<T> {
    let p = densities.nrows();
    let mut d = Mat::zeros(p, p);
    for i in 0..p {
        for j in (i + 1)..p {
            let v = tvd(densities.row(i), densities.row(j), delta)
                .expect("rows of one matrix share a grid");
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

/// Dissimilarity, affinity, Laplacian and embedding for one epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochFeatures<T> {
    /// Symmetric TVD dissimilarity with zero diagonal, entries in `[0, 1]`.
    pub dissimilarity: Mat<T>,
    /// `1 - D`, unit diagonal.
    pub affinity: Mat<T>,
    /// Normalized graph Laplacian `diag(A1)^{-1/2} A diag(A1)^{-1/2}`.
    pub laplacian: Mat<T>,
    /// Top-`d` eigenvectors (descending eigenvalue), rows scaled to unit norm.
    pub embedding: Mat<T>,
    /// All eigenvalues of the Laplacian, descending.
    pub eigenvalues: Vec<T>,
}

fn validate_dissimilarity<T: Scalar>(d: &Mat<T>) -> Result<()> {
    let p = d.nrows();
    if p != d.ncols() {
        return Err(Error::shape("dissimilarity matrix must be square"));
    }
    let tol: T = lit(1e-6);
    if !d.is_symmetric(tol) {
        return Err(Error::shape("dissimilarity matrix must be symmetric"));
    }
    for i in 0..p {
        if d[(i, i)].abs() > tol {
            return Err(Error::shape("dissimilarity diagonal must be zero"));
        }
        for j in 0..p {
            let v = d[(i, j)];
            if v < -tol || v > T::one() + tol {
                return Err(Error::shape("dissimilarity entries must lie in [0, 1]"));
            }
        }
    }
    Ok(())
}

/// Affinity, normalized Laplacian and its leading `d` eigenvectors.
///
/// The embedding rows are normalized to unit Euclidean length so that
/// clustering them with an isotropic mixture is well posed; all-zero rows
/// (possible only for fully isolated channels) are left as zeros.
pub fn laplacian_features<T: Scalar>(dissimilarity: &Mat<T>, d: usize) -> Result<EpochFeatures<T>> {
    validate_dissimilarity(dissimilarity)?;
    let p = dissimilarity.nrows();
    if d > p {
        return Err(Error::EmbeddingTooLarge { d, p });
    }
    let mut affinity = dissimilarity.map(|v| (T::one() - v).max(T::zero()));
    for i in 0..p {
        affinity[(i, i)] = T::one();
    }
    let degrees = affinity.row_sums();
    for (i, &deg) in degrees.iter().enumerate() {
        if deg <= T::zero() {
            return Err(Error::ZeroDegree { row: i });
        }
    }
    let inv_sqrt: Vec<T> = degrees.iter().map(|&x| T::one() / x.sqrt()).collect();
    let laplacian = Mat::from_fn(p, p, |i, j| affinity[(i, j)] * inv_sqrt[i] * inv_sqrt[j]);

    let (eigenvalues, vecs) = eigen::sorted_symmetric_eigen(&laplacian);
    let mut embedding = Mat::from_fn(p, d, |i, j| vecs[(i, j)]);
    normalize_rows(&mut embedding);

    Ok(EpochFeatures {
        dissimilarity: dissimilarity.clone(),
        affinity,
        laplacian,
        embedding,
        eigenvalues,
    })
}

fn normalize_rows<T: Scalar>(x: &mut Mat<T>) {
    for i in 0..x.nrows() {
        let norm: T = x.row(i).iter().map(|&v| v * v).sum::<T>().sqrt();
        if norm > T::min_positive_value().sqrt() {
            for v in x.row_mut(i) {
                *v /= norm;
            }
        }
    }
}

/// All epoch features of one subject.
#[derive(Clone, Debug)]
pub struct SubjectFeatures<T> {
    pub subject: usize,
    pub windows: Vec<EpochWindow>,
    pub grid: FrequencyGrid<T>,
    pub epochs: Vec<EpochFeatures<T>>,
}

/// Full preprocessing of one recording.
pub fn subject_features<T: Scalar>(
    rec: &SegmentedRecording<T>,
    cfg: &EpochConfig<T>,
) -> Result<SubjectFeatures<T>> {
    let windows = build_epochs(rec, cfg)?;
    let est = SpectrumEstimator::new(rec.segment_len, rec.fs_hz, cfg)?;
    let epochs: Result<Vec<EpochFeatures<T>>> = windows
        .par_iter()
        .map(|w| {
            let densities = est.epoch_density(rec, w);
            let dis = tvd_matrix(&densities, est.grid().delta_hz);
            laplacian_features(&dis, cfg.d)
        })
        .collect();
    Ok(SubjectFeatures {
        subject: rec.subject,
        windows,
        grid: est.grid().clone(),
        epochs: epochs?,
    })
}

/// Preprocess several subjects and bundle the sampler inputs.
pub fn preprocess<T: Scalar>(
    recs: &[SegmentedRecording<T>],
    cfg: &EpochConfig<T>,
) -> Result<Vec<SubjectFeatures<T>>> {
    recs.iter().map(|r| subject_features(r, cfg)).collect()
}

/// Extract the clustering inputs (embedding matrices) from features.
pub fn dataset_from_features<T: Scalar>(features: &[SubjectFeatures<T>]) -> Dataset<T> {
    Dataset {
        subjects: features
            .iter()
            .map(|f| SubjectData {
                subject: f.subject,
                epochs: f.epochs.iter().map(|e| e.embedding.clone()).collect(),
            })
            .collect(),
    }
}

/// Cached spectra and full eigendecompositions, sliceable at any embedding
/// dimension without repeating the spectral work. Used by the `(d, K)` search.
pub struct FeatureFactory<T> {
    subjects: Vec<FactorySubject<T>>,
    max_dim: usize,
}

struct FactorySubject<T> {
    subject: usize,
    /// Full eigenvector matrices (p x p) per epoch, canonical order.
    eigvecs: Vec<Mat<T>>,
}

impl<T: Scalar> FeatureFactory<T> {
    /// Run the spectral pipeline once; `cfg.d` is ignored here.
    pub fn from_recordings(recs: &[SegmentedRecording<T>], cfg: &EpochConfig<T>) -> Result<Self> {
        let mut subjects = Vec::with_capacity(recs.len());
        let mut max_dim = usize::MAX;
        for rec in recs {
            let windows = build_epochs(rec, cfg)?;
            let est = SpectrumEstimator::new(rec.segment_len, rec.fs_hz, cfg)?;
            let eigvecs: Result<Vec<Mat<T>>> = windows
                .par_iter()
                .map(|w| {
                    let densities = est.epoch_density(rec, w);
                    let dis = tvd_matrix(&densities, est.grid().delta_hz);
                    validate_dissimilarity(&dis)?;
                    let p = dis.nrows();
                    let mut aff = dis.map(|v| (T::one() - v).max(T::zero()));
                    for i in 0..p {
                        aff[(i, i)] = T::one();
                    }
                    let inv_sqrt: Vec<T> =
                        aff.row_sums().iter().map(|&x| T::one() / x.sqrt()).collect();
                    let lap = Mat::from_fn(p, p, |i, j| aff[(i, j)] * inv_sqrt[i] * inv_sqrt[j]);
                    Ok(eigen::sorted_symmetric_eigen(&lap).1)
                })
                .collect();
            let eigvecs = eigvecs?;
            max_dim = max_dim.min(rec.n_channels());
            subjects.push(FactorySubject { subject: rec.subject, eigvecs });
        }
        Ok(FeatureFactory {
            subjects,
            max_dim: if max_dim == usize::MAX { 0 } else { max_dim },
        })
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    /// Dataset of row-normalized top-`d` embeddings; identical to running
    /// [`laplacian_features`] at dimension `d` on every epoch.
    pub fn dataset_at(&self, d: usize) -> Result<Dataset<T>> {
        if d > self.max_dim || d == 0 {
            return Err(Error::EmbeddingTooLarge { d, p: self.max_dim });
        }
        Ok(Dataset {
            subjects: self
                .subjects
                .iter()
                .map(|s| SubjectData {
                    subject: s.subject,
                    epochs: s
                        .eigvecs
                        .iter()
                        .map(|v| {
                            let mut x = Mat::from_fn(v.nrows(), d, |i, j| v[(i, j)]);
                            normalize_rows(&mut x);
                            x
                        })
                        .collect(),
                })
                .collect(),
        })
    }
}
