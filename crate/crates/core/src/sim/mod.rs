//! Piecewise-stationary multichannel signal generator with planted
//! multilevel cluster structure.
//!
//! Channels alternate between a *main* and an *off* spectral state; dwell
//! times are exponential (main) and truncated normal (off). Within a state,
//! the signal is a weighted sum of independent AR(2) realizations, so its
//! theoretical spectrum is exactly the weighted sum of the component spectra.

pub mod ar2;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::rng::{self, MicRng, StreamKind};
use crate::scalar::{cnt, lit, Scalar};

pub use ar2::Ar2;

/// Fixed segment duration used throughout the pipeline.
pub const SEGMENT_MS: u64 = 1024;

/// One spectral peak: location, pole modulus and mixture weight.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PeakSpec<T> {
    pub peak_hz: T,
    pub modulus: T,
    pub weight: T,
}

/// Mixture specification for a single cluster.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterSpectrum<T> {
    pub components: Vec<PeakSpec<T>>,
}

/// Per-cluster AR(2)-mixture configurations plus the sampling rate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralState<T> {
    pub fs_hz: T,
    pub clusters: Vec<ClusterSpectrum<T>>,
}

impl<T: Scalar> SpectralState<T> {
    pub fn validate(&self) -> Result<()> {
        if self.fs_hz <= T::zero() {
            return Err(Error::invalid("sampling rate must be positive"));
        }
        for (c, spec) in self.clusters.iter().enumerate() {
            if spec.components.is_empty() || spec.components.len() > 2 {
                return Err(Error::invalid(format!(
                    "cluster {c}: expected 1 or 2 spectral peaks, got {}",
                    spec.components.len()
                )));
            }
            let sum: T = spec.components.iter().map(|p| p.weight).sum();
            if (sum - T::one()).abs() > lit(1e-9) || spec.components.iter().any(|p| p.weight < T::zero()) {
                return Err(Error::BadMixtureWeights {
                    sum: sum.to_f64().unwrap_or(f64::NAN),
                });
            }
            for p in &spec.components {
                if p.peak_hz < T::zero() || p.peak_hz >= self.fs_hz / lit(2.0) {
                    return Err(Error::invalid(format!(
                        "cluster {c}: peak {} Hz outside [0, fs/2)",
                        p.peak_hz
                    )));
                }
                Ar2::from_peak(p.peak_hz, p.modulus, self.fs_hz).check_stationary()?;
            }
        }
        Ok(())
    }

    /// Closed-form mixture spectrum for `cluster` on a frequency grid.
    pub fn theoretical_spectrum(&self, cluster: usize, freqs_hz: &[T]) -> Vec<T> {
        let spec = &self.clusters[cluster];
        freqs_hz
            .iter()
            .map(|&f| {
                spec.components
                    .iter()
                    .map(|p| p.weight * Ar2::from_peak(p.peak_hz, p.modulus, self.fs_hz).spectrum(f, self.fs_hz))
                    .sum()
            })
            .collect()
    }

    /// Default main-state configuration: distinct band peaks per cluster
    /// (delta 2, theta 6, alpha 10, beta 20, gamma 40 Hz; modulus 0.95).
    pub fn canonical_main(k: usize, fs_hz: T) -> Result<Self> {
        let table: [&[(f64, f64)]; 5] = [
            &[(10.0, 1.0)],
            &[(6.0, 0.6), (20.0, 0.4)],
            &[(2.0, 1.0)],
            &[(10.0, 0.5), (40.0, 0.5)],
            &[(20.0, 1.0)],
        ];
        Self::from_table(k, fs_hz, &table)
    }

    /// Default off-state configuration: each cluster moves its energy into
    /// different bands than its main state.
    pub fn canonical_off(k: usize, fs_hz: T) -> Result<Self> {
        let table: [&[(f64, f64)]; 5] = [
            &[(6.0, 1.0)],
            &[(40.0, 1.0)],
            &[(10.0, 0.5), (20.0, 0.5)],
            &[(2.0, 1.0)],
            &[(2.0, 0.5), (40.0, 0.5)],
        ];
        Self::from_table(k, fs_hz, &table)
    }

    fn from_table(k: usize, fs_hz: T, table: &[&[(f64, f64)]; 5]) -> Result<Self> {
        if k == 0 || k > 5 {
            return Err(Error::invalid(format!(
                "canonical spectral states cover 1..=5 clusters, requested {k}"
            )));
        }
        let clusters = (0..k)
            .map(|c| ClusterSpectrum {
                components: table[c]
                    .iter()
                    .map(|&(f, w)| PeakSpec {
                        peak_hz: lit(f),
                        modulus: lit(0.95),
                        weight: lit(w),
                    })
                    .collect(),
            })
            .collect();
        let state = SpectralState { fs_hz, clusters };
        state.validate()?;
        Ok(state)
    }
}

/// How the main/off switching is shared between channels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchMode {
    /// Every channel switches on its own timeline (default).
    IndependentChannels,
    /// Channels assigned to the same cluster within a subject share a timeline.
    SharedWithinCluster,
}

/// Full simulation design.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimPlan<T> {
    pub n_subjects: usize,
    pub n_channels: usize,
    pub k_true: usize,
    /// Population labels, 0-based, length `n_channels`.
    pub s_true: Vec<usize>,
    pub alpha_true: T,
    pub duration_s: T,
    /// Rate of the exponential main-state dwell, per second.
    pub main_dwell_rate: T,
    pub off_dwell_mean_s: T,
    pub off_dwell_sd_s: T,
    pub switch_mode: SwitchMode,
    pub seed: u64,
}

impl<T: Scalar> SimPlan<T> {
    /// Balanced population labels: channel `j` gets label `j * k / p`.
    pub fn balanced_labels(p: usize, k: usize) -> Vec<usize> {
        (0..p).map(|j| j * k / p).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_subjects == 0 || self.n_channels == 0 || self.k_true < 2 {
            return Err(Error::invalid("need >=1 subject, >=1 channel, K >= 2"));
        }
        if self.s_true.len() != self.n_channels {
            return Err(Error::shape(format!(
                "s_true has {} entries for {} channels",
                self.s_true.len(),
                self.n_channels
            )));
        }
        if self.s_true.iter().any(|&s| s >= self.k_true) {
            return Err(Error::invalid("population label outside 0..K"));
        }
        check_adherence(self.alpha_true, self.k_true)?;
        if self.duration_s <= T::zero()
            || self.main_dwell_rate <= T::zero()
            || self.off_dwell_mean_s <= T::zero()
            || self.off_dwell_sd_s <= T::zero()
        {
            return Err(Error::invalid("durations and dwell parameters must be positive"));
        }
        Ok(())
    }
}

pub(crate) fn check_adherence<T: Scalar>(value: T, k: usize) -> Result<()> {
    let lo = T::one() / cnt(k);
    if value < lo || value > T::one() {
        return Err(Error::AdherenceOutOfRange {
            value: value.to_f64().unwrap_or(f64::NAN),
            lo: lo.to_f64().unwrap_or(f64::NAN),
            k,
        });
    }
    Ok(())
}

/// Planted labels and switching timelines for scoring a fitted model.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroundTruth<T> {
    pub s_true: Vec<usize>,
    /// `c_true[i][j]`: subject-level label of channel `j` in subject `i`.
    pub c_true: Vec<Vec<usize>>,
    pub alpha_true: T,
    /// `switch_times_s[i][j]`: state-toggle instants in seconds; channels
    /// start in the main state at time 0 and the last dwell is truncated at
    /// the recording end.
    pub switch_times_s: Vec<Vec<Vec<T>>>,
}

/// Fixed-length multichannel segments for one subject.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentedRecording<T> {
    pub subject: usize,
    pub fs_hz: T,
    /// Samples per segment.
    pub segment_len: usize,
    /// Each segment is `n_channels x segment_len`.
    pub segments: Vec<Mat<T>>,
    /// Original segment indices; contiguous for simulated data, but latent
    /// gaps from quality control are allowed when ingesting real recordings.
    pub indices: Vec<usize>,
}

impl<T: Scalar> SegmentedRecording<T> {
    pub fn n_channels(&self) -> usize {
        self.segments.first().map_or(0, |s| s.nrows())
    }
}

/// Keep `s[j]` with probability `alpha`, otherwise move uniformly to one of
/// the `k - 1` other labels.
pub fn plant_labels<T: Scalar, R: Rng + ?Sized>(
    s_true: &[usize],
    alpha: T,
    k: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    check_adherence(alpha, k)?;
    Ok(s_true
        .iter()
        .map(|&s| {
            if T::draw_unit(rng) < alpha {
                s
            } else {
                let other = rng.random_range(0..k - 1);
                if other >= s {
                    other + 1
                } else {
                    other
                }
            }
        })
        .collect())
}

/// Zero-mean realization of the cluster's AR(2) mixture.
///
/// Each component draws its innovations from a child stream forked off `rng`,
/// so a component with weight zero leaves the others' realizations untouched.
/// Component `m` enters scaled by `sqrt(w_m)`, which makes the theoretical
/// spectrum of the sum exactly `sum_m w_m S_m`.
pub fn simulate_ar2_mixture<T: Scalar>(
    state: &SpectralState<T>,
    cluster: usize,
    n_samples: usize,
    rng: &mut MicRng,
) -> Result<Vec<T>> {
    state.validate()?;
    if cluster >= state.clusters.len() {
        return Err(Error::invalid(format!("cluster {cluster} not defined")));
    }
    if n_samples < 2 {
        return Err(Error::invalid("need at least 2 samples"));
    }
    let mut out = vec![T::zero(); n_samples];
    for peak in &state.clusters[cluster].components {
        let mut child = MicRng::seed_from_u64(rng.random());
        let coeffs = Ar2::from_peak(peak.peak_hz, peak.modulus, state.fs_hz);
        let xs = coeffs.simulate(n_samples, &mut child);
        let scale = peak.weight.sqrt();
        for (o, x) in out.iter_mut().zip(xs) {
            *o += scale * x;
        }
    }
    Ok(out)
}

/// State-toggle instants in seconds for one channel: exponential main dwell,
/// zero-truncated normal off dwell, tiling `[0, duration_s)`.
fn switch_timeline<T: Scalar>(
    duration_s: T,
    main_rate: T,
    off_mean: T,
    off_sd: T,
    rng: &mut MicRng,
) -> Vec<T> {
    let mut times = Vec::new();
    let mut t = T::zero();
    let mut in_main = true;
    loop {
        let dwell = if in_main {
            T::draw_exp(rng, main_rate)
        } else {
            // truncate N(mean, sd) at zero by redrawing
            loop {
                let x = off_mean + off_sd * T::draw_std_normal(rng);
                if x > T::zero() {
                    break x;
                }
            }
        };
        t = t + dwell;
        if t >= duration_s {
            return times;
        }
        times.push(t);
        in_main = !in_main;
    }
}

/// Simulate every subject of the plan and chop signals into 1024 ms segments.
pub fn simulate_piecewise<T: Scalar>(
    plan: &SimPlan<T>,
    main: &SpectralState<T>,
    off: &SpectralState<T>,
) -> Result<(Vec<SegmentedRecording<T>>, GroundTruth<T>)> {
    plan.validate()?;
    main.validate()?;
    off.validate()?;
    if main.clusters.len() < plan.k_true || off.clusters.len() < plan.k_true {
        return Err(Error::invalid(
            "main/off states must define a spectrum for every cluster",
        ));
    }
    if (main.fs_hz - off.fs_hz).abs() > T::zero() {
        return Err(Error::invalid("main/off sampling rates differ"));
    }
    let fs = main.fs_hz;
    let segment_len = (lit::<T>(SEGMENT_MS as f64 / 1000.0) * fs)
        .round()
        .to_usize()
        .ok_or_else(|| Error::invalid("segment length overflow"))?;
    let total_samples = (plan.duration_s * fs).floor().to_usize().unwrap_or(0);
    if total_samples < segment_len {
        return Err(Error::DurationTooShort {
            duration_s: plan.duration_s.to_f64().unwrap_or(f64::NAN),
            segment_ms: SEGMENT_MS,
        });
    }
    let n_segments = total_samples / segment_len;
    let p = plan.n_channels;

    let mut recordings = Vec::with_capacity(plan.n_subjects);
    let mut c_true = Vec::with_capacity(plan.n_subjects);
    let mut switch_times = Vec::with_capacity(plan.n_subjects);

    for i in 0..plan.n_subjects {
        let mut label_rng = rng::substream(plan.seed, StreamKind::LabelPlanting, i, 0);
        let c_i = plant_labels(&plan.s_true, plan.alpha_true, plan.k_true, &mut label_rng)?;

        // shared timelines are keyed by cluster, independent ones by channel
        let cluster_timelines: Vec<Vec<T>> = match plan.switch_mode {
            SwitchMode::SharedWithinCluster => (0..plan.k_true)
                .map(|c| {
                    let mut r = rng::substream(plan.seed, StreamKind::StateSwitching, i, c);
                    switch_timeline(
                        plan.duration_s,
                        plan.main_dwell_rate,
                        plan.off_dwell_mean_s,
                        plan.off_dwell_sd_s,
                        &mut r,
                    )
                })
                .collect(),
            SwitchMode::IndependentChannels => Vec::new(),
        };

        let mut channel_signals: Vec<Vec<T>> = Vec::with_capacity(p);
        let mut channel_switches: Vec<Vec<T>> = Vec::with_capacity(p);
        for j in 0..p {
            let timeline = match plan.switch_mode {
                SwitchMode::IndependentChannels => {
                    let mut r = rng::substream(plan.seed, StreamKind::StateSwitching, i, j);
                    switch_timeline(
                        plan.duration_s,
                        plan.main_dwell_rate,
                        plan.off_dwell_mean_s,
                        plan.off_dwell_sd_s,
                        &mut r,
                    )
                }
                SwitchMode::SharedWithinCluster => cluster_timelines[c_i[j]].clone(),
            };
            let mut signal_rng = rng::substream(plan.seed, StreamKind::SignalInnovations, i, j);
            let mut signal = Vec::with_capacity(total_samples);
            let mut in_main = true;
            let mut start = 0usize;
            for bound in timeline.iter().map(|&t| (t * fs).floor().to_usize().unwrap_or(total_samples)).chain(std::iter::once(total_samples)) {
                let bound = bound.min(total_samples);
                if bound > start {
                    let state = if in_main { main } else { off };
                    let piece = simulate_ar2_mixture(state, c_i[j], bound - start, &mut signal_rng)?;
                    signal.extend(piece);
                }
                in_main = !in_main;
                start = bound;
            }
            channel_signals.push(signal);
            channel_switches.push(timeline);
        }

        let segments = (0..n_segments)
            .map(|s| {
                Mat::from_fn(p, segment_len, |j, t| channel_signals[j][s * segment_len + t])
            })
            .collect();
        recordings.push(SegmentedRecording {
            subject: i,
            fs_hz: fs,
            segment_len,
            segments,
            indices: (0..n_segments).collect(),
        });
        c_true.push(c_i);
        switch_times.push(channel_switches);
    }

    Ok((
        recordings,
        GroundTruth {
            s_true: plan.s_true.clone(),
            c_true,
            alpha_true: plan.alpha_true,
            switch_times_s: switch_times,
        },
    ))
}
