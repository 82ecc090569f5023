//! The three-level mixture model: isotropic Gaussian likelihood over
//! embedding rows, anchor probabilities linking epoch labels to subject
//! labels and subject labels to population labels, population proportions,
//! and the conjugate priors. Everything here is a pure evaluable function
//! shared by the sampler and by model selection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::scalar::{cnt, lit, Scalar};
use crate::sim::check_adherence;
use crate::special::{betainc, ln_beta, ln_gamma};

/// Clustering inputs: per subject, one embedding matrix per epoch
/// (`n_channels x d`, rows are channels).
#[derive(Clone, Debug)]
pub struct Dataset<T> {
    pub subjects: Vec<SubjectData<T>>,
}

#[derive(Clone, Debug)]
pub struct SubjectData<T> {
    pub subject: usize,
    pub epochs: Vec<Mat<T>>,
}

impl<T: Scalar> Dataset<T> {
    pub fn n_subjects(&self) -> usize {
        self.subjects.len()
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.n_channels()?;
        let d = self.dim()?;
        if p == 0 || d == 0 {
            return Err(Error::shape("dataset has empty embeddings"));
        }
        for s in &self.subjects {
            if s.epochs.is_empty() {
                return Err(Error::shape(format!("subject {} has no epochs", s.subject)));
            }
        }
        Ok(())
    }

    pub fn n_channels(&self) -> Result<usize> {
        let p = self
            .subjects
            .first()
            .and_then(|s| s.epochs.first())
            .map(|e| e.nrows())
            .ok_or_else(|| Error::shape("empty dataset"))?;
        for s in &self.subjects {
            if s.epochs.iter().any(|e| e.nrows() != p) {
                return Err(Error::shape("inconsistent channel counts across epochs"));
            }
        }
        Ok(p)
    }

    pub fn dim(&self) -> Result<usize> {
        let d = self
            .subjects
            .first()
            .and_then(|s| s.epochs.first())
            .map(|e| e.ncols())
            .ok_or_else(|| Error::shape("empty dataset"))?;
        for s in &self.subjects {
            if s.epochs.iter().any(|e| e.ncols() != d) {
                return Err(Error::shape("inconsistent embedding dimensions"));
            }
        }
        Ok(d)
    }

    pub fn epoch_counts(&self) -> Vec<usize> {
        self.subjects.iter().map(|s| s.epochs.len()).collect()
    }

    pub fn dims(&self, k: usize) -> Result<ModelDims> {
        self.validate()?;
        let dims = ModelDims {
            n_subjects: self.n_subjects(),
            n_channels: self.n_channels()?,
            epochs_per_subject: self.epoch_counts(),
            k,
            d: self.dim()?,
        };
        dims.validate()?;
        Ok(dims)
    }

    /// All embedding rows stacked (over subjects, epochs, channels).
    pub fn pooled_rows(&self) -> Mat<T> {
        let d = self.subjects[0].epochs[0].ncols();
        let total: usize = self
            .subjects
            .iter()
            .map(|s| s.epochs.iter().map(|e| e.nrows()).sum::<usize>())
            .sum();
        let mut out = Mat::zeros(total, d);
        let mut r = 0;
        for s in &self.subjects {
            for e in &s.epochs {
                for i in 0..e.nrows() {
                    out.row_mut(r).copy_from_slice(e.row(i));
                    r += 1;
                }
            }
        }
        out
    }
}

/// Model dimensions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    pub n_subjects: usize,
    pub n_channels: usize,
    pub epochs_per_subject: Vec<usize>,
    pub k: usize,
    pub d: usize,
}

impl ModelDims {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::invalid("need K >= 2 mixture components"));
        }
        if self.d < 1 || self.n_subjects == 0 || self.n_channels == 0 {
            return Err(Error::invalid("all model dimensions must be positive"));
        }
        if self.epochs_per_subject.len() != self.n_subjects
            || self.epochs_per_subject.iter().any(|&t| t == 0)
        {
            return Err(Error::invalid("every subject needs at least one epoch"));
        }
        Ok(())
    }

    pub fn total_epochs(&self) -> usize {
        self.epochs_per_subject.iter().sum()
    }
}

/// Mean and isotropic variance of one mixture component at one epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct Component<T> {
    pub mean: Vec<T>,
    pub var: T,
}

/// Component parameters indexed by `(subject, epoch, component)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentParams<T> {
    pub params: Vec<Vec<Vec<Component<T>>>>,
}

impl<T: Scalar> ComponentParams<T> {
    pub fn get(&self, i: usize, t: usize, k: usize) -> &Component<T> {
        &self.params[i][t][k]
    }
}

/// Cluster labels at all three levels (0-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelState {
    /// `epoch[i][t][j]`: label of channel `j` at epoch `t` of subject `i`.
    pub epoch: Vec<Vec<Vec<usize>>>,
    /// `subject[i][j]`.
    pub subject: Vec<Vec<usize>>,
    /// `population[j]`.
    pub population: Vec<usize>,
}

/// Adherences and population proportions.
#[derive(Clone, Debug, PartialEq)]
pub struct AdherenceState<T> {
    /// Subject-to-population adherence, one per subject, in `[1/K, 1]`.
    pub alpha: Vec<T>,
    /// Epoch-to-subject adherence, `beta[i][t]`, in `[1/K, 1]`.
    pub beta: Vec<Vec<T>>,
    /// Population proportions on the simplex.
    pub proportions: Vec<T>,
}

/// One Gibbs-chain state.
#[derive(Clone, Debug, PartialEq)]
pub struct MicState<T> {
    pub labels: LabelState,
    pub components: ComponentParams<T>,
    pub adherence: AdherenceState<T>,
}

/// All hyperparameters plus the `1/K` truncation bound implied by the dims.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorConfig<T> {
    /// Symmetric Dirichlet concentration for the population proportions.
    pub eta: T,
    /// Prior mean of component means (length `d`).
    pub mu0: Vec<T>,
    /// Prior precision scale for component means.
    pub lambda0: T,
    /// Inverse-gamma shape for component variances.
    pub var_shape: T,
    /// Inverse-gamma rate for component variances.
    pub var_rate: T,
    /// Truncated-Beta shape pair for the subject adherences.
    pub alpha_shape: (T, T),
    /// Truncated-Beta shape pair for the epoch adherences.
    pub beta_shape: (T, T),
}

impl<T: Scalar> PriorConfig<T> {
    /// Weakly informative, data-scaled defaults: `mu0` is the pooled row
    /// mean, the variance rate is a tenth of the pooled coordinate variance.
    pub fn data_driven(dataset: &Dataset<T>) -> Result<Self> {
        dataset.validate()?;
        let rows = dataset.pooled_rows();
        let n = rows.nrows();
        let d = rows.ncols();
        let nf = cnt::<T>(n);
        let mut mu0 = vec![T::zero(); d];
        for i in 0..n {
            for (m, &x) in mu0.iter_mut().zip(rows.row(i)) {
                *m += x;
            }
        }
        for m in mu0.iter_mut() {
            *m /= nf;
        }
        let mut var = T::zero();
        for i in 0..n {
            for (m, &x) in mu0.iter().zip(rows.row(i)) {
                var += (x - *m) * (x - *m);
            }
        }
        var = var / (nf * cnt(d));
        Ok(PriorConfig {
            eta: T::one(),
            mu0,
            lambda0: lit(0.01),
            var_shape: lit(2.0),
            var_rate: (lit::<T>(0.1) * var).max(lit(1e-6)),
            alpha_shape: (T::one(), T::one()),
            beta_shape: (T::one(), T::one()),
        })
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.eta <= T::zero()
            || self.lambda0 <= T::zero()
            || self.var_shape <= T::zero()
            || self.var_rate <= T::zero()
            || self.alpha_shape.0 <= T::zero()
            || self.alpha_shape.1 <= T::zero()
            || self.beta_shape.0 <= T::zero()
            || self.beta_shape.1 <= T::zero()
        {
            return Err(Error::invalid("all hyperparameters must be positive"));
        }
        if self.mu0.len() != d {
            return Err(Error::shape(format!(
                "mu0 has length {}, embedding dimension is {d}",
                self.mu0.len()
            )));
        }
        Ok(())
    }
}

/// Anchor probability for the epoch level: `beta` if `k == c`, else
/// `(1 - beta) / (K - 1)`.
pub fn nu_c<T: Scalar>(k: usize, c: usize, beta: T, k_total: usize) -> Result<T> {
    check_adherence(beta, k_total)?;
    Ok(if k == c {
        beta
    } else {
        (T::one() - beta) / cnt(k_total - 1)
    })
}

/// Anchor probability for the subject level; same form as [`nu_c`] with the
/// subject-to-population adherence in place of the epoch one.
pub fn nu_s<T: Scalar>(k: usize, s: usize, alpha: T, k_total: usize) -> Result<T> {
    nu_c(k, s, alpha, k_total)
}

/// Unchecked log of the anchor probability; used in sampler hot loops where
/// the adherence is already known to be in range.
#[inline]
pub(crate) fn ln_nu<T: Scalar>(k: usize, anchor: usize, adherence: T, k_total: usize) -> T {
    if k == anchor {
        adherence.ln()
    } else {
        ((T::one() - adherence) / cnt(k_total - 1)).ln()
    }
}

/// Log density of an isotropic Gaussian `N(mean, var I_d)` at `x`.
pub fn log_likelihood_epoch<T: Scalar>(x: &[T], component: &Component<T>) -> T {
    debug_assert_eq!(x.len(), component.mean.len());
    debug_assert!(component.var > T::zero());
    let d = cnt::<T>(x.len());
    let two_pi: T = lit(2.0 * std::f64::consts::PI);
    let half: T = lit(0.5);
    let ss: T = x
        .iter()
        .zip(&component.mean)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    -half * d * (two_pi * component.var).ln() - ss / (lit::<T>(2.0) * component.var)
}

/// Marginal allocation probabilities implied by `(pi, alpha, beta)`:
/// the subject-level vector `p_k = pi_k alpha + (1 - pi_k)(1 - alpha)/(K-1)`
/// and the epoch-level vector `q_k = beta p_k + (1 - p_k)(1 - beta)/(K-1)`.
pub fn marginal_allocation<T: Scalar>(
    pi: &[T],
    alpha: T,
    beta: T,
    k_total: usize,
) -> Result<(Vec<T>, Vec<T>)> {
    check_adherence(alpha, k_total)?;
    check_adherence(beta, k_total)?;
    if pi.len() != k_total {
        return Err(Error::shape("proportions length must equal K"));
    }
    let km1 = cnt::<T>(k_total - 1);
    let subject: Vec<T> = pi
        .iter()
        .map(|&pk| pk * alpha + (T::one() - pk) * (T::one() - alpha) / km1)
        .collect();
    let epoch: Vec<T> = subject
        .iter()
        .map(|&pk| beta * pk + (T::one() - pk) * (T::one() - beta) / km1)
        .collect();
    Ok((subject, epoch))
}

/// Log density of `TBeta(a, b, lo)` at `x` (Beta left-truncated at `lo`).
pub fn ln_truncated_beta_pdf<T: Scalar>(x: T, a: T, b: T, lo: T) -> T {
    if x < lo || x > T::one() {
        return T::neg_infinity();
    }
    let mut ln_pdf = -ln_beta(a, b) - (T::one() - betainc(a, b, lo)).ln();
    if a != T::one() {
        ln_pdf += (a - T::one()) * x.ln();
    }
    if b != T::one() {
        ln_pdf += (b - T::one()) * (T::one() - x).ln();
    }
    ln_pdf
}

/// Log density of the symmetric `Dirichlet(eta)` at `pi`.
pub fn ln_dirichlet_pdf<T: Scalar>(pi: &[T], eta: T) -> T {
    let k = cnt::<T>(pi.len());
    let mut ln_pdf = ln_gamma(k * eta) - k * ln_gamma(eta);
    if eta != T::one() {
        ln_pdf += pi.iter().map(|&p| (eta - T::one()) * p.ln()).sum::<T>();
    }
    ln_pdf
}

/// Log density of the conjugate normal-inverse-gamma prior at one component.
pub fn ln_nig_pdf<T: Scalar>(component: &Component<T>, priors: &PriorConfig<T>) -> T {
    let d = cnt::<T>(component.mean.len());
    let two: T = lit(2.0);
    let half: T = lit(0.5);
    let two_pi: T = lit(2.0 * std::f64::consts::PI);
    let v = component.var;
    let ig = priors.var_shape * priors.var_rate.ln()
        - ln_gamma(priors.var_shape)
        - (priors.var_shape + T::one()) * v.ln()
        - priors.var_rate / v;
    let ss: T = component
        .mean
        .iter()
        .zip(&priors.mu0)
        .map(|(&m, &m0)| (m - m0) * (m - m0))
        .sum();
    let norm = half * d * (priors.lambda0 / (two_pi * v)).ln() - priors.lambda0 * ss / (two * v);
    ig + norm
}

/// Joint log density of data and state under the full hierarchy: likelihood,
/// both anchor levels, population proportions, and all priors. The sampler
/// records this per iteration; it is invariant under a global relabeling
/// applied consistently to every level, the components and the proportions.
pub fn joint_log_density<T: Scalar>(
    dataset: &Dataset<T>,
    state: &MicState<T>,
    priors: &PriorConfig<T>,
    dims: &ModelDims,
) -> T {
    let k = dims.k;
    let lo = T::one() / cnt(k);
    let mut total = T::zero();

    for (i, subj) in dataset.subjects.iter().enumerate() {
        let alpha_i = state.adherence.alpha[i];
        for (t, x) in subj.epochs.iter().enumerate() {
            let beta_it = state.adherence.beta[i][t];
            for j in 0..dims.n_channels {
                let l = state.labels.epoch[i][t][j];
                total += log_likelihood_epoch(x.row(j), state.components.get(i, t, l));
                total += ln_nu(l, state.labels.subject[i][j], beta_it, k);
            }
            for comp in &state.components.params[i][t] {
                total += ln_nig_pdf(comp, priors);
            }
            total += ln_truncated_beta_pdf(beta_it, priors.beta_shape.0, priors.beta_shape.1, lo);
        }
        for j in 0..dims.n_channels {
            total += ln_nu(state.labels.subject[i][j], state.labels.population[j], alpha_i, k);
        }
        total +=
            ln_truncated_beta_pdf(alpha_i, priors.alpha_shape.0, priors.alpha_shape.1, lo);
    }
    for j in 0..dims.n_channels {
        total += state.adherence.proportions[state.labels.population[j]].ln();
    }
    total += ln_dirichlet_pdf(&state.adherence.proportions, priors.eta);
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    #[test]
    fn nu_c_matches_the_anchor_form() {
        assert!((nu_c(2usize, 2, 0.9f64, 4).unwrap() - 0.9).abs() < 1e-15);
        assert!((nu_c(1usize, 2, 0.9f64, 4).unwrap() - 0.1 / 3.0).abs() < 1e-15);
        // non-informative boundary: every label gets 1/K
        for k in 0..4 {
            assert!((nu_c(k, 2, 0.25f64, 4).unwrap() - 0.25).abs() < 1e-15);
        }
        assert!(nu_c(0usize, 0, 0.1f64, 4).is_err());
    }

    #[test]
    fn nu_s_matches_the_anchor_form() {
        assert_eq!(nu_s(3usize, 3, 1.0f64, 4).unwrap(), 1.0);
        assert_eq!(nu_s(1usize, 3, 1.0f64, 4).unwrap(), 0.0);
        assert!((nu_s(0usize, 1, 0.75f64, 2).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn nu_rows_sum_to_one() {
        let mut r = rng::seeded(2);
        for _ in 0..200 {
            let k = r.random_range(2..=8usize);
            let lo = 1.0 / k as f64;
            let beta = lo + (1.0 - lo) * r.random::<f64>();
            let c = r.random_range(0..k);
            let sum: f64 = (0..k).map(|kk| nu_c(kk, c, beta, k).unwrap()).sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_log_density_matches_direct_evaluation() {
        let comp = Component { mean: vec![0.0f64, 0.0], var: 1.0 };
        let at_mean = log_likelihood_epoch(&[0.0, 0.0], &comp);
        assert!((at_mean + (2.0 * std::f64::consts::PI).ln()).abs() < 1e-14);
        let off = log_likelihood_epoch(&[1.0, 0.0], &comp);
        assert!((off + (2.0 * std::f64::consts::PI).ln() + 0.5).abs() < 1e-14);

        let mut r = rng::seeded(8);
        for _ in 0..50 {
            let d = r.random_range(1..=5usize);
            let mean: Vec<f64> = (0..d).map(|_| r.random_range(-2.0..2.0)).collect();
            let x: Vec<f64> = (0..d).map(|_| r.random_range(-2.0..2.0)).collect();
            let var: f64 = r.random_range(0.1..3.0);
            let comp = Component { mean: mean.clone(), var };
            // direct exp/normalization oracle
            let ss: f64 = x.iter().zip(&mean).map(|(a, b)| (a - b).powi(2)).sum();
            let dens = (-ss / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).powf(d as f64 / 2.0);
            assert!((log_likelihood_epoch(&x, &comp) - dens.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn marginal_allocation_boundary_cases() {
        let pi = vec![0.5f64, 0.3, 0.2];
        // perfect chain of adherence reproduces the proportions
        let (_, epoch) = marginal_allocation(&pi, 1.0, 1.0, 3).unwrap();
        for (q, p) in epoch.iter().zip(&pi) {
            assert!((q - p).abs() < 1e-14);
        }
        // alpha = 1/K flattens the subject level regardless of pi
        let (subject, _) = marginal_allocation(&pi, 1.0 / 3.0, 0.7, 3).unwrap();
        for q in subject {
            assert!((q - 1.0 / 3.0).abs() < 1e-14);
        }
        // both levels stay on the simplex
        let (s, e) = marginal_allocation(&pi, 0.6, 0.8, 3).unwrap();
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((e.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn marginal_allocation_equals_enumeration() {
        // q_k must equal sum_c nu_c(k, c, beta) p_c exactly, K <= 6
        let mut r = rng::seeded(12);
        for k in 2..=6usize {
            let raw: Vec<f64> = (0..k).map(|_| r.random_range(0.1..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let pi: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let lo = 1.0 / k as f64;
            let alpha = lo + (1.0 - lo) * r.random::<f64>();
            let beta = lo + (1.0 - lo) * r.random::<f64>();
            let (subject, epoch) = marginal_allocation(&pi, alpha, beta, k).unwrap();
            for kk in 0..k {
                let direct: f64 = (0..k)
                    .map(|c| nu_c(kk, c, beta, k).unwrap() * subject[c])
                    .sum();
                assert!((direct - epoch[kk]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn marginal_allocation_matches_forward_sampling() {
        // sample S ~ pi, C | S, L | C repeatedly; empirical L frequencies
        // match the closed form within 3 binomial SEs
        let pi = vec![0.5f64, 0.2, 0.3];
        let (alpha, beta, k) = (0.8f64, 0.7f64, 3usize);
        let (_, epoch) = marginal_allocation(&pi, alpha, beta, k).unwrap();
        let n = 100_000usize;
        let mut counts = vec![0usize; k];
        let mut r = rng::seeded(99);
        for _ in 0..n {
            let s = sample_cat(&pi, &mut r);
            let c_probs: Vec<f64> = (0..k).map(|c| nu_s(c, s, alpha, k).unwrap()).collect();
            let c = sample_cat(&c_probs, &mut r);
            let l_probs: Vec<f64> = (0..k).map(|l| nu_c(l, c, beta, k).unwrap()).collect();
            counts[sample_cat(&l_probs, &mut r)] += 1;
        }
        for kk in 0..k {
            let phat = counts[kk] as f64 / n as f64;
            let se = (epoch[kk] * (1.0 - epoch[kk]) / n as f64).sqrt();
            assert!(
                (phat - epoch[kk]).abs() < 3.0 * se,
                "component {kk}: {phat} vs {}",
                epoch[kk]
            );
        }
    }

    fn sample_cat(probs: &[f64], rng: &mut rng::MicRng) -> usize {
        let mut u: f64 = rng.random();
        for (i, &p) in probs.iter().enumerate() {
            if u < p {
                return i;
            }
            u -= p;
        }
        probs.len() - 1
    }

    fn tiny_state(k: usize) -> (Dataset<f64>, MicState<f64>, PriorConfig<f64>, ModelDims) {
        let mut r = rng::seeded(4);
        let p = 4usize;
        let d = 2usize;
        let dataset = Dataset {
            subjects: (0..2)
                .map(|s| SubjectData {
                    subject: s,
                    epochs: (0..2)
                        .map(|_| Mat::from_fn(p, d, |_, _| r.random_range(-1.0..1.0)))
                        .collect(),
                })
                .collect(),
        };
        let dims = dataset.dims(k).unwrap();
        let priors = PriorConfig::data_driven(&dataset).unwrap();
        let comp = |r: &mut rng::MicRng| Component {
            mean: vec![r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)],
            var: r.random_range(0.2..2.0),
        };
        let state = MicState {
            labels: LabelState {
                epoch: (0..2)
                    .map(|_| (0..2).map(|_| (0..p).map(|_| r.random_range(0..k)).collect()).collect())
                    .collect(),
                subject: (0..2).map(|_| (0..p).map(|_| r.random_range(0..k)).collect()).collect(),
                population: (0..p).map(|_| r.random_range(0..k)).collect(),
            },
            components: ComponentParams {
                params: (0..2)
                    .map(|_| (0..2).map(|_| (0..k).map(|_| comp(&mut r)).collect()).collect())
                    .collect(),
            },
            adherence: AdherenceState {
                alpha: vec![0.7, 0.9],
                beta: vec![vec![0.6, 0.8], vec![0.9, 0.55]],
                proportions: vec![0.3, 0.45, 0.25],
            },
        };
        (dataset, state, priors, dims)
    }

    #[test]
    fn joint_density_invariant_under_global_relabeling() {
        let k = 3usize;
        let (dataset, state, priors, dims) = tiny_state(k);
        let base = joint_log_density(&dataset, &state, &priors, &dims);
        assert!(base.is_finite());

        let mut r = rng::seeded(55);
        for _ in 0..10 {
            // random permutation of 0..k
            let mut perm: Vec<usize> = (0..k).collect();
            for i in (1..k).rev() {
                let j = r.random_range(0..=i);
                perm.swap(i, j);
            }
            let mut permuted = state.clone();
            for s in &mut permuted.labels.population {
                *s = perm[*s];
            }
            for c in permuted.labels.subject.iter_mut().flatten() {
                *c = perm[*c];
            }
            for l in permuted
                .labels
                .epoch
                .iter_mut()
                .flatten()
                .flatten()
            {
                *l = perm[*l];
            }
            for per_epoch in permuted.components.params.iter_mut().flatten() {
                let mut new = per_epoch.clone();
                for (old_k, comp) in per_epoch.iter().enumerate() {
                    new[perm[old_k]] = comp.clone();
                }
                *per_epoch = new;
            }
            let mut new_pi = permuted.adherence.proportions.clone();
            for (old_k, &p) in state.adherence.proportions.iter().enumerate() {
                new_pi[perm[old_k]] = p;
            }
            permuted.adherence.proportions = new_pi;

            let after = joint_log_density(&dataset, &permuted, &priors, &dims);
            assert!(
                (base - after).abs() < 1e-10,
                "density moved from {base} to {after}"
            );
        }
    }

    #[test]
    fn joint_density_is_a_sum_of_level_terms() {
        // removing one independent factor changes the total by exactly that term
        let (dataset, mut state, priors, dims) = tiny_state(3);
        let base = joint_log_density(&dataset, &state, &priors, &dims);

        let old_alpha = state.adherence.alpha[0];
        state.adherence.alpha[0] = 0.8;
        let moved = joint_log_density(&dataset, &state, &priors, &dims);

        // recompute the two factors that depend on alpha_0 by hand
        let lo = 1.0 / 3.0;
        let mut by_hand = ln_truncated_beta_pdf(0.8, priors.alpha_shape.0, priors.alpha_shape.1, lo)
            - ln_truncated_beta_pdf(old_alpha, priors.alpha_shape.0, priors.alpha_shape.1, lo);
        for j in 0..dims.n_channels {
            by_hand += ln_nu(state.labels.subject[0][j], state.labels.population[j], 0.8, 3)
                - ln_nu(state.labels.subject[0][j], state.labels.population[j], old_alpha, 3);
        }
        assert!((moved - base - by_hand).abs() < 1e-10);
    }

    #[test]
    fn truncated_beta_pdf_normalizes() {
        // numeric integral of the pdf over [lo, 1] is 1
        let (a, b, lo) = (3.0f64, 2.0f64, 0.25f64);
        let n = 20_000usize;
        let h = (1.0 - lo) / n as f64;
        let integral: f64 = (0..n)
            .map(|i| {
                let x = lo + (i as f64 + 0.5) * h;
                ln_truncated_beta_pdf(x, a, b, lo).exp()
            })
            .sum::<f64>()
            * h;
        assert!((integral - 1.0).abs() < 1e-6, "integral {integral}");
    }
}
