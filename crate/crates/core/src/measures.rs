//! Monte-Carlo Rashomon-ratio estimation over any sampled classifier family,
//! plus the concentration-bound calculators that certify those estimates.
//!
//! The estimators here count, over N independent draws from a classifier
//! family, the fraction whose loss lands at or below a level gamma. Sublevel
//! membership is closed: a loss exactly equal to gamma is inside.

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::rng::substream;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Which loss a sample (or an estimate built from samples) refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// True error minus Bayes error, from a closed-form expression.
    TrueReducible,
    /// Absolute population loss L(f).
    TrueAnchored,
    /// Absolute empirical loss on a training set.
    EmpiricalAnchored,
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            LossKind::TrueReducible => "true_reducible",
            LossKind::TrueAnchored => "true_anchored",
            LossKind::EmpiricalAnchored => "empirical_anchored",
        };
        f.write_str(s)
    }
}

/// One per-classifier loss value.
#[derive(Debug, Clone, Copy)]
pub struct LossSample {
    pub loss: f64,
    pub kind: LossKind,
}

impl LossSample {
    pub fn new(loss: f64, kind: LossKind) -> Result<Self> {
        if !loss.is_finite() || loss < 0.0 {
            return Err(Error::InvalidLoss(loss));
        }
        Ok(LossSample { loss, kind })
    }
}

/// A sampled Rashomon-ratio estimate: `count / n_samples` classifiers landed
/// at or below `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioEstimate {
    pub value: f64,
    pub count: usize,
    pub gamma: f64,
    pub n_samples: usize,
    pub seed: Option<u64>,
    pub kind: LossKind,
}

impl RatioEstimate {
    fn from_count(count: usize, n: usize, gamma: f64, seed: Option<u64>, kind: LossKind) -> Self {
        RatioEstimate {
            value: count as f64 / n as f64,
            count,
            gamma,
            n_samples: n,
            seed,
            kind,
        }
    }
}

/// Which concentration statement a [`ConfidenceReport`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuaranteeKind {
    /// Hoeffding bound on a true-ratio Monte-Carlo estimate.
    TrueRatioHoeffding,
    /// Same bound applied to the anchored ratio.
    AnchoredRatioHoeffding,
    /// Split-data guarantee, one-sided per-chunk Hoeffding factor.
    SplitOneSided,
    /// Split-data guarantee, two-sided per-chunk Hoeffding factor.
    SplitTwoSided,
}

/// Failure-probability report attached to a ratio estimate: the estimate is
/// within `epsilon` of its target except with probability at most `delta`.
#[derive(Debug, Clone, Copy)]
pub struct ConfidenceReport {
    pub epsilon: f64,
    pub delta: f64,
    pub n_data: Option<usize>,
    pub loss_bound: f64,
    pub kind: GuaranteeKind,
}

impl ConfidenceReport {
    /// Hoeffding report for an N-sample Monte-Carlo ratio estimate.
    pub fn mc_hoeffding(n_samples: usize, epsilon: f64, anchored: bool) -> Result<Self> {
        let delta = hoeffding_ratio_bound(n_samples, epsilon)?;
        Ok(ConfidenceReport {
            epsilon,
            delta,
            n_data: None,
            loss_bound: 1.0,
            kind: if anchored {
                GuaranteeKind::AnchoredRatioHoeffding
            } else {
                GuaranteeKind::TrueRatioHoeffding
            },
        })
    }

    /// Report for the split-data empirical estimate; `delta` is one minus
    /// the success probability of [`split_estimate_guarantee`].
    pub fn split(
        n_data: usize,
        n_classifiers: usize,
        epsilon: f64,
        eta: f64,
        loss_bound: f64,
        variant: SplitVariant,
    ) -> Result<Self> {
        let p = split_estimate_guarantee(n_data, n_classifiers, epsilon, eta, loss_bound, variant)?;
        Ok(ConfidenceReport {
            epsilon,
            delta: (1.0 - p).clamp(0.0, 1.0),
            n_data: Some(n_data),
            loss_bound,
            kind: match variant {
                SplitVariant::OneSided => GuaranteeKind::SplitOneSided,
                SplitVariant::TwoSided => GuaranteeKind::SplitTwoSided,
            },
        })
    }
}

/// Fraction of losses at or below `gamma`.
pub fn estimate_ratio_mc(losses: &[LossSample], gamma: f64) -> Result<RatioEstimate> {
    if losses.is_empty() {
        return Err(Error::NoSamples);
    }
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::invalid(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    let kind = losses[0].kind;
    let mut count = 0usize;
    for s in losses {
        if !s.loss.is_finite() || s.loss < 0.0 {
            return Err(Error::InvalidLoss(s.loss));
        }
        if s.kind != kind {
            return Err(Error::invalid("mixed loss kinds in one estimate"));
        }
        if s.loss <= gamma {
            count += 1;
        }
    }
    Ok(RatioEstimate::from_count(
        count,
        losses.len(),
        gamma,
        None,
        kind,
    ))
}

/// Probability that an N-sample ratio estimate misses the target by at least
/// `epsilon`: `min(1, 2 exp(-2 N eps^2))`. `n_samples = 0` is vacuous and
/// returns the clamp.
pub fn hoeffding_ratio_bound(n_samples: usize, epsilon: f64) -> Result<f64> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::invalid(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    Ok((2.0 * (-2.0 * n_samples as f64 * epsilon * epsilon).exp()).min(1.0))
}

/// The `epsilon` at which `n_samples` draws give failure probability `delta`:
/// `sqrt(ln(2/delta) / (2N))`.
pub fn hoeffding_epsilon(n_samples: usize, delta: f64) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples must be positive"));
    }
    if !(0.0..1.0).contains(&delta) || delta <= 0.0 {
        return Err(Error::invalid(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    Ok(((2.0 / delta).ln() / (2.0 * n_samples as f64)).sqrt())
}

/// Smallest N with `2 exp(-2 N eps^2) <= delta`.
pub fn required_mc_samples(epsilon: f64, delta: f64) -> Result<usize> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::invalid(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let raw = (2.0 / delta).ln() / (2.0 * epsilon * epsilon);
    let satisfied = |n: f64| 2.0 * (-2.0 * n * epsilon * epsilon).exp() <= delta;
    // Scan around the analytic candidate so boundary roundoff cannot bite.
    let mut n = (raw.ceil().max(1.0) - 2.0).max(1.0);
    while !satisfied(n) {
        n += 1.0;
    }
    Ok(n as usize)
}

/// Which per-chunk Hoeffding factor the split-data guarantee uses.
///
/// The two-sided factor `1 - 2 exp(...)` controls deviations in both
/// directions and is the conservative default; the one-sided factor drops
/// the 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitVariant {
    OneSided,
    #[default]
    TwoSided,
}

/// Success probability of the split-data empirical ratio estimate landing
/// inside the `(gamma - eps, gamma + eps)` / `eta` sandwich:
///
/// ```text
/// (1 - c exp(-2 (n/N) (eps/b)^2))^N * (1 - exp(-N eta^2))^2,   c = 1 or 2
/// ```
///
/// clamped to [0, 1]. `epsilon = 0` or `eta = 0` make the bound vacuous and
/// return 0.
pub fn split_estimate_guarantee(
    n_data: usize,
    n_classifiers: usize,
    epsilon: f64,
    eta: f64,
    loss_bound: f64,
    variant: SplitVariant,
) -> Result<f64> {
    if n_data == 0 || n_classifiers == 0 {
        return Err(Error::invalid("n_data and n_classifiers must be positive"));
    }
    if !loss_bound.is_finite() || loss_bound <= 0.0 {
        return Err(Error::invalid(format!(
            "loss bound must be positive, got {loss_bound}"
        )));
    }
    if !epsilon.is_finite() || epsilon < 0.0 || !eta.is_finite() || eta < 0.0 {
        return Err(Error::invalid("epsilon and eta must be non-negative"));
    }
    let chunk = n_data as f64 / n_classifiers as f64;
    let per_chunk = (-2.0 * chunk * (epsilon / loss_bound).powi(2)).exp();
    let c = match variant {
        SplitVariant::OneSided => 1.0,
        SplitVariant::TwoSided => 2.0,
    };
    let factor = (1.0 - c * per_chunk).max(0.0);
    let eta_factor = 1.0 - (-(n_classifiers as f64) * eta * eta).exp();
    let p = factor.powf(n_classifiers as f64) * eta_factor * eta_factor;
    Ok(p.clamp(0.0, 1.0))
}

/// A classifier family that can be sampled and scored on labeled points.
///
/// `loss` must return values in `[0, loss_bound()]`.
pub trait ClassifierFamily: Sync {
    type Classifier: Send;

    fn sample(&self, rng: &mut ChaCha8Rng) -> Self::Classifier;
    fn loss(&self, classifier: &Self::Classifier, features: &[f64], label: f64) -> f64;
    fn loss_bound(&self) -> f64;
}

/// Draws `n_classifiers` i.i.d. classifiers and reports the fraction whose
/// empirical loss is at most `gamma`.
///
/// With `split = true` the dataset is shuffled by the seed, cut into
/// `n_classifiers` equisized chunks (the remainder is dropped from the end),
/// and classifier i is scored on chunk i. With `split = false` every
/// classifier is scored on the whole dataset.
///
/// Draw i samples from substream `(seed, i)`, so the result is bit-identical
/// for any worker count.
pub fn estimate_empirical_anchored_ratio<F: ClassifierFamily>(
    dataset: &LabeledDataset,
    family: &F,
    n_classifiers: usize,
    gamma: f64,
    split: bool,
    seed: u64,
) -> Result<RatioEstimate> {
    if n_classifiers == 0 {
        return Err(Error::invalid("n_classifiers must be positive"));
    }
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::invalid(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    let n = dataset.n();
    if split && n < n_classifiers {
        return Err(Error::InsufficientData {
            n_data: n,
            n_classifiers,
        });
    }

    // Shuffled point order; the shuffle draws from a stream outside the
    // per-draw range so classifier substreams stay untouched.
    let order: Vec<usize> = if split {
        let mut idx: Vec<usize> = (0..n).collect();
        let mut rng = substream(seed, u64::MAX);
        use rand::seq::SliceRandom;
        idx.shuffle(&mut rng);
        idx
    } else {
        (0..n).collect()
    };
    let chunk = if split { n / n_classifiers } else { n };

    let losses: Vec<f64> = (0..n_classifiers)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let c = family.sample(&mut rng);
            let points: &[usize] = if split {
                &order[i * chunk..(i + 1) * chunk]
            } else {
                &order
            };
            let total: f64 = points
                .iter()
                .map(|&j| family.loss(&c, &dataset.features()[j], dataset.labels()[j]))
                .sum();
            total / points.len() as f64
        })
        .collect();

    let count = losses.iter().filter(|&&l| l <= gamma).count();
    Ok(RatioEstimate::from_count(
        count,
        n_classifiers,
        gamma,
        Some(seed),
        LossKind::EmpiricalAnchored,
    ))
}

#[cfg(test)]
#[allow(clippy::excessive_precision)] // frozen oracle anchors keep their full digits
mod tests {
    use super::*;

    fn samples(vals: &[f64]) -> Vec<LossSample> {
        vals.iter()
            .map(|&v| LossSample::new(v, LossKind::TrueReducible).unwrap())
            .collect()
    }

    #[test]
    fn ratio_counts_closed_sublevel() {
        let est = estimate_ratio_mc(&samples(&[0.01, 0.20, 0.04]), 0.05).unwrap();
        assert_eq!(est.count, 2);
        assert_eq!(est.value, 2.0 / 3.0);
        // ties at exactly gamma are inside
        let est = estimate_ratio_mc(&samples(&[0.05, 0.06]), 0.05).unwrap();
        assert_eq!(est.count, 1);
    }

    #[test]
    fn ratio_boundary_cases() {
        let est = estimate_ratio_mc(&samples(&[0.9, 0.8]), 0.05).unwrap();
        assert_eq!(est.value, 0.0);
        let est = estimate_ratio_mc(&samples(&[0.01, 0.02]), 0.05).unwrap();
        assert_eq!(est.value, 1.0);
    }

    #[test]
    fn ratio_rejects_bad_inputs() {
        assert!(matches!(
            estimate_ratio_mc(&[], 0.05),
            Err(Error::NoSamples)
        ));
        assert!(LossSample::new(f64::NAN, LossKind::TrueAnchored).is_err());
        assert!(LossSample::new(-0.1, LossKind::TrueAnchored).is_err());
        let bad = vec![LossSample {
            loss: f64::INFINITY,
            kind: LossKind::TrueAnchored,
        }];
        assert!(matches!(
            estimate_ratio_mc(&bad, 0.05),
            Err(Error::InvalidLoss(_))
        ));
        assert!(estimate_ratio_mc(&samples(&[0.1]), 0.0).is_err());
        let mixed = vec![
            LossSample::new(0.1, LossKind::TrueAnchored).unwrap(),
            LossSample::new(0.1, LossKind::TrueReducible).unwrap(),
        ];
        assert!(estimate_ratio_mc(&mixed, 0.5).is_err());
    }

    #[test]
    fn hoeffding_values() {
        let b = hoeffding_ratio_bound(1000, 0.05).unwrap();
        assert!((b - 0.013475893998170934).abs() <= 1e-15);
        let b = hoeffding_ratio_bound(100, 0.1).unwrap();
        assert!((b - 0.27067056647322538).abs() <= 1e-15);
        assert_eq!(hoeffding_ratio_bound(0, 0.5).unwrap(), 1.0);
        assert_eq!(hoeffding_ratio_bound(3, 1e-12).unwrap(), 1.0);
        assert!(hoeffding_ratio_bound(10, 0.0).is_err());
        assert!(hoeffding_ratio_bound(10, -1.0).is_err());
    }

    #[test]
    fn hoeffding_epsilon_inverts_the_bound() {
        let eps = hoeffding_epsilon(1000, 0.02).unwrap();
        assert!((eps - (100.0f64.ln() / 2000.0).sqrt()).abs() <= 1e-15);
        for (n, delta) in [(10, 0.5), (1000, 0.02), (50_000, 0.001)] {
            let eps = hoeffding_epsilon(n, delta).unwrap();
            let back = hoeffding_ratio_bound(n, eps).unwrap();
            assert!((back - delta).abs() <= 1e-12 * delta);
        }
        assert!(hoeffding_epsilon(0, 0.1).is_err());
        assert!(hoeffding_epsilon(10, 0.0).is_err());
        assert!(hoeffding_epsilon(10, 1.0).is_err());
    }

    #[test]
    fn required_samples_inverts_the_bound() {
        assert_eq!(required_mc_samples(0.05, 0.02).unwrap(), 922);
        // one sample suffices when epsilon >= sqrt(ln(2/delta)/2)
        let eps = ((2.0f64 / 0.1).ln() / 2.0).sqrt() + 1e-9;
        assert_eq!(required_mc_samples(eps, 0.1).unwrap(), 1);
        assert!(required_mc_samples(0.0, 0.1).is_err());
        assert!(required_mc_samples(0.1, 1.0).is_err());
    }

    #[test]
    fn split_guarantee_values() {
        let two =
            split_estimate_guarantee(10_000, 100, 0.1, 0.1, 1.0, SplitVariant::TwoSided).unwrap();
        assert!((two - 7.8338256815820033e-15).abs() <= 1e-12 * two.max(1e-20));
        let one =
            split_estimate_guarantee(10_000, 100, 0.1, 0.1, 1.0, SplitVariant::OneSided).unwrap();
        assert!((one - 1.9336309821104691e-7).abs() <= 1e-12 * one);
        // n/N -> infinity and N -> infinity drive the bound to 1
        let p =
            split_estimate_guarantee(1_000_000_000, 1000, 0.1, 0.1, 1.0, SplitVariant::TwoSided)
                .unwrap();
        assert!(p > 0.999);
        // epsilon = 0 collapses the per-chunk factor
        for v in [SplitVariant::OneSided, SplitVariant::TwoSided] {
            assert_eq!(
                split_estimate_guarantee(100, 10, 0.0, 0.1, 1.0, v).unwrap(),
                0.0
            );
        }
        assert!(split_estimate_guarantee(0, 10, 0.1, 0.1, 1.0, SplitVariant::TwoSided).is_err());
        assert!(split_estimate_guarantee(10, 10, 0.1, 0.1, 0.0, SplitVariant::TwoSided).is_err());
        assert!(split_estimate_guarantee(10, 10, -0.1, 0.1, 1.0, SplitVariant::TwoSided).is_err());
    }

    #[test]
    fn confidence_report_monotone_in_n() {
        let mut prev = 1.0;
        for n in [10, 100, 1000, 10_000] {
            let r = ConfidenceReport::mc_hoeffding(n, 0.05, false).unwrap();
            assert!(r.delta <= prev);
            prev = r.delta;
        }
        let mut prev = 1.0;
        for n_data in [1_000, 10_000, 100_000, 1_000_000] {
            let r = ConfidenceReport::split(n_data, 50, 0.1, 0.1, 1.0, SplitVariant::default())
                .unwrap();
            assert!(r.delta <= prev + 1e-15, "n={n_data}: {} > {prev}", r.delta);
            prev = r.delta;
        }
    }

    struct ConstantZero;
    impl ClassifierFamily for ConstantZero {
        type Classifier = ();
        fn sample(&self, _rng: &mut ChaCha8Rng) {}
        fn loss(&self, _c: &(), _x: &[f64], _y: f64) -> f64 {
            0.0
        }
        fn loss_bound(&self) -> f64 {
            1.0
        }
    }

    struct ConstantHalf;
    impl ClassifierFamily for ConstantHalf {
        type Classifier = ();
        fn sample(&self, _rng: &mut ChaCha8Rng) {}
        fn loss(&self, _c: &(), _x: &[f64], _y: f64) -> f64 {
            0.5
        }
        fn loss_bound(&self) -> f64 {
            1.0
        }
    }

    fn toy_dataset(n: usize) -> LabeledDataset {
        let rows = (0..n).map(|i| vec![i as f64, 1.0]).collect();
        let labels = (0..n)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        LabeledDataset::from_rows(rows, labels).unwrap()
    }

    #[test]
    fn empirical_ratio_trivial_cases() {
        let ds = toy_dataset(10);
        let est = estimate_empirical_anchored_ratio(&ds, &ConstantZero, 5, 0.1, false, 1).unwrap();
        assert_eq!(est.value, 1.0);
        // gamma above the loss bound captures everything
        let est = estimate_empirical_anchored_ratio(&ds, &ConstantHalf, 5, 1.0, true, 1).unwrap();
        assert_eq!(est.value, 1.0);
        assert_eq!(est.kind, LossKind::EmpiricalAnchored);
        assert_eq!(est.seed, Some(1));
    }

    #[test]
    fn empirical_ratio_split_needs_enough_data() {
        let ds = toy_dataset(4);
        let err =
            estimate_empirical_anchored_ratio(&ds, &ConstantZero, 5, 0.1, true, 1).unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientData {
                n_data: 4,
                n_classifiers: 5
            }
        ));
        // n = 7, N = 3: chunks of 2, one point discarded
        let ds = toy_dataset(7);
        let est = estimate_empirical_anchored_ratio(&ds, &ConstantZero, 3, 0.1, true, 1).unwrap();
        assert_eq!(est.n_samples, 3);
    }

    #[test]
    fn empirical_ratio_is_deterministic() {
        let ds = toy_dataset(50);
        let a = estimate_empirical_anchored_ratio(&ds, &ConstantHalf, 20, 0.6, true, 99).unwrap();
        let b = estimate_empirical_anchored_ratio(&ds, &ConstantHalf, 20, 0.6, true, 99).unwrap();
        assert_eq!(a, b);
    }
}
