//! Random-subset selection calculus: how large a random draw from a family
//! must be for it to intersect the Rashomon set, the loss sandwich that
//! intersection buys, and the TARP classifier (thresholding after random
//! projection) that cashes the guarantee in.

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::gaussian::sample_unit_vector;
use crate::rng::substream;
use rayon::prelude::*;

/// A subset size paired with the minimum Rashomon ratio that makes a random
/// subset of that size intersect the Rashomon set with probability 1 - delta.
#[derive(Debug, Clone, Copy)]
pub struct SubsetPlan {
    pub ratio: f64,
    pub delta: f64,
    pub n_subset: usize,
}

impl SubsetPlan {
    /// Plans the subset size for a known ratio.
    pub fn for_ratio(ratio: f64, delta: f64) -> Result<Self> {
        let n_subset = required_subset_size(ratio, delta)?;
        Ok(SubsetPlan {
            ratio,
            delta,
            n_subset,
        })
    }

    /// Plans the minimum ratio for a fixed subset size.
    pub fn for_size(n_subset: usize, delta: f64) -> Result<Self> {
        let ratio = min_ratio_for_subset(n_subset, delta)?;
        Ok(SubsetPlan {
            ratio,
            delta,
            n_subset,
        })
    }
}

/// Smallest Rashomon ratio under which `n_subset` independent draws hit the
/// Rashomon set with probability at least `1 - delta`: `1 - delta^(1/N)`.
pub fn min_ratio_for_subset(n_subset: usize, delta: f64) -> Result<f64> {
    if n_subset == 0 {
        return Err(Error::invalid("n_subset must be positive"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    // -expm1 keeps full relative precision when the ratio is tiny.
    Ok(-(delta.ln() / n_subset as f64).exp_m1())
}

/// `ln(delta) / ln(1 - ratio)` before rounding up.
pub fn required_subset_size_raw(ratio: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if ratio.is_nan() || ratio <= 0.0 {
        return Err(Error::invalid(
            "no finite subset suffices: ratio must be positive".to_string(),
        ));
    }
    if ratio >= 1.0 {
        return Ok(1.0);
    }
    Ok(delta.ln() / (-ratio).ln_1p())
}

/// Smallest integer N with `(1 - ratio)^N <= delta` (closed inequality, so a
/// raw value landing exactly on an integer stays there).
pub fn required_subset_size(ratio: f64, delta: f64) -> Result<usize> {
    let raw = required_subset_size_raw(ratio, delta)?;
    if ratio >= 1.0 {
        return Ok(1);
    }
    // Boundary cases compute raw within a few ulp of an integer; snap to it.
    let tol = 1e-9 + raw.abs() * 5e-13;
    let n = if (raw - raw.round()).abs() <= tol {
        raw.round()
    } else {
        raw.ceil()
    };
    Ok(n.max(1.0) as usize)
}

/// Probability that a classifier with true anchored loss at most eta keeps
/// empirical loss at most `eta + epsilon` on n points: `1 - exp(-2n (eps/b)^2)`.
pub fn empirical_membership_prob(n: usize, epsilon: f64, loss_bound: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    if !(loss_bound.is_finite() && loss_bound > 0.0) {
        return Err(Error::invalid(format!(
            "loss bound must be positive, got {loss_bound}"
        )));
    }
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::invalid(format!(
            "epsilon must be non-negative, got {epsilon}"
        )));
    }
    Ok(1.0 - (-2.0 * n as f64 * (epsilon / loss_bound).powi(2)).exp())
}

/// Which capacity argument produced a generalization gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaKind {
    Vc,
    Growth,
}

/// A uniform-convergence gap Delta holding with probability 1 - delta.
#[derive(Debug, Clone, Copy)]
pub struct GeneralizationDelta {
    pub kind: DeltaKind,
    pub value: f64,
    pub n: usize,
    pub delta: f64,
    pub loss_bound: f64,
    /// VC dimension or the growth function evaluated at 2n.
    pub capacity: f64,
}

/// VC-dimension gap:
/// `b sqrt((d_vc (ln(2n/d_vc) + 1) - ln(delta/4)) / n)`, needs `n > d_vc`.
pub fn vc_delta(n: usize, d_vc: usize, loss_bound: f64, delta: f64) -> Result<GeneralizationDelta> {
    if d_vc == 0 {
        return Err(Error::invalid("VC dimension must be at least 1"));
    }
    if n <= d_vc {
        return Err(Error::invalid(format!(
            "need n > d_vc, got n = {n}, d_vc = {d_vc}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    if !(loss_bound.is_finite() && loss_bound > 0.0) {
        return Err(Error::invalid(format!(
            "loss bound must be positive, got {loss_bound}"
        )));
    }
    let nf = n as f64;
    let dv = d_vc as f64;
    let value = loss_bound * ((dv * ((2.0 * nf / dv).ln() + 1.0) - (delta / 4.0).ln()) / nf).sqrt();
    Ok(GeneralizationDelta {
        kind: DeltaKind::Vc,
        value,
        n,
        delta,
        loss_bound,
        capacity: dv,
    })
}

/// Growth-function gap for 0-1 loss:
/// `sqrt((8/n) ln(4 m(2n) / delta))`.
pub fn growth_delta(n: usize, growth_at_2n: f64, delta: f64) -> Result<GeneralizationDelta> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    if !(growth_at_2n.is_finite() && growth_at_2n >= 1.0) {
        return Err(Error::invalid(format!(
            "growth function value must be at least 1, got {growth_at_2n}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let value = (8.0 / n as f64 * (4.0 * growth_at_2n / delta).ln()).sqrt();
    Ok(GeneralizationDelta {
        kind: DeltaKind::Growth,
        value,
        n,
        delta,
        loss_bound: 1.0,
        capacity: growth_at_2n,
    })
}

/// Two-sided bracket around the best empirical loss of a random subset.
///
/// Each side holds separately with probability at least `1 - delta` (the
/// failure probabilities are reported as-is, not union-bounded).
#[derive(Debug, Clone, Copy)]
pub struct LossSandwich {
    pub lower: f64,
    pub upper: f64,
    pub delta: f64,
    pub gamma: f64,
}

impl LossSandwich {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, loss: f64) -> bool {
        self.lower <= loss && loss <= self.upper
    }
}

/// Brackets the best empirical loss over a subset that intersects the
/// gamma-Rashomon set of the big family:
///
/// ```text
/// inf - Delta  <=  best empirical loss  <=  inf + gamma + b sqrt(ln(1/delta) / (2n))
/// ```
pub fn loss_sandwich(
    inf_true_loss: f64,
    gamma: f64,
    delta: f64,
    n: usize,
    loss_bound: f64,
    delta_term: &GeneralizationDelta,
) -> LossSandwich {
    let slack = loss_bound * ((1.0 / delta).ln() / (2.0 * n as f64)).sqrt();
    LossSandwich {
        lower: inf_true_loss - delta_term.value,
        upper: inf_true_loss + gamma + slack,
        delta,
        gamma,
    }
}

/// The sandwich specialized to TARP with N projection directions: the
/// growth function of per-direction thresholdings at 2n points is 4nN,
/// giving `(inf - sqrt((8/n) ln(16nN/delta)), inf + gamma + sqrt(ln(1/delta)/(2n)))`.
pub fn tarp_bound(
    n: usize,
    n_directions: usize,
    delta: f64,
    inf_true_loss: f64,
    gamma: f64,
) -> Result<LossSandwich> {
    if n_directions == 0 {
        return Err(Error::invalid("n_directions must be positive"));
    }
    let growth = 4.0 * n as f64 * n_directions as f64;
    let dt = growth_delta(n, growth, delta)?;
    Ok(loss_sandwich(inf_true_loss, gamma, delta, n, 1.0, &dt))
}

/// A trained thresholding-after-random-projection classifier.
///
/// Prediction is `orientation * sign(direction . x - threshold)` with
/// sign(0) read as +1.
#[derive(Debug, Clone)]
pub struct TarpModel {
    pub directions: Vec<Vec<f64>>,
    pub best_index: usize,
    pub best_threshold: f64,
    pub best_orientation: f64,
    pub train_error: f64,
}

impl TarpModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let dir = &self.directions[self.best_index];
        let proj: f64 = dir.iter().zip(x).map(|(a, b)| a * b).sum();
        let raw = if proj - self.best_threshold >= 0.0 {
            1.0
        } else {
            -1.0
        };
        self.best_orientation * raw
    }
}

/// Best threshold for one direction: returns (error count, threshold,
/// orientation). Candidate thresholds are midpoints between consecutive
/// distinct projections plus the two infinities; ties resolve to the lowest
/// threshold, then orientation +1.
fn best_threshold_for(proj: &[f64], labels: &[f64]) -> (usize, f64, f64) {
    let n = proj.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| proj[a].partial_cmp(&proj[b]).unwrap());

    // pos_below[k] = +1 labels among the k smallest projections
    let mut pos_below = vec![0usize; n + 1];
    for (rank, &idx) in order.iter().enumerate() {
        pos_below[rank + 1] = pos_below[rank] + usize::from(labels[idx] > 0.0);
    }
    let pos_total = pos_below[n];

    let mut best: Option<(usize, f64, f64)> = None;
    for k in 0..=n {
        // threshold splitting k points below from n - k above
        let threshold = if k == 0 {
            f64::NEG_INFINITY
        } else if k == n {
            f64::INFINITY
        } else {
            let lo = proj[order[k - 1]];
            let hi = proj[order[k]];
            if lo == hi {
                continue; // no separating interval
            }
            lo + (hi - lo) / 2.0
        };
        let neg_below = k - pos_below[k];
        let neg_above = (n - pos_total) - neg_below;
        // orientation +1: predict -1 below, +1 above
        let err_plus = pos_below[k] + neg_above;
        let err_minus = n - err_plus;
        for (err, orientation) in [(err_plus, 1.0), (err_minus, -1.0)] {
            let better = match best {
                None => true,
                Some((be, bt, _)) => err < be || (err == be && threshold < bt),
            };
            if better {
                best = Some((err, threshold, orientation));
            }
        }
    }
    best.expect("at least the infinite thresholds exist")
}

/// Trains TARP: draws `n_directions` uniform unit directions (direction j
/// from substream `(seed, j)`), finds each one's best threshold and
/// orientation, and keeps the global best. Ties break to the lowest
/// direction index, then the lowest threshold.
pub fn tarp_train(dataset: &LabeledDataset, n_directions: usize, seed: u64) -> Result<TarpModel> {
    if n_directions == 0 {
        return Err(Error::invalid("n_directions must be positive"));
    }
    if dataset.labels().iter().any(|y| y.abs() != 1.0) {
        return Err(Error::invalid("TARP requires labels in {-1, +1}"));
    }
    let n = dataset.n();
    let d = dataset.dim();

    let directions: Vec<Vec<f64>> = (0..n_directions)
        .into_par_iter()
        .map(|j| {
            let mut rng = substream(seed, j as u64);
            sample_unit_vector(&mut rng, d)
        })
        .collect();

    let per_direction: Vec<(usize, f64, f64)> = directions
        .par_iter()
        .map(|dir| {
            let proj: Vec<f64> = dataset
                .features()
                .iter()
                .map(|x| dir.iter().zip(x).map(|(a, b)| a * b).sum())
                .collect();
            best_threshold_for(&proj, dataset.labels())
        })
        .collect();

    let mut best_index = 0;
    for j in 1..n_directions {
        if per_direction[j].0 < per_direction[best_index].0 {
            best_index = j;
        }
    }
    let (err, threshold, orientation) = per_direction[best_index];
    Ok(TarpModel {
        directions,
        best_index,
        best_threshold: threshold,
        best_orientation: orientation,
        train_error: err as f64 / n as f64,
    })
}
