//! Exact error formulas and Monte-Carlo Rashomon ratios for affine
//! classifiers on a mixture of two spherical Gaussians.
//!
//! A classifier `sign(p . x + t)` is unchanged by positive rescaling of
//! `(p, t)`, so the family is identified with the unit sphere in R^(d+1)
//! carrying the uniform measure. The reducible-error formula scores each
//! sphere point with its better labeling orientation, which makes it
//! invariant under `(p, t) -> (-p, -t)`.

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::measures::{estimate_ratio_mc, LossKind, LossSample, RatioEstimate};
use crate::rng::{cell_stream, substream};
use crate::special::normal_cdf;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

/// Two spherical Gaussian components with shared isotropic sigma.
///
/// Component 2 (mean `mu2`) carries label +1, component 1 label -1;
/// `zeta1` is the prior of component 1.
#[derive(Debug, Clone)]
pub struct GaussianMixture {
    dim: usize,
    mu1: Vec<f64>,
    mu2: Vec<f64>,
    sigma: f64,
    zeta1: f64,
}

impl GaussianMixture {
    pub fn new(mu1: Vec<f64>, mu2: Vec<f64>, sigma: f64, zeta1: f64) -> Result<Self> {
        if mu1.is_empty() || mu1.len() != mu2.len() {
            return Err(Error::DimensionMismatch {
                expected: mu1.len(),
                got: mu2.len(),
            });
        }
        if mu1.iter().chain(mu2.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("means must be finite"));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        if !(zeta1 > 0.0 && zeta1 < 1.0) {
            return Err(Error::invalid(format!(
                "zeta1 must lie in (0, 1), got {zeta1}"
            )));
        }
        Ok(GaussianMixture {
            dim: mu1.len(),
            mu1,
            mu2,
            sigma,
            zeta1,
        })
    }

    /// Antipodal equal-prior mixture with means -mu and +mu.
    pub fn antipodal(mu: Vec<f64>, sigma: f64) -> Result<Self> {
        let neg: Vec<f64> = mu.iter().map(|v| -v).collect();
        GaussianMixture::new(neg, mu, sigma, 0.5)
    }

    /// Antipodal mixture along the first axis with `|mu2 - mu1| = dist`.
    pub fn antipodal_on_axis(dim: usize, dist: f64, sigma: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim must be positive"));
        }
        if !(dist.is_finite() && dist >= 0.0) {
            return Err(Error::invalid(format!(
                "distance must be non-negative, got {dist}"
            )));
        }
        let mut mu = vec![0.0; dim];
        mu[0] = dist / 2.0;
        GaussianMixture::antipodal(mu, sigma)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mu1(&self) -> &[f64] {
        &self.mu1
    }

    pub fn mu2(&self) -> &[f64] {
        &self.mu2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn zeta1(&self) -> f64 {
        self.zeta1
    }

    pub fn zeta2(&self) -> f64 {
        1.0 - self.zeta1
    }

    pub fn has_equal_priors(&self) -> bool {
        self.zeta1 == 0.5
    }

    /// `|mu2 - mu1|`.
    pub fn mean_distance(&self) -> f64 {
        self.mu1
            .iter()
            .zip(&self.mu2)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }
}

/// A point `(p, t)` on the unit sphere in R^(d+1), read as `sign(p.x + t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineClassifier {
    p: Vec<f64>,
    t: f64,
}

impl AffineClassifier {
    /// Rescales `(p, t)` onto the unit sphere.
    pub fn new(p: Vec<f64>, t: f64) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::invalid(
                "projection must have at least one coordinate",
            ));
        }
        if p.iter().any(|v| !v.is_finite()) || !t.is_finite() {
            return Err(Error::invalid("classifier coordinates must be finite"));
        }
        let norm = (p.iter().map(|v| v * v).sum::<f64>() + t * t).sqrt();
        if norm == 0.0 {
            return Err(Error::invalid("(p, t) must be nonzero"));
        }
        let p = p.into_iter().map(|v| v / norm).collect();
        Ok(AffineClassifier { p, t: t / norm })
    }

    /// d = 1 parametrization `p = sin(theta)`, `t = cos(theta)`.
    pub fn from_angle(theta: f64) -> Self {
        AffineClassifier {
            p: vec![theta.sin()],
            t: theta.cos(),
        }
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Angle on the circle for d = 1 classifiers, in (-pi, pi].
    pub fn theta(&self) -> Option<f64> {
        (self.p.len() == 1).then(|| self.p[0].atan2(self.t))
    }

    /// `sign(p . x + t)`, with sign(0) = +1.
    pub fn decide(&self, x: &[f64]) -> f64 {
        let v = dot(&self.p, x) + self.t;
        if v >= 0.0 {
            1.0
        } else {
            -1.0
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Bayes error of the mixture: `Phi(-|mu2 - mu1| / (2 sigma))`.
///
/// The expression assumes equal priors; callers with `zeta1 != 1/2` get the
/// equal-prior value applied as-is.
pub fn bayes_error(gm: &GaussianMixture) -> f64 {
    normal_cdf(-gm.mean_distance() / (2.0 * gm.sigma))
}

/// Optimal error after projecting onto `p`:
/// `Phi(-|p.(mu2 - mu1)| / (2 sigma |p|))`.
pub fn projected_error(gm: &GaussianMixture, p: &[f64]) -> Result<f64> {
    if p.len() != gm.dim {
        return Err(Error::DimensionMismatch {
            expected: gm.dim,
            got: p.len(),
        });
    }
    let pn = norm(p);
    if pn == 0.0 {
        return Err(Error::DegenerateDirection);
    }
    let sep: Vec<f64> = gm.mu2.iter().zip(&gm.mu1).map(|(b, a)| b - a).collect();
    Ok(normal_cdf(-dot(p, &sep).abs() / (2.0 * gm.sigma * pn)))
}

/// Reducible error of `sign(p . x + t)` for any scaling of `(p, t)`:
///
/// ```text
/// Phi(|mu2 - mu1|/(2 sigma))
///   - zeta Phi((max(p.mu1, p.mu2) - t) / (sigma |p|))
///   - (1 - zeta) Phi((t - min(p.mu1, p.mu2)) / (sigma |p|))
/// ```
///
/// with `zeta` the prior of the component achieving the max (ties resolve
/// to component 1).
///
/// The first term is the equal-prior Bayes complement, so with unequal
/// priors the raw expression can dip below zero for classifiers beating
/// that reference; the result clamps at zero (which also absorbs roundoff
/// cancellation in the equal-prior case).
pub fn reducible_error_unnormalized(gm: &GaussianMixture, p: &[f64], t: f64) -> Result<f64> {
    let base = normal_cdf(gm.mean_distance() / (2.0 * gm.sigma));
    reducible_error_with_base(gm, base, p, t)
}

/// Same formula with the first term precomputed, for tight sampling loops.
fn reducible_error_with_base(gm: &GaussianMixture, base: f64, p: &[f64], t: f64) -> Result<f64> {
    if p.len() != gm.dim {
        return Err(Error::DimensionMismatch {
            expected: gm.dim,
            got: p.len(),
        });
    }
    let pn = norm(p);
    if pn == 0.0 {
        return Err(Error::DegenerateDirection);
    }
    let s = gm.sigma * pn;
    let d1 = dot(p, &gm.mu1);
    let d2 = dot(p, &gm.mu2);
    let (hi, lo, zeta) = if d1 >= d2 {
        (d1, d2, gm.zeta1)
    } else {
        (d2, d1, gm.zeta2())
    };
    let e = base - zeta * normal_cdf((hi - t) / s) - (1.0 - zeta) * normal_cdf((t - lo) / s);
    Ok(e.max(0.0))
}

/// Reducible error of a sphere-normalized classifier.
pub fn reducible_error(gm: &GaussianMixture, c: &AffineClassifier) -> Result<f64> {
    reducible_error_unnormalized(gm, &c.p, c.t)
}

/// One-dimensional antipodal form on the circle, `theta` in (0, pi):
///
/// ```text
/// Phi(mu/sigma) - zeta Phi((sin t mu - cos t)/(sin t sigma))
///              - (1 - zeta) Phi((cos t + sin t mu)/(sin t sigma))
/// ```
///
/// `mu >= 0` is the +1-class mean (component means are -mu and +mu) and
/// `zeta` is the prior of that +mu component.
pub fn reducible_error_1d(mu: f64, sigma: f64, theta: f64, zeta: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(Error::ConstantClassifier);
    }
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(Error::invalid(format!("mu must be non-negative, got {mu}")));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::invalid(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::invalid(format!(
            "zeta must lie in (0, 1), got {zeta}"
        )));
    }
    let (s, c) = theta.sin_cos();
    let e = normal_cdf(mu / sigma)
        - zeta * normal_cdf((s * mu - c) / (s * sigma))
        - (1.0 - zeta) * normal_cdf((c + s * mu) / (s * sigma));
    Ok(e.max(0.0))
}

/// A point uniform on the unit sphere in `R^dim`, by normalizing independent
/// standard normals (resampling the measure-zero zero vector).
pub fn sample_unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    assert!(dim >= 1);
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = norm(&v);
        if n > 0.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Uniform classifier on the sphere `S^d` in `R^(ambient_dim = d + 1)`;
/// the last coordinate becomes the offset t.
pub fn sample_sphere_uniform(rng: &mut ChaCha8Rng, ambient_dim: usize) -> AffineClassifier {
    assert!(
        ambient_dim >= 2,
        "need at least one projection coordinate plus offset"
    );
    let mut v = sample_unit_vector(rng, ambient_dim);
    let t = v.pop().expect("nonempty");
    AffineClassifier { p: v, t }
}

// Blocked, allocation-free twin of the sample_sphere_uniform +
// reducible_error pair; draw i still consumes stream (seed, cell_stream)
// with identical arithmetic, so losses match the classifier path bitwise.
fn reducible_losses_with_streams(
    gm: &GaussianMixture,
    n_samples: usize,
    seed: u64,
    cell: usize,
) -> Result<Vec<f64>> {
    const BLOCK: usize = 4096;
    let base = normal_cdf(gm.mean_distance() / (2.0 * gm.sigma));
    let n_blocks = n_samples.div_ceil(BLOCK);
    let blocks: Vec<Vec<f64>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| -> Result<Vec<f64>> {
            let lo = b * BLOCK;
            let hi = (lo + BLOCK).min(n_samples);
            let mut point = vec![0.0; gm.dim + 1];
            let mut out = Vec::with_capacity(hi - lo);
            for i in lo..hi {
                let mut rng = substream(seed, cell_stream(cell, i));
                loop {
                    for v in point.iter_mut() {
                        *v = StandardNormal.sample(&mut rng);
                    }
                    let n = norm(&point);
                    if n > 0.0 {
                        for v in point.iter_mut() {
                            *v /= n;
                        }
                        break;
                    }
                }
                out.push(reducible_error_with_base(
                    gm,
                    base,
                    &point[..gm.dim],
                    point[gm.dim],
                )?);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(blocks.concat())
}

/// The classifiers behind a [`true_ratio_affine`] run, with their reducible
/// errors: draw i comes from substream `(seed, i)` exactly as the estimator
/// consumes it.
pub fn sample_reducible_errors(
    gm: &GaussianMixture,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<(AffineClassifier, f64)>> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples must be positive"));
    }
    (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, cell_stream(0, i));
            let c = sample_sphere_uniform(&mut rng, gm.dim + 1);
            let e = reducible_error(gm, &c)?;
            Ok((c, e))
        })
        .collect()
}

/// Monte-Carlo estimate of the true Rashomon ratio: N uniform sphere draws
/// scored by the closed-form reducible error.
pub fn true_ratio_affine(
    gm: &GaussianMixture,
    gamma: f64,
    n_samples: usize,
    seed: u64,
) -> Result<RatioEstimate> {
    if n_samples == 0 {
        return Err(Error::invalid("n_samples must be positive"));
    }
    let losses = reducible_losses_with_streams(gm, n_samples, seed, 0)?;
    let samples: Vec<LossSample> = losses
        .into_iter()
        .map(|l| LossSample::new(l, LossKind::TrueReducible))
        .collect::<Result<_>>()?;
    let mut est = estimate_ratio_mc(&samples, gamma)?;
    est.seed = Some(seed);
    Ok(est)
}

/// Sweep parameters recorded alongside a ratio curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepParams {
    pub dim: usize,
    pub sigma: f64,
    pub gamma: f64,
    pub n_samples: usize,
    pub seed: u64,
}

/// Estimated Rashomon ratio as a function of the distance between means.
#[derive(Debug, Clone)]
pub struct RatioCurve {
    pub distances: Vec<f64>,
    pub ratios: Vec<f64>,
    pub params: SweepParams,
}

impl RatioCurve {
    /// Grid point with the smallest estimated ratio (first index on ties).
    pub fn min_point(&self) -> (f64, f64) {
        let mut best = 0;
        for i in 1..self.ratios.len() {
            if self.ratios[i] < self.ratios[best] {
                best = i;
            }
        }
        (self.distances[best], self.ratios[best])
    }
}

/// One [`true_ratio_affine`] evaluation per grid distance, each grid point
/// drawing from its own substream block.
pub fn ratio_vs_distance_sweep(
    dim: usize,
    sigma: f64,
    gamma: f64,
    n_samples: usize,
    distances: &[f64],
    seed: u64,
) -> Result<RatioCurve> {
    if distances.is_empty() {
        return Err(Error::invalid("distance grid is empty"));
    }
    if n_samples == 0 {
        return Err(Error::invalid("n_samples must be positive"));
    }
    if distances.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(Error::invalid("distances must be finite and non-negative"));
    }
    let ratios: Vec<f64> = distances
        .par_iter()
        .enumerate()
        .map(|(cell, &dist)| -> Result<f64> {
            let gm = GaussianMixture::antipodal_on_axis(dim, dist, sigma)?;
            let losses = reducible_losses_with_streams(&gm, n_samples, seed, cell)?;
            Ok(losses.iter().filter(|&&l| l <= gamma).count() as f64 / n_samples as f64)
        })
        .collect::<Result<_>>()?;
    Ok(RatioCurve {
        distances: distances.to_vec(),
        ratios,
        params: SweepParams {
            dim,
            sigma,
            gamma,
            n_samples,
            seed,
        },
    })
}

/// Draws `n` labeled points from the mixture: component 1 (label -1) with
/// probability zeta1, component 2 (label +1) otherwise. Point i uses
/// substream `(seed, i)`.
pub fn sample_mixture(gm: &GaussianMixture, n: usize, seed: u64) -> Result<LabeledDataset> {
    if n == 0 {
        return Err(Error::NoSamples);
    }
    let rows: Vec<(Vec<f64>, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let u: f64 = rand::Rng::gen(&mut rng);
            let (mean, label) = if u < gm.zeta1 {
                (&gm.mu1, -1.0)
            } else {
                (&gm.mu2, 1.0)
            };
            let x: Vec<f64> = mean
                .iter()
                .map(|m| {
                    m + gm.sigma
                        * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
                })
                .collect();
            (x, label)
        })
        .collect();
    let (features, labels) = rows.into_iter().unzip();
    LabeledDataset::from_rows(features, labels)
}
