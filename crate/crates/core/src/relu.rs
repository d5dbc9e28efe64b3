//! The infinite-width ReLU Gram pipeline: H matrix, smallest eigenvalue,
//! complexity term y' H^-1 y, and the theta-function lower bound on the
//! Rashomon ratio of a randomly initialized two-layer ReLU family.

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::linalg::{cholesky_factor, min_eigenvalue, solve_with_factor, Matrix};
use crate::special::{jacobi_theta3, log_gamma};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Below this smallest eigenvalue the Gram matrix is treated as violating
/// the positive-definiteness assumption.
pub const PD_THRESHOLD: f64 = 1e-10;

/// Gram entries for unit vectors:
/// `H_ij = x_i.x_j (pi - arccos(x_i.x_j)) / (2 pi)`.
///
/// Inner products are clamped to [-1, 1] before arccos to absorb roundoff;
/// the diagonal is exactly 1/2. Requires a row-normalized dataset.
pub fn gram_matrix(dataset: &LabeledDataset) -> Result<Matrix> {
    if !dataset.is_normalized() {
        return Err(Error::invalid(
            "gram_matrix requires a row-normalized dataset",
        ));
    }
    let n = dataset.n();
    let rows = dataset.features();
    let entries: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        0.5
                    } else {
                        let dot: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
                        let dot = dot.clamp(-1.0, 1.0);
                        dot * (PI - dot.acos()) / (2.0 * PI)
                    }
                })
                .collect()
        })
        .collect();
    let mut h = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] = entries[i][j];
        }
    }
    // symmetrize bitwise: entry (i, j) and (j, i) come from the same formula,
    // but make the invariant structural anyway
    for i in 0..n {
        for j in (i + 1)..n {
            let v = h[(i, j)];
            h[(j, i)] = v;
        }
    }
    Ok(h)
}

/// `y' H^-1 y` via a Cholesky solve, plus its square root (the dominant term
/// of the distance-to-Rashomon-set estimate).
///
/// Refuses (rather than regularizes) when the smallest eigenvalue is at or
/// below [`PD_THRESHOLD`].
pub fn complexity_term(h: &Matrix, y: &[f64]) -> Result<(f64, f64)> {
    let lambda0 = min_eigenvalue(h)?;
    complexity_term_given_lambda(h, y, lambda0)
}

fn complexity_term_given_lambda(h: &Matrix, y: &[f64], lambda0: f64) -> Result<(f64, f64)> {
    if y.len() != h.rows() {
        return Err(Error::DimensionMismatch {
            expected: h.rows(),
            got: y.len(),
        });
    }
    if lambda0 <= PD_THRESHOLD {
        return Err(Error::NotPositiveDefinite);
    }
    let factor = cholesky_factor(h)?;
    let z = solve_with_factor(&factor, y);
    let yhy: f64 = y.iter().zip(&z).map(|(a, b)| a * b).sum();
    if yhy < 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    Ok((yhy, yhy.sqrt()))
}

/// Everything the lower bound needs from a dataset.
///
/// `epsilon_dominant` is the dominant term of the distance-to-Rashomon-set
/// estimate; the remainder terms `O(n kappa / (lambda0 delta))` and
/// `poly(n, 1/lambda0, 1/delta) / (n^(1/4) kappa^(1/2))` carry unspecified
/// constants and are left unevaluated.
#[derive(Debug, Clone)]
pub struct GramStats {
    pub h: Matrix,
    pub lambda0: f64,
    pub y_h_inv_y: f64,
    pub epsilon_dominant: f64,
}

impl GramStats {
    /// Composes Gram construction, smallest eigenvalue, and the complexity
    /// solve. Fails when H is not positive-definite.
    pub fn compute(dataset: &LabeledDataset) -> Result<Self> {
        let h = gram_matrix(dataset)?;
        let lambda0 = min_eigenvalue(&h)?;
        let (y_h_inv_y, epsilon_dominant) =
            complexity_term_given_lambda(&h, dataset.labels(), lambda0)?;
        Ok(GramStats {
            h,
            lambda0,
            y_h_inv_y,
            epsilon_dominant,
        })
    }
}

/// Two-layer ReLU network `f(x) = (1/sqrt(m)) sum_r a_r max(0, w_r.x)` with
/// second-layer signs fixed at +-1.
#[derive(Debug, Clone)]
pub struct ReluNet {
    weights: Vec<Vec<f64>>,
    signs: Vec<f64>,
}

impl ReluNet {
    pub fn new(weights: Vec<Vec<f64>>, signs: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("network needs at least one hidden unit"));
        }
        if weights.len() != signs.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                got: signs.len(),
            });
        }
        let d = weights[0].len();
        if d == 0 || weights.iter().any(|w| w.len() != d) {
            return Err(Error::invalid(
                "weight rows must be non-empty and rectangular",
            ));
        }
        if signs.iter().any(|a| a.abs() != 1.0) {
            return Err(Error::invalid("second-layer weights must be +1 or -1"));
        }
        Ok(ReluNet { weights, signs })
    }

    pub fn width(&self) -> usize {
        self.weights.len()
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].len()
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }
}

/// Network output at `x`.
pub fn relu_eval(net: &ReluNet, x: &[f64]) -> Result<f64> {
    if x.len() != net.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: net.input_dim(),
            got: x.len(),
        });
    }
    let m = net.width() as f64;
    let sum: f64 = net
        .weights
        .iter()
        .zip(&net.signs)
        .map(|(w, a)| {
            let pre: f64 = w.iter().zip(x).map(|(wi, xi)| wi * xi).sum();
            a * pre.max(0.0)
        })
        .sum();
    Ok(sum / m.sqrt())
}

/// Inputs of the ratio lower bound.
///
/// `epsilon` is the distance-to-Rashomon-set estimate (its dominant term
/// `sqrt(y' H^-1 y)` in practice) and must exceed `gamma / 2`. `kappa` is
/// the initialization scale; values above 1 leave the regime the bound was
/// derived for and are flagged by [`BoundInputs::kappa_exceeds_unit`].
#[derive(Debug, Clone, Copy)]
pub struct BoundInputs {
    pub d: usize,
    pub m: usize,
    pub kappa: f64,
    pub delta: f64,
    pub gamma: f64,
    pub epsilon: f64,
}

impl BoundInputs {
    pub fn new(
        d: usize,
        m: usize,
        kappa: f64,
        delta: f64,
        gamma: f64,
        epsilon: f64,
    ) -> Result<Self> {
        if d == 0 || m == 0 {
            return Err(Error::invalid("d and m must be positive"));
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::invalid(format!(
                "kappa must be positive, got {kappa}"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::invalid(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        if !epsilon.is_finite() || epsilon <= gamma / 2.0 {
            return Err(Error::PreconditionViolated(format!(
                "requires epsilon > gamma/2, got epsilon = {epsilon}, gamma = {gamma}"
            )));
        }
        Ok(BoundInputs {
            d,
            m,
            kappa,
            delta,
            gamma,
            epsilon,
        })
    }

    pub fn kappa_exceeds_unit(&self) -> bool {
        self.kappa * self.kappa > 1.0
    }
}

/// Leading factor of the lower bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Prefactor {
    /// `1 - delta`.
    OneMinusDelta,
    /// `1 - 3 delta / 2`; smaller, hence the conservative default.
    /// Requires `delta < 2/3`.
    #[default]
    OneMinusThreeHalvesDelta,
}

/// A lower bound value along with its always-finite natural log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBound {
    pub log_value: f64,
    pub value: f64,
}

/// Lower bound on the empirical anchored Rashomon ratio of the width-m
/// ReLU family at level `gamma`:
///
/// ```text
/// pref * 2^(dm/2) / (kappa Gamma(dm/2 + 1)) * (gamma/2)^(dm/2)
///      * exp(-eps^2 / (2 kappa^2))
///      * [ (theta3(0, exp(-9 eps^2 / (2 kappa^2))) + 1) / 2 ]^(dm)
/// ```
///
/// Everything is accumulated in log space; `value` underflows to 0 harmlessly
/// while `log_value` stays finite.
pub fn rashomon_lower_bound(inputs: &BoundInputs, prefactor: Prefactor) -> Result<LowerBound> {
    let pref = match prefactor {
        Prefactor::OneMinusDelta => 1.0 - inputs.delta,
        Prefactor::OneMinusThreeHalvesDelta => {
            if inputs.delta >= 2.0 / 3.0 {
                return Err(Error::PreconditionViolated(format!(
                    "conservative prefactor requires delta < 2/3, got {}",
                    inputs.delta
                )));
            }
            1.0 - 1.5 * inputs.delta
        }
    };
    let dm = (inputs.d * inputs.m) as f64;
    let half_dm = 0.5 * dm;
    let decay = inputs.epsilon * inputs.epsilon / (2.0 * inputs.kappa * inputs.kappa);
    let theta = jacobi_theta3((-9.0 * decay).exp())?;
    let log_value =
        pref.ln() + half_dm * 2.0f64.ln() - inputs.kappa.ln() - log_gamma(half_dm + 1.0)
            + half_dm * (inputs.gamma / 2.0).ln()
            - decay
            + dm * (0.5 * (theta + 1.0)).ln();
    Ok(LowerBound {
        log_value,
        value: log_value.exp(),
    })
}

/// One sweep cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCell {
    pub kappa: f64,
    pub gamma: f64,
    pub log_value: f64,
    pub value: f64,
}

/// One lower-bound evaluation per `(kappa, gamma)` grid cell, kappa-major.
pub fn bound_sweep(
    epsilon: f64,
    d: usize,
    m: usize,
    delta: f64,
    gammas: &[f64],
    kappas: &[f64],
    prefactor: Prefactor,
) -> Result<Vec<BoundCell>> {
    if gammas.is_empty() || kappas.is_empty() {
        return Err(Error::invalid("gamma and kappa grids must be non-empty"));
    }
    let cells: Vec<(f64, f64)> = kappas
        .iter()
        .flat_map(|&k| gammas.iter().map(move |&g| (k, g)))
        .collect();
    cells
        .par_iter()
        .map(|&(kappa, gamma)| {
            let inputs = BoundInputs::new(d, m, kappa, delta, gamma, epsilon)?;
            let lb = rashomon_lower_bound(&inputs, prefactor)?;
            Ok(BoundCell {
                kappa,
                gamma,
                log_value: lb.log_value,
                value: lb.value,
            })
        })
        .collect()
}
