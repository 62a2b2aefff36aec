//! Possibly rank-deficient Gaussian measures on ℝ^k.
//!
//! The limiting measure of the slice integrals has mean `Σ p_i u^{(i)}_(k)`
//! and covariance `I_k − Σ ‖u^{(i)}_(k)‖² P_{u^{(i)}_(k)}`, which loses rank
//! exactly when some truncation `u^{(i)}_(k)` already has unit norm.

use std::sync::OnceLock;

use gauss_quad::hermite::GaussHermite;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::integrands::{ExpQuadTerm, Integrand};
use crate::linalg::dot;
use crate::rng;
use crate::stats::{self, Estimate};
use crate::vectors::OrthonormalFamily;

/// Eigenvalues at or below this count as degenerate directions.
pub const RANK_TOL: f64 = 1e-10;
/// Most negative eigenvalue still accepted (then clipped to zero).
pub const PSD_TOL: f64 = 1e-10;
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Gauss–Hermite nodes per support dimension.
pub const HERMITE_ORDER: usize = 64;
pub const MAX_QUADRATURE_RANK: usize = 3;

const SAMPLE_STREAM: u64 = 0x6761_7573;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaussianError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("covariance is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("covariance is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("p has {found} entries but the family has {expected} members")]
    PLengthMismatch { expected: usize, found: usize },
    #[error("integrand has no closed-form Gaussian expectation")]
    UnsupportedClosedForm,
    #[error("quadrature supports rank <= {MAX_QUADRATURE_RANK}, got rank {0}")]
    RankTooHighForQuadrature(usize),
}

/// Mean, PSD covariance and its eigendecomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSpec {
    mean: Vec<f64>,
    covariance: DMatrix<f64>,
    /// Descending, clipped at zero.
    eigenvalues: Vec<f64>,
    /// Orthonormal, matching `eigenvalues`.
    eigenvectors: Vec<Vec<f64>>,
    rank: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExpectationMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo { count: usize, seed: u64 },
}

impl GaussianSpec {
    pub fn new(mean: Vec<f64>, covariance: DMatrix<f64>) -> Result<Self, GaussianError> {
        let k = mean.len();
        if covariance.nrows() != k || covariance.ncols() != k {
            return Err(GaussianError::DimensionMismatch {
                expected: k,
                found: covariance.nrows(),
            });
        }
        let asym = crate::linalg::max_abs_diff(&covariance, &covariance.transpose());
        let scale = covariance.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if asym > SYMMETRY_TOL * scale {
            return Err(GaussianError::NotSymmetric(asym));
        }
        let eig = covariance.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        if let Some(&last) = order.last() {
            let min = eig.eigenvalues[last];
            if min < -PSD_TOL {
                return Err(GaussianError::NotPsd(min));
            }
        }
        let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
        let eigenvectors = order
            .iter()
            .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
            .collect();
        let rank = eigenvalues.iter().filter(|&&l| l > RANK_TOL).count();
        Ok(GaussianSpec {
            mean,
            covariance,
            eigenvalues,
            eigenvectors,
            rank,
        })
    }

    pub fn k(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &[Vec<f64>] {
        &self.eigenvectors
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.covariance.clone().symmetric_eigenvalues().min()
    }

    /// `‖L − V Λ Vᵀ‖_max` for the clipped decomposition.
    pub fn reconstruction_error(&self) -> f64 {
        let k = self.k();
        let rebuilt = DMatrix::from_fn(k, k, |r, c| {
            self.eigenvalues
                .iter()
                .zip(&self.eigenvectors)
                .map(|(l, v)| l * v[r] * v[c])
                .sum()
        });
        crate::linalg::max_abs_diff(&rebuilt, &self.covariance)
    }

    /// Columns `√λ_i v_i` spanning the support directions.
    fn support_factor(&self) -> Vec<Vec<f64>> {
        self.eigenvalues[..self.rank]
            .iter()
            .zip(&self.eigenvectors)
            .map(|(l, v)| v.iter().map(|x| x * l.sqrt()).collect())
            .collect()
    }

    /// Sample `index` of the stream `seed`, written to `out`.
    pub fn sample_into(&self, seed: u64, index: u64, out: &mut [f64]) {
        let mut r = rng::stream(rng::derive_seed(seed, SAMPLE_STREAM), index);
        out.copy_from_slice(&self.mean);
        let mut xi = vec![0.0; self.rank];
        rng::fill_normal(&mut r, &mut xi);
        for ((l, v), z) in self.eigenvalues.iter().zip(&self.eigenvectors).zip(&xi) {
            crate::linalg::axpy(l.sqrt() * z, v, out);
        }
    }
}

/// Mean `Σ p_i u^{(i)}_(k)` and covariance `I_k − Σ_i u^{(i)}_(k) u^{(i)ᵀ}_(k)`.
///
/// `‖u_(k)‖² P_{u_(k)} = u_(k) u_(k)ᵀ`, which is also the zero matrix for a
/// zero truncation.
pub fn covariance_from_family(
    family: &OrthonormalFamily,
    k: usize,
    p: &[f64],
) -> Result<GaussianSpec, GaussianError> {
    if p.len() != family.gamma() {
        return Err(GaussianError::PLengthMismatch {
            expected: family.gamma(),
            found: p.len(),
        });
    }
    let truncs = family.truncations(k);
    let mut mean = vec![0.0; k];
    for (u, pi) in truncs.iter().zip(p) {
        crate::linalg::axpy(*pi, u, &mut mean);
    }
    Ok(GaussianSpec::new(mean, projection_complement(&truncs, k))?)
}

/// `I_k − Σ v vᵀ` over `vectors` (each of length `k`).
pub fn projection_complement(vectors: &[Vec<f64>], k: usize) -> DMatrix<f64> {
    DMatrix::from_fn(k, k, |r, c| {
        let id = if r == c { 1.0 } else { 0.0 };
        id - vectors.iter().map(|v| v[r] * v[c]).sum::<f64>()
    })
}

/// Top-left `k×k` block: the covariance of the first `k` coordinates.
pub fn marginal_covariance(sigma: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    assert!(
        k <= sigma.nrows() && k <= sigma.ncols(),
        "marginal dimension {k} exceeds matrix size"
    );
    sigma.view((0, 0), (k, k)).into_owned()
}

/// `count` draws of `x = η + Σ_{i ≤ rank} √λ_i ξ_i v_i`.
pub fn gaussian_sample(spec: &GaussianSpec, count: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| {
            let mut x = vec![0.0; spec.k()];
            spec.sample_into(seed, i as u64, &mut x);
            x
        })
        .collect()
}

/// `∫ f dN(η, L)`.
pub fn gaussian_expectation(
    spec: &GaussianSpec,
    f: &Integrand,
    method: ExpectationMethod,
) -> Result<Estimate, GaussianError> {
    if f.k() != spec.k() {
        return Err(GaussianError::DimensionMismatch {
            expected: spec.k(),
            found: f.k(),
        });
    }
    match method {
        ExpectationMethod::ClosedForm => closed_form(spec, f).map(Estimate::exact),
        ExpectationMethod::Quadrature => hermite(spec, f).map(Estimate::exact),
        ExpectationMethod::MonteCarlo { count, seed } => Ok(stats::mc_mean(count, |i| {
            let mut x = vec![0.0; spec.k()];
            spec.sample_into(seed, i as u64, &mut x);
            f.eval_prefix(&x)
        })),
    }
}

fn closed_form(spec: &GaussianSpec, f: &Integrand) -> Result<f64, GaussianError> {
    let terms = f
        .exp_quadratic_terms()
        .ok_or(GaussianError::UnsupportedClosedForm)?;
    let factor = spec.support_factor();
    Ok(terms
        .iter()
        .map(|t| term_expectation(t, &spec.mean, &factor))
        .sum())
}

/// `Re E[w · exp(−xᵀQx + βᵀx + c)]` for `x = η + S ξ`, `ξ ~ N(0, I_r)`:
/// `E[exp(−ξᵀMξ + gᵀξ)] = det(I + 2M)^{−1/2} exp(gᵀ(I + 2M)^{−1}g / 2)`
/// with `M = SᵀQS`, `g = Sᵀ(β − 2Qη)`.
fn term_expectation(t: &ExpQuadTerm, mean: &[f64], factor: &[Vec<f64>]) -> f64 {
    if t.weight == 0.0 {
        return 0.0;
    }
    let k = mean.len();
    let q = DMatrix::from_row_slice(k, k, &t.quad);
    let eta = DVector::from_column_slice(mean);
    let q_eta = &q * &eta;
    let mut re = -eta.dot(&q_eta) + dot(&t.lin_re, mean) + t.const_re;
    let mut im = dot(&t.lin_im, mean) + t.const_im;

    let r = factor.len();
    if r > 0 {
        let s = DMatrix::from_fn(k, r, |row, col| factor[col][row]);
        let m = s.transpose() * &q * &s;
        let a = DMatrix::identity(r, r) + m * 2.0;
        let shifted: Vec<f64> = t.lin_re.iter().zip(q_eta.iter()).map(|(b, qe)| b - 2.0 * qe).collect();
        let g_re = s.transpose() * DVector::from_column_slice(&shifted);
        let g_im = s.transpose() * DVector::from_column_slice(&t.lin_im);
        let chol = a.cholesky().expect("I + 2SᵀQS is positive definite");
        let ln_det: f64 = chol.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
        let y_re = chol.solve(&g_re);
        let y_im = chol.solve(&g_im);
        re += -0.5 * ln_det + 0.5 * (g_re.dot(&y_re) - g_im.dot(&y_im));
        im += g_re.dot(&y_im);
    }
    t.weight * re.exp() * im.cos()
}

fn hermite_rule() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let rule = GaussHermite::new(HERMITE_ORDER.try_into().expect("nonzero order"));
        // physicists' rule → standard normal: x = √2 t, w / √π
        rule.as_node_weight_pairs()
            .iter()
            .map(|&(t, w)| (t * std::f64::consts::SQRT_2, w / std::f64::consts::PI.sqrt()))
            .collect()
    })
}

/// Tensor Gauss–Hermite over the support directions of `spec`.
fn hermite(spec: &GaussianSpec, f: &Integrand) -> Result<f64, GaussianError> {
    let r = spec.rank;
    if r > MAX_QUADRATURE_RANK {
        return Err(GaussianError::RankTooHighForQuadrature(r));
    }
    let factor = spec.support_factor();
    let rule = hermite_rule();
    let nodes = rule.len();
    let total = nodes.pow(r as u32);
    let mut x = vec![0.0; spec.k()];
    let mut sum = 0.0;
    for flat in 0..total {
        x.copy_from_slice(&spec.mean);
        let mut weight = 1.0;
        let mut rest = flat;
        for col in &factor {
            let (node, w) = rule[rest % nodes];
            rest /= nodes;
            weight *= w;
            crate::linalg::axpy(node, col, &mut x);
        }
        sum += weight * f.eval_prefix(&x);
    }
    Ok(sum)
}
