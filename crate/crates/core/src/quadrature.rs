//! Deterministic sphere and great-circle slice integrals.
//!
//! Both integrals are over a ball in polar coordinates, with the radius
//! written as `R sin φ`. For the sphere this cancels the `a / a_x` boundary
//! singularity; for the slice kernel `(1 − ρ²/n)^{(n−k−2)/2}` it turns the
//! weight into `cos^{n−k−1} φ`, which is smooth for every `n > k`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::Serialize;
use thiserror::Error;

use crate::integrands::Integrand;
use crate::linalg::{self, norm};
use crate::special;
use crate::vectors::OrthonormalFamily;

/// Largest ball dimension handled by tensor quadrature.
pub const MAX_BALL_DIMENSION: usize = 3;
const START_ORDER: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("quadrature did not converge: estimate {estimate}, last refinement changed it by {difference:e}")]
    QuadratureNonConvergent { estimate: f64, difference: f64 },
    #[error("ball dimension {0} exceeds the tensor quadrature limit {MAX_BALL_DIMENSION}")]
    DimensionTooHigh(usize),
    #[error("family member {member} is not supported in the first {k} coordinates")]
    UnsupportedFamily { member: usize, k: usize },
    #[error("integrand dimension {found} does not match k = {expected}")]
    IntegrandDimension { expected: usize, found: usize },
}

/// `a_{n,k}` and `b_{n,k}` together with their logarithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DisintegrationCoefficients {
    pub n: usize,
    pub k: usize,
    pub gamma: usize,
    pub a_nk: f64,
    pub b_nk: f64,
    pub ln_a: f64,
    pub ln_b: f64,
}

/// `a_{n,k} = Γ((n−γ)/2) / (Γ((n−k)/2) ((n−k)/2)^{(k−γ)/2})`,
/// `b_{n,k} = (1 − k/n)^{(k−γ)/2}`.
pub fn disintegration_coefficients(n: usize, k: usize, gamma: usize) -> Result<DisintegrationCoefficients, QuadratureError> {
    if !(n > k && k >= gamma) {
        return Err(QuadratureError::InvalidDimensions(format!(
            "need n > k >= gamma, got n = {n}, k = {k}, gamma = {gamma}"
        )));
    }
    let h = (k - gamma) as f64 / 2.0;
    let x = (n - k) as f64 / 2.0;
    let ln_a = special::ln_gamma_ratio_scaled(x, h);
    let ln_b = h * (-(k as f64) / n as f64).ln_1p();
    Ok(DisintegrationCoefficients {
        n,
        k,
        gamma,
        a_nk: ln_a.exp(),
        b_nk: ln_b.exp(),
        ln_a,
        ln_b,
    })
}

fn legendre(order: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(order).expect("positive order"));
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    rule.as_node_weight_pairs()
        .iter()
        .map(|&(t, w)| (mid + half * t, half * w))
        .collect()
}

/// Directions on `S^{d−1}` with weights summing to its area.
fn sphere_rule(d: usize, order: usize) -> Vec<(Vec<f64>, f64)> {
    match d {
        1 => vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)],
        2 => legendre(order, 0.0, 2.0 * PI)
            .into_iter()
            .map(|(t, w)| (vec![t.cos(), t.sin()], w))
            .collect(),
        3 => {
            let polar = legendre(order, 0.0, PI);
            let azimuth = legendre(order, 0.0, 2.0 * PI);
            let mut out = Vec::with_capacity(order * order);
            for &(psi, wp) in &polar {
                for &(t, wt) in &azimuth {
                    let s = psi.sin();
                    out.push((vec![s * t.cos(), s * t.sin(), psi.cos()], wp * wt * s));
                }
            }
            out
        }
        _ => unreachable!("sphere rule dimension {d}"),
    }
}

fn max_order(d: usize) -> usize {
    match d {
        1 => 2048,
        2 => 512,
        _ => 128,
    }
}

/// `∫_{pieces} J(φ) Σ_ω w_ω h(R sin φ · ω) dφ` with `order` nodes per piece
/// and per angular direction.
fn polar_rule<J, H>(d: usize, radius: f64, pieces: &[(f64, f64)], order: usize, jacobian: &J, h: &mut H) -> f64
where
    J: Fn(f64) -> f64,
    H: FnMut(&[f64]) -> f64,
{
    let dirs = sphere_rule(d, order);
    let mut x = vec![0.0; d];
    let mut total = 0.0;
    for &(lo, hi) in pieces {
        for (phi, w) in legendre(order, lo, hi) {
            let rho = radius * phi.sin();
            let mut shell = 0.0;
            for (omega, wo) in &dirs {
                for (xi, oi) in x.iter_mut().zip(omega) {
                    *xi = rho * oi;
                }
                shell += wo * h(&x);
            }
            total += w * jacobian(phi) * shell;
        }
    }
    total
}

/// Doubles the order until two successive estimates agree to
/// `tol · max(1, |estimate|)`.
fn refine<F>(d: usize, mut estimate_at: F, tol: f64) -> Result<f64, QuadratureError>
where
    F: FnMut(usize) -> f64,
{
    let mut order = START_ORDER;
    let mut previous = estimate_at(order);
    let mut difference = f64::INFINITY;
    while order * 2 <= max_order(d) {
        order *= 2;
        let current = estimate_at(order);
        difference = (current - previous).abs();
        if difference <= tol * current.abs().max(1.0) {
            return Ok(current);
        }
        previous = current;
    }
    Err(QuadratureError::QuadratureNonConvergent {
        estimate: previous,
        difference,
    })
}

/// `∫_{B_k(a)} inner(x) · a / √(a² − ‖x‖²) dx`, the sphere integral over
/// `S^{N−1}(a)` when `inner(x)` is the integral over the fiber sphere of
/// radius `√(a² − ‖x‖²)`.
pub fn disintegrate_sphere_integral<F>(big_n: usize, k: usize, a: f64, mut inner: F, tol: f64) -> Result<f64, QuadratureError>
where
    F: FnMut(&[f64]) -> f64,
{
    if !(big_n > k && k >= 1) {
        return Err(QuadratureError::InvalidDimensions(format!(
            "need N > k >= 1, got N = {big_n}, k = {k}"
        )));
    }
    if k > MAX_BALL_DIMENSION {
        return Err(QuadratureError::DimensionTooHigh(k));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(QuadratureError::InvalidDimensions(format!("radius {a} must be positive")));
    }
    // ρ = a sin φ: dρ · a / a_x = a dφ, and dx = ρ^{k−1} dρ dω
    let jacobian = |phi: f64| a * (a * phi.sin()).powi(k as i32 - 1);
    refine(k, |order| polar_rule(k, a, &[(0.0, FRAC_PI_2)], order, &jacobian, &mut inner), tol)
}

/// Normalized integral of `f ∘ π_(k)` over the great-circle slice
/// `S^{n−1}(√n) ∩ {x : ⟨x, u^{(i)}⟩ = 0}` for a family supported in the first
/// `k` coordinates, reduced to a `(k − γ)`-ball with the kernel
/// `(1 − ‖y‖²/n)^{(n−k−2)/2}`.
pub fn great_circle_integral_quadrature(
    n: usize,
    family: &OrthonormalFamily,
    f: &Integrand,
    tol: f64,
) -> Result<f64, QuadratureError> {
    let k = f.k();
    let gamma = family.gamma();
    for (member, u) in family.members().iter().enumerate() {
        match u.support_len() {
            Some(s) if s <= k => {}
            _ => return Err(QuadratureError::UnsupportedFamily { member, k }),
        }
    }
    let coef = disintegration_coefficients(n, k, gamma)?;
    let d = k - gamma;
    if d > MAX_BALL_DIMENSION {
        return Err(QuadratureError::DimensionTooHigh(d));
    }
    if d == 0 {
        return Ok(f.eval_prefix(&vec![0.0; k]));
    }
    let complement = complement_basis(&family.truncations(k), k);
    let c = (coef.ln_a + coef.ln_b - 0.5 * d as f64 * (2.0 * PI).ln()).exp();

    let root_n = (n as f64).sqrt();
    // the kernel is below e^{−64} past ρ = 16
    let split = (16.0 / root_n).min(1.0).asin();
    let mut pieces = vec![(0.0, split)];
    if split < FRAC_PI_2 {
        pieces.push((split, FRAC_PI_2));
    }
    let power = (n - k - 1) as f64;
    let jacobian = |phi: f64| {
        let kernel = if power == 0.0 { 1.0 } else { (power * phi.cos().ln()).exp() };
        root_n * (root_n * phi.sin()).powi(d as i32 - 1) * kernel
    };
    let mut x = vec![0.0; k];
    let mut g = |y: &[f64]| {
        x.iter_mut().for_each(|v| *v = 0.0);
        for (yi, z) in y.iter().zip(&complement) {
            linalg::axpy(*yi, z, &mut x);
        }
        f.eval_prefix(&x)
    };
    let integral = refine(d, |order| polar_rule(d, root_n, &pieces, order, &jacobian, &mut g), tol)?;
    Ok(c * integral)
}

/// Orthonormal basis of the complement of `span(vectors)` in ℝ^k, picking at
/// each step the coordinate axis with the largest residual.
fn complement_basis(vectors: &[Vec<f64>], k: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = vectors.to_vec();
    let mut out = Vec::new();
    while basis.len() < k {
        let best = (0..k)
            .map(|j| {
                let mut e = vec![0.0; k];
                e[j] = 1.0;
                linalg::project_out(&mut e, &basis);
                e
            })
            .max_by(|a, b| norm(a).total_cmp(&norm(b)))
            .expect("k >= 1");
        let mut w = best;
        let len = norm(&w);
        linalg::scale(1.0 / len, &mut w);
        basis.push(w.clone());
        out.push(w);
    }
    out
}
