//! Finite-n slices `S_{A_n} = S^{n−1}(√n) ∩ {x : ⟨x, u^{(i)}_(n)⟩ = p_i}`.
//!
//! The slice is the sphere of radius `√(n − ‖θ*‖²)` centered at the
//! least-norm point `θ*` of the affine constraint set, inside the orthogonal
//! complement of the truncations. Sampling is a scaled and translated copy of
//! the uniform measure on the great-circle slice through the origin.

use serde::Serialize;
use thiserror::Error;

use crate::integrands::Integrand;
use crate::linalg::{self, dot, norm};
use crate::rng;
use crate::special;
use crate::stats::{self, Estimate};
use crate::vectors::{self, FiniteFrame, OrthonormalFamily};

/// Default ceiling on the ambient dimension.
pub const MAX_DIMENSION: usize = 1 << 20;
/// Truncations closer than this to each other's span are rejected.
pub const MIN_FRAME_SEPARATION: f64 = 1e-10;

const SLICE_STREAM: u64 = 0x736c_6963_65;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SliceError {
    #[error("invalid dimensions: {0}")]
    InvalidDimensions(String),
    #[error("p has {found} entries but the family has {expected} members")]
    PLengthMismatch { expected: usize, found: usize },
    #[error("truncated family is nearly dependent (separation {separation:e})")]
    DegenerateFrame { separation: f64 },
    #[error("slice is empty: |theta*|^2 = {center_norm_sq} >= n = {n}")]
    EmptySlice { center_norm_sq: f64, n: usize },
    #[error("truncation of member {index} is the zero vector")]
    ZeroTruncation { index: usize },
    #[error("integrand dimension {found} does not match k = {expected}")]
    IntegrandDimension { expected: usize, found: usize },
}

/// Family, constraint values, ambient dimension `n` and output dimension `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceSpec {
    pub family: OrthonormalFamily,
    pub p: Vec<f64>,
    pub k: usize,
    pub n: usize,
}

impl SliceSpec {
    pub fn new(family: OrthonormalFamily, p: Vec<f64>, k: usize, n: usize) -> Result<Self, SliceError> {
        let spec = SliceSpec { family, p, k, n };
        spec.validate()?;
        Ok(spec)
    }

    /// Same slice data at a different ambient dimension.
    pub fn with_n(&self, n: usize) -> Result<Self, SliceError> {
        SliceSpec::new(self.family.clone(), self.p.clone(), self.k, n)
    }

    pub fn gamma(&self) -> usize {
        self.family.gamma()
    }

    fn validate(&self) -> Result<(), SliceError> {
        if self.p.len() != self.gamma() {
            return Err(SliceError::PLengthMismatch {
                expected: self.gamma(),
                found: self.p.len(),
            });
        }
        if self.n <= self.gamma() {
            return Err(SliceError::InvalidDimensions(format!(
                "n = {} must exceed the family size {}",
                self.n,
                self.gamma()
            )));
        }
        if self.n > MAX_DIMENSION {
            return Err(SliceError::InvalidDimensions(format!(
                "n = {} exceeds the cap {MAX_DIMENSION}",
                self.n
            )));
        }
        if self.k == 0 || self.k > self.n {
            return Err(SliceError::InvalidDimensions(format!(
                "k = {} must lie in 1..={}",
                self.k, self.n
            )));
        }
        if self.p.iter().any(|v| !v.is_finite()) {
            return Err(SliceError::InvalidDimensions("p has non-finite entries".into()));
        }
        Ok(())
    }
}

/// Frame, centers and radius of one slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceGeometry {
    n: usize,
    k: usize,
    frame: FiniteFrame,
    center: Vec<f64>,
    q: Vec<f64>,
    radius: f64,
}

impl SliceGeometry {
    /// Geometry of `{x : ‖x‖² = n, ⟨x, c_i⟩ = p_i}` for explicit columns.
    pub fn from_constraints(columns: Vec<Vec<f64>>, p: &[f64], n: usize, k: usize) -> Result<Self, SliceError> {
        if columns.len() != p.len() {
            return Err(SliceError::PLengthMismatch {
                expected: columns.len(),
                found: p.len(),
            });
        }
        if columns.iter().any(|c| c.len() != n) {
            return Err(SliceError::InvalidDimensions(format!("constraint columns must have length {n}")));
        }
        let separation = vectors::separation(&columns);
        if !(separation >= MIN_FRAME_SEPARATION) {
            return Err(SliceError::DegenerateFrame { separation });
        }
        let frame = FiniteFrame::new(columns, n).map_err(|_| SliceError::DegenerateFrame { separation })?;

        // u_j = Σ_{i ≤ j} R_ij z_i, so ⟨Σ q_i z_i, u_j⟩ = Σ_{i ≤ j} q_i R_ij = p_j
        // is a forward substitution.
        let z = frame.basis();
        let u = frame.columns();
        let mut q = vec![0.0; p.len()];
        for j in 0..p.len() {
            let mut rhs = p[j];
            for i in 0..j {
                rhs -= q[i] * dot(&z[i], &u[j]);
            }
            q[j] = rhs / dot(&z[j], &u[j]);
        }
        let mut center = vec![0.0; n];
        for (qi, zi) in q.iter().zip(z) {
            linalg::axpy(*qi, zi, &mut center);
        }
        let center_norm_sq: f64 = q.iter().map(|v| v * v).sum();
        let radius_sq = n as f64 - center_norm_sq;
        if !(radius_sq > 0.0) {
            return Err(SliceError::EmptySlice { center_norm_sq, n });
        }
        Ok(SliceGeometry {
            n,
            k,
            frame,
            center,
            q,
            radius: radius_sq.sqrt(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn frame(&self) -> &FiniteFrame {
        &self.frame
    }

    /// The least-norm point `θ*` of the constraint set.
    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// Coordinates of `θ*` in the Gram–Schmidt frame.
    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// `radius / √n`.
    pub fn scale_ratio(&self) -> f64 {
        self.radius / (self.n as f64).sqrt()
    }

    /// Writes sample `index` of stream `seed` to `out` (length `n`).
    pub fn sample_into(&self, seed: u64, index: u64, out: &mut [f64]) {
        let mut r = rng::stream(rng::derive_seed(seed, SLICE_STREAM), index);
        loop {
            rng::fill_normal(&mut r, out);
            linalg::project_out(out, self.frame.basis());
            let len = norm(out);
            if len > 0.0 {
                let s = self.radius / len;
                for (x, c) in out.iter_mut().zip(&self.center) {
                    *x = c + s * *x;
                }
                return;
            }
        }
    }

    /// First `k` coordinates of sample `index`, using `scratch` (length `n`)
    /// for the Gaussian draw. Same stream as [`SliceGeometry::sample_into`].
    ///
    /// The norm of the projected draw is `‖g‖² − Σ⟨g, z_i⟩²`, which avoids a
    /// second full-length pass.
    pub fn sample_prefix(&self, seed: u64, index: u64, scratch: &mut [f64], out: &mut [f64]) {
        let k = out.len();
        let mut r = rng::stream(rng::derive_seed(seed, SLICE_STREAM), index);
        loop {
            rng::fill_normal(&mut r, scratch);
            let z = self.frame.basis();
            let coef: Vec<f64> = z.iter().map(|zi| dot(zi, scratch)).collect();
            let len_sq = dot(scratch, scratch) - coef.iter().map(|c| c * c).sum::<f64>();
            if len_sq > 0.0 {
                out.copy_from_slice(&scratch[..k]);
                for (c, zi) in coef.iter().zip(z) {
                    linalg::axpy(-c, &zi[..k], out);
                }
                let s = self.radius / len_sq.sqrt();
                for (x, c) in out.iter_mut().zip(&self.center) {
                    *x = c + s * *x;
                }
                return;
            }
        }
    }
}

pub fn build_geometry(spec: &SliceSpec) -> Result<SliceGeometry, SliceError> {
    spec.validate()?;
    SliceGeometry::from_constraints(spec.family.truncations(spec.n), &spec.p, spec.n, spec.k)
}

/// `θ_n = Σ_i (p_i / ‖u^{(i)}_(n)‖²) u^{(i)}_(n)`.
pub fn approximate_center(spec: &SliceSpec) -> Result<Vec<f64>, SliceError> {
    let mut theta = vec![0.0; spec.n];
    for (index, (u, pi)) in spec.family.truncations(spec.n).iter().zip(&spec.p).enumerate() {
        let len_sq = dot(u, u);
        if len_sq == 0.0 {
            return Err(SliceError::ZeroTruncation { index });
        }
        linalg::axpy(pi / len_sq, u, &mut theta);
    }
    Ok(theta)
}

/// `count` uniform points on the slice.
pub fn sample_slice(geometry: &SliceGeometry, count: usize, seed: u64) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| {
            let mut x = vec![0.0; geometry.n];
            geometry.sample_into(seed, i as u64, &mut x);
            x
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereArea {
    pub value: f64,
    pub ln_value: f64,
}

/// Surface area `c_d a^d` of `S^d(a)` ⊂ ℝ^{d+1}.
pub fn sphere_surface_area(d: u64, a: f64) -> SphereArea {
    let ln_value = special::ln_unit_sphere_area(d) + d as f64 * a.ln();
    SphereArea {
        value: ln_value.exp(),
        ln_value,
    }
}

/// Monte Carlo estimate of the normalized slice integral of `f ∘ π_(k)`.
pub fn slice_integral_mc(spec: &SliceSpec, f: &Integrand, count: usize, seed: u64) -> Result<Estimate, SliceError> {
    let geometry = build_geometry(spec)?;
    integrate_geometry(&geometry, f, count, seed)
}

/// Same as [`slice_integral_mc`] for an already built geometry.
pub fn integrate_geometry(geometry: &SliceGeometry, f: &Integrand, count: usize, seed: u64) -> Result<Estimate, SliceError> {
    if f.k() != geometry.k {
        return Err(SliceError::IntegrandDimension {
            expected: geometry.k,
            found: f.k(),
        });
    }
    let k = geometry.k;
    let n = geometry.n;
    Ok(stats::chunked(
        count,
        |range| {
            let mut scratch = vec![0.0; n];
            let mut x = vec![0.0; k];
            let mut acc = stats::Accumulator::default();
            for i in range {
                geometry.sample_prefix(seed, i as u64, &mut scratch, &mut x);
                acc.push(f.eval_prefix(&x));
            }
            acc
        },
        stats::Accumulator::merge,
    )
    .unwrap_or_default()
    .estimate())
}
