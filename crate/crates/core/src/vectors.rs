//! Square-summable sequences, their truncations, and finite families of them.
//!
//! A [`SequenceVector`] is either finitely supported or carries a geometric
//! tail `x_j = scale · ratio^j` (1-based `j`) past an explicit prefix. Norms
//! and inner products are summed in closed form, so orthonormality of a
//! family can be checked exactly in ℓ² and not just on some truncation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, dot, norm};

/// Default tolerance for `|⟨u_i, u_j⟩ − δ_ij|`.
pub const DEFAULT_ORTHONORMAL_TOL: f64 = 1e-8;

/// Relative singular-value floor below which a family counts as dependent.
pub const INDEPENDENCE_RTOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VectorError {
    #[error("geometric tail ratio {0} must satisfy |ratio| < 1")]
    InvalidTail(f64),
    #[error("non-finite coordinate in sequence vector")]
    NonFinite,
    #[error("degenerate family: smallest singular value {smallest:e} below {rtol:e} x largest {largest:e}")]
    DegenerateFamily {
        smallest: f64,
        largest: f64,
        rtol: f64,
    },
    #[error("family is not orthonormal: |<u{i}, u{j}> - delta| = {deviation:e} exceeds {tolerance:e}")]
    InvalidFamily {
        i: usize,
        j: usize,
        deviation: f64,
        tolerance: f64,
    },
    #[error("no truncation length up to {m_max} reaches separation {tau}")]
    NotFound { tau: f64, m_max: usize },
    #[error("vectors have mismatched lengths")]
    DimensionMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricTail {
    pub scale: f64,
    pub ratio: f64,
}

/// JSON form of a [`SequenceVector`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VectorDescriptor {
    Explicit {
        coords: Vec<f64>,
    },
    Geometric {
        #[serde(default)]
        prefix: Vec<f64>,
        scale: f64,
        ratio: f64,
    },
}

impl TryFrom<VectorDescriptor> for SequenceVector {
    type Error = VectorError;

    fn try_from(d: VectorDescriptor) -> Result<Self, VectorError> {
        match d {
            VectorDescriptor::Explicit { coords } => SequenceVector::explicit(coords),
            VectorDescriptor::Geometric { prefix, scale, ratio } => SequenceVector::geometric(prefix, scale, ratio),
        }
    }
}

impl From<SequenceVector> for VectorDescriptor {
    fn from(v: SequenceVector) -> Self {
        match v.tail {
            None => VectorDescriptor::Explicit { coords: v.prefix },
            Some(t) => VectorDescriptor::Geometric {
                prefix: v.prefix,
                scale: t.scale,
                ratio: t.ratio,
            },
        }
    }
}

/// An element of ℓ²(ℝ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VectorDescriptor", into = "VectorDescriptor")]
pub struct SequenceVector {
    prefix: Vec<f64>,
    tail: Option<GeometricTail>,
    norm_sq: f64,
}

/// First `n` coordinates of a sequence together with the norm of the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    pub coords: Vec<f64>,
    pub tail_norm: f64,
}

impl SequenceVector {
    pub fn explicit(coords: Vec<f64>) -> Result<Self, VectorError> {
        Self::build(coords, None)
    }

    pub fn geometric(prefix: Vec<f64>, scale: f64, ratio: f64) -> Result<Self, VectorError> {
        if !(ratio.abs() < 1.0) {
            return Err(VectorError::InvalidTail(ratio));
        }
        if !scale.is_finite() {
            return Err(VectorError::NonFinite);
        }
        Self::build(prefix, Some(GeometricTail { scale, ratio }))
    }

    /// Standard basis vector `e_{index+1}` (0-based `index`).
    pub fn basis(index: usize) -> Self {
        let mut coords = vec![0.0; index + 1];
        coords[index] = 1.0;
        Self::explicit(coords).expect("basis vector is finite")
    }

    fn build(prefix: Vec<f64>, tail: Option<GeometricTail>) -> Result<Self, VectorError> {
        if prefix.iter().any(|x| !x.is_finite()) {
            return Err(VectorError::NonFinite);
        }
        let mut v = SequenceVector {
            prefix,
            tail,
            norm_sq: 0.0,
        };
        v.norm_sq = v.recompute_norm_sq();
        Ok(v)
    }

    pub fn prefix(&self) -> &[f64] {
        &self.prefix
    }

    pub fn tail(&self) -> Option<GeometricTail> {
        self.tail
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq.sqrt()
    }

    /// Closed-form squared norm, independent of the cached value.
    pub fn recompute_norm_sq(&self) -> f64 {
        self.prefix.iter().map(|x| x * x).sum::<f64>() + self.geometric_tail_sq(self.prefix.len())
    }

    /// `Σ_{j > from} (scale · ratio^j)²` (1-based `j`); zero without a tail.
    fn geometric_tail_sq(&self, from: usize) -> f64 {
        match self.tail {
            Some(GeometricTail { scale, ratio }) if scale != 0.0 => {
                let r2 = ratio * ratio;
                scale * scale * r2.powi((from + 1) as i32) / (1.0 - r2)
            }
            _ => 0.0,
        }
    }

    /// Coordinate `x_{index+1}` (0-based `index`).
    pub fn coord(&self, index: usize) -> f64 {
        if index < self.prefix.len() {
            return self.prefix[index];
        }
        match self.tail {
            Some(GeometricTail { scale, ratio }) => scale * ratio.powi((index + 1) as i32),
            None => 0.0,
        }
    }

    /// Length of the support when it is finite: one past the last nonzero
    /// coordinate. `None` for a nonzero geometric tail.
    pub fn support_len(&self) -> Option<usize> {
        match self.tail {
            Some(t) if t.scale != 0.0 && t.ratio != 0.0 => None,
            // ratio == 0 puts nothing past the prefix (j >= 1)
            _ => Some(
                self.prefix
                    .iter()
                    .rposition(|&x| x != 0.0)
                    .map_or(0, |i| i + 1),
            ),
        }
    }

    /// The first `n` coordinates.
    pub fn coords(&self, n: usize) -> Vec<f64> {
        let m = self.prefix.len();
        let mut out = Vec::with_capacity(n);
        out.extend_from_slice(&self.prefix[..n.min(m)]);
        if n > m {
            match self.tail {
                Some(GeometricTail { scale, ratio }) => {
                    let mut value = scale * ratio.powi((m + 1) as i32);
                    for _ in m..n {
                        out.push(value);
                        value *= ratio;
                    }
                }
                None => out.resize(n, 0.0),
            }
        }
        out
    }

    /// `x_(n)` and `‖x − x_(n)‖` in closed form.
    pub fn truncate(&self, n: usize) -> Truncation {
        let m = self.prefix.len();
        let tail_sq = if n >= m {
            self.geometric_tail_sq(n)
        } else {
            self.prefix[n..].iter().map(|x| x * x).sum::<f64>() + self.geometric_tail_sq(m)
        };
        Truncation {
            coords: self.coords(n),
            tail_norm: tail_sq.sqrt(),
        }
    }

    /// Exact ℓ² inner product.
    pub fn inner(&self, other: &SequenceVector) -> f64 {
        let split = self.prefix.len().max(other.prefix.len());
        let head = dot(&self.coords(split), &other.coords(split));
        let tail = match (self.tail, other.tail) {
            (Some(a), Some(b)) => {
                let rr = a.ratio * b.ratio;
                a.scale * b.scale * rr.powi((split + 1) as i32) / (1.0 - rr)
            }
            _ => 0.0,
        };
        head + tail
    }
}

/// γ mutually orthonormal sequences, validated with exact ℓ² inner products.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalFamily {
    members: Vec<SequenceVector>,
    tolerance: f64,
}

impl OrthonormalFamily {
    pub fn new(members: Vec<SequenceVector>) -> Result<Self, VectorError> {
        Self::with_tolerance(members, DEFAULT_ORTHONORMAL_TOL)
    }

    pub fn with_tolerance(members: Vec<SequenceVector>, tolerance: f64) -> Result<Self, VectorError> {
        for i in 0..members.len() {
            for j in i..members.len() {
                let target = if i == j { 1.0 } else { 0.0 };
                let deviation = (members[i].inner(&members[j]) - target).abs();
                if !(deviation <= tolerance) {
                    return Err(VectorError::InvalidFamily {
                        i,
                        j,
                        deviation,
                        tolerance,
                    });
                }
            }
        }
        Ok(OrthonormalFamily { members, tolerance })
    }

    pub fn empty() -> Self {
        OrthonormalFamily {
            members: Vec::new(),
            tolerance: DEFAULT_ORTHONORMAL_TOL,
        }
    }

    pub fn members(&self) -> &[SequenceVector] {
        &self.members
    }

    pub fn gamma(&self) -> usize {
        self.members.len()
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// The truncations `u^{(i)}_(n)`.
    pub fn truncations(&self, n: usize) -> Vec<Vec<f64>> {
        self.members.iter().map(|u| u.coords(n)).collect()
    }
}

/// Truncated columns plus an orthonormal basis of their span.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteFrame {
    dimension: usize,
    columns: Vec<Vec<f64>>,
    basis: Vec<Vec<f64>>,
}

impl FiniteFrame {
    pub fn new(columns: Vec<Vec<f64>>, dimension: usize) -> Result<Self, VectorError> {
        if columns.iter().any(|c| c.len() != dimension) {
            return Err(VectorError::DimensionMismatch);
        }
        let basis = gram_schmidt(&columns)?;
        Ok(FiniteFrame {
            dimension,
            columns,
            basis,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Largest `‖c − Σ_j ⟨c, z_j⟩ z_j‖ / ‖c‖` over the columns.
    pub fn span_residual(&self) -> f64 {
        span_residual(&self.columns, &self.basis)
    }
}

fn span_residual(columns: &[Vec<f64>], basis: &[Vec<f64>]) -> f64 {
    columns
        .iter()
        .map(|c| {
            let mut r = c.clone();
            for z in basis {
                linalg::axpy(-dot(c, z), z, &mut r);
            }
            let scale = norm(c);
            if scale > 0.0 {
                norm(&r) / scale
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
}

fn check_lengths(vectors: &[Vec<f64>]) -> Result<usize, VectorError> {
    let len = vectors.first().map_or(0, Vec::len);
    if vectors.iter().any(|v| v.len() != len) {
        return Err(VectorError::DimensionMismatch);
    }
    Ok(len)
}

/// Orthonormalizes `vectors` in order, so that the first `i` outputs span the
/// same space as the first `i` inputs.
///
/// Uses modified Gram–Schmidt with one round of re-orthogonalization; the
/// output agrees with the classical recursion up to rounding.
pub fn gram_schmidt(vectors: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, VectorError> {
    check_lengths(vectors)?;
    if vectors.is_empty() {
        return Ok(Vec::new());
    }
    let sv = linalg::singular_values(vectors);
    let largest = sv[0];
    let smallest = *sv.last().unwrap();
    if !(largest > 0.0) || smallest < INDEPENDENCE_RTOL * largest {
        return Err(VectorError::DegenerateFamily {
            smallest,
            largest,
            rtol: INDEPENDENCE_RTOL,
        });
    }
    Ok(gram_schmidt_unchecked(vectors))
}

/// Gram–Schmidt without the independence check. Dependent inputs produce
/// garbage (or NaN for exact zeros); only the perturbation study's negative
/// control calls this directly.
pub fn gram_schmidt_unchecked(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        linalg::project_out(&mut w, &basis);
        let len = norm(&w);
        linalg::scale(1.0 / len, &mut w);
        basis.push(w);
    }
    basis
}

/// Distance from `v` to the span of `others`, by least squares on the
/// left singular vectors of the column matrix of `others`.
pub fn distance_to_span(v: &[f64], others: &[Vec<f64>]) -> f64 {
    if others.is_empty() {
        return norm(v);
    }
    let rows = v.len();
    let a = linalg::column_matrix(others, rows);
    let svd = a.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().fold(0.0f64, |m, &s| m.max(s));
    let cutoff = smax * f64::EPSILON * rows.max(others.len()) as f64;
    let range: Vec<Vec<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > cutoff)
        .map(|(j, _)| u.column(j).iter().copied().collect())
        .collect();
    let mut r = v.to_vec();
    linalg::project_out(&mut r, &range);
    norm(&r)
}

/// Smallest distance from a member to the span of the remaining members.
///
/// A single vector gives its norm. The empty family has no member to be
/// close to anything and gives `+∞`.
pub fn separation(vectors: &[Vec<f64>]) -> f64 {
    if check_lengths(vectors).is_err() {
        return 0.0;
    }
    (0..vectors.len())
        .map(|i| {
            let others: Vec<Vec<f64>> = vectors
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, v)| v.clone())
                .collect();
            distance_to_span(&vectors[i], &others)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Smallest `m <= m_max` whose truncations have separation at least `tau`.
pub fn min_independent_truncation(
    family: &[SequenceVector],
    tau: f64,
    m_max: usize,
) -> Result<usize, VectorError> {
    (1..=m_max)
        .find(|&m| {
            let truncs: Vec<Vec<f64>> = family.iter().map(|u| u.coords(m)).collect();
            separation(&truncs) >= tau
        })
        .ok_or(VectorError::NotFound { tau, m_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn truncate_explicit() {
        let v = SequenceVector::explicit(vec![1.0, 2.0, 3.0]).unwrap();
        let t = v.truncate(2);
        assert_eq!(t.coords, vec![1.0, 2.0]);
        assert!(close(t.tail_norm, 3.0, 1e-15));
        assert_eq!(v.truncate(3).tail_norm, 0.0);
        assert_eq!(v.truncate(5).coords, vec![1.0, 2.0, 3.0, 0.0, 0.0]);
    }

    #[test]
    fn truncate_geometric_against_summed_series() {
        let v = SequenceVector::geometric(vec![], 1.0, 0.5).unwrap();
        let t = v.truncate(2);
        assert_eq!(t.coords, vec![0.5, 0.25]);
        // oracle: sum the series term by term
        let mut tail_sq = 0.0;
        let mut term = 0.125f64;
        for _ in 0..1_000_000 {
            tail_sq += term * term;
            term *= 0.5;
            if term == 0.0 {
                break;
            }
        }
        assert!(close(tail_sq, 1.0 / 48.0, 1e-17));
        assert!(close(t.tail_norm * t.tail_norm, tail_sq, 1e-16));
    }

    #[test]
    fn truncate_below_prefix_includes_geometric_tail() {
        let v = SequenceVector::geometric(vec![3.0, 4.0], 2.0, 0.5).unwrap();
        // tail past n=1: 4² + Σ_{j≥3} 4·4^{-j} = 16 + 4·(1/64)/(3/4)
        let expected = 16.0 + 4.0 / 48.0;
        let t = v.truncate(1);
        assert!(close(t.tail_norm * t.tail_norm, expected, 1e-13));
        assert!(close(v.coord(2), 2.0 * 0.125, 0.0));
    }

    #[test]
    fn cached_norm_matches_recomputation() {
        let v = SequenceVector::geometric(vec![0.3, -0.1], 3f64.sqrt(), 0.5).unwrap();
        let rel = (v.norm_sq() - v.recompute_norm_sq()).abs() / v.norm_sq();
        assert!(rel <= 1e-12);
        let direct: f64 = v.coords(2000).iter().map(|x| x * x).sum();
        assert!(close(direct, v.norm_sq(), 1e-14));
    }

    #[test]
    fn rejects_non_contracting_tail() {
        assert_eq!(
            SequenceVector::geometric(vec![], 1.0, 1.0),
            Err(VectorError::InvalidTail(1.0))
        );
        assert!(SequenceVector::geometric(vec![], 1.0, -1.5).is_err());
        assert!(SequenceVector::explicit(vec![f64::NAN]).is_err());
    }

    #[test]
    fn support_lengths() {
        assert_eq!(SequenceVector::explicit(vec![1.0, 0.0, 2.0, 0.0]).unwrap().support_len(), Some(3));
        assert_eq!(SequenceVector::geometric(vec![], 1.0, 0.5).unwrap().support_len(), None);
        assert_eq!(SequenceVector::geometric(vec![1.0], 0.0, 0.5).unwrap().support_len(), Some(1));
    }

    #[test]
    fn inner_products_are_exact_across_representations() {
        let a = SequenceVector::geometric(vec![1.0], 1.0, 0.5).unwrap();
        let b = SequenceVector::geometric(vec![], 2.0, -0.25).unwrap();
        let direct = dot(&a.coords(200), &b.coords(200));
        assert!(close(a.inner(&b), direct, 1e-15));
        let e = SequenceVector::explicit(vec![0.0, 1.0]).unwrap();
        assert!(close(a.inner(&e), 0.25, 0.0));
    }

    #[test]
    fn family_validation() {
        let u = SequenceVector::explicit(vec![0.6, 0.8]).unwrap();
        let v = SequenceVector::explicit(vec![-0.8, 0.6]).unwrap();
        assert!(OrthonormalFamily::new(vec![u.clone(), v]).is_ok());
        let bad = SequenceVector::explicit(vec![0.6, 0.8, 0.1]).unwrap();
        assert!(matches!(
            OrthonormalFamily::new(vec![u, bad]),
            Err(VectorError::InvalidFamily { .. })
        ));
        let geo = SequenceVector::geometric(vec![], 3f64.sqrt(), 0.5).unwrap();
        assert!(OrthonormalFamily::new(vec![geo]).is_ok());
    }

    #[test]
    fn gram_schmidt_examples() {
        let id = gram_schmidt(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(id, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let q = gram_schmidt(&[vec![2.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(q, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(gram_schmidt(&[]).unwrap(), Vec::<Vec<f64>>::new());
    }

    #[test]
    fn gram_schmidt_rejects_dependent_input() {
        let err = gram_schmidt(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap_err();
        assert!(matches!(err, VectorError::DegenerateFamily { .. }));
        assert!(gram_schmidt(&[vec![0.0, 0.0]]).is_err());
        assert_eq!(
            gram_schmidt(&[vec![1.0], vec![1.0, 0.0]]),
            Err(VectorError::DimensionMismatch)
        );
    }

    #[test]
    fn separation_examples() {
        let e1 = vec![1.0, 0.0, 0.0];
        let e2 = vec![0.0, 1.0, 0.0];
        assert!(close(separation(&[e1.clone(), e2]), 1.0, 1e-15));
        assert_eq!(separation(&[e1.clone(), e1.clone()]), 0.0);
        assert!(close(separation(&[vec![3.0, 4.0]]), 5.0, 1e-15));
        assert_eq!(separation(&[]), f64::INFINITY);
    }

    #[test]
    fn separation_of_two_lines_against_grid_projection() {
        let theta = PI / 6.0;
        let a = vec![1.0, 0.0];
        let b = vec![theta.cos(), theta.sin()];
        // oracle: minimize ‖b − t a‖ over a dense grid of t
        let grid_min = (0..=200_000)
            .map(|i| -1.0 + 2.0 * i as f64 / 200_000.0)
            .map(|t| norm(&[b[0] - t * a[0], b[1] - t * a[1]]))
            .fold(f64::INFINITY, f64::min);
        assert!(close(grid_min, 0.5, 1e-9));
        assert!(close(separation(&[a, b]), grid_min, 1e-9));
    }

    #[test]
    fn min_truncation_examples() {
        let e1 = SequenceVector::basis(0);
        let diag = SequenceVector::explicit(vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        assert_eq!(min_independent_truncation(&[e1.clone(), diag], 0.1, 10), Ok(2));
        assert_eq!(min_independent_truncation(&[e1.clone()], 0.5, 10), Ok(1));
        let three = [e1, SequenceVector::basis(1), SequenceVector::basis(2)];
        assert_eq!(min_independent_truncation(&three, 0.9, 10), Ok(3));
        assert_eq!(
            min_independent_truncation(&three, 0.9, 2),
            Err(VectorError::NotFound { tau: 0.9, m_max: 2 })
        );
    }

    #[test]
    fn frame_spans_its_columns() {
        let cols = vec![vec![1.0, 1.0, 0.0, 2.0], vec![0.0, 1.0, 1.0, -1.0]];
        let frame = FiniteFrame::new(cols, 4).unwrap();
        assert!(frame.span_residual() <= 1e-10);
        let z = frame.basis();
        assert!(close(dot(&z[0], &z[1]), 0.0, 1e-12));
        assert!(FiniteFrame::new(vec![vec![1.0]], 2).is_err());
    }

    #[test]
    fn descriptor_round_trip() {
        let v: SequenceVector =
            serde_json::from_str(r#"{"kind":"geometric","prefix":[0.5],"scale":3.0,"ratio":0.5}"#).unwrap();
        assert_eq!(v.tail(), Some(GeometricTail { scale: 3.0, ratio: 0.5 }));
        let back: SequenceVector = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
        assert_eq!(back, v);
        let e: SequenceVector = serde_json::from_str(r#"{"kind":"explicit","coords":[0.6,0.8]}"#).unwrap();
        assert!(close(e.norm_sq(), 1.0, 1e-15));
        assert!(serde_json::from_str::<SequenceVector>(r#"{"kind":"geometric","scale":1.0,"ratio":2.0}"#).is_err());
        assert!(serde_json::from_str::<SequenceVector>(r#"{"kind":"explicit","coords":[1],"extra":0}"#).is_err());
    }
}
