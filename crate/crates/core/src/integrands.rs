//! A closed catalog of bounded continuous test functions on ℝ^k.
//!
//! Every kind carries a certified sup-norm bound. Functions of the form
//! cos(⟨a,x⟩ + b) and exp(−c‖x − m‖²), and products and affine combinations
//! of those, also expand into complex exponential-quadratic terms, which is
//! what gives them closed-form Gaussian expectations.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::dot;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrandError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid integrand parameter: {0}")]
    InvalidParameter(String),
}

/// JSON-serializable description of an integrand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IntegrandKind {
    /// cos(⟨a, x⟩ + b)
    CosLinear { a: Vec<f64>, b: f64 },
    /// exp(−c ‖x − m‖²)
    GaussBump { c: f64, m: Vec<f64> },
    /// 1 on (−m+1, m−1), 0 outside (−m, m), linear between; applied to
    /// `x[axis] − center`.
    RampIndicator {
        m: f64,
        axis: usize,
        #[serde(default)]
        center: f64,
    },
    /// tanh(constant + ⟨linear, x⟩ + xᵀ quadratic x)
    TanhPoly {
        #[serde(default)]
        constant: f64,
        #[serde(default)]
        linear: Vec<f64>,
        #[serde(default)]
        quadratic: Vec<Vec<f64>>,
    },
    Product { factors: Vec<IntegrandKind> },
    /// offset + Σ weights[i] · terms[i]
    AffineCombination {
        weights: Vec<f64>,
        terms: Vec<IntegrandKind>,
        #[serde(default)]
        offset: f64,
    },
}

/// A validated integrand on ℝ^k.
#[derive(Debug, Clone, PartialEq)]
pub struct Integrand {
    k: usize,
    kind: IntegrandKind,
    sup_bound: f64,
    uniformly_continuous: bool,
}

fn expect_len(expected: usize, found: usize) -> Result<(), IntegrandError> {
    if expected == found {
        Ok(())
    } else {
        Err(IntegrandError::DimensionMismatch { expected, found })
    }
}

fn finite(name: &str, values: &[f64]) -> Result<(), IntegrandError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(IntegrandError::InvalidParameter(format!("{name} must be finite")))
    }
}

impl IntegrandKind {
    /// Bounded uniformly continuous functions are closed under products and
    /// linear combinations, so only `tanh_poly` needs a look: tanh(q) is
    /// uniformly continuous when q is affine or its quadratic part is
    /// definite. Otherwise, e.g. tanh(x₁x₂), it oscillates ever faster along
    /// the zero set of q.
    fn uniformly_continuous(&self) -> bool {
        match self {
            IntegrandKind::TanhPoly { quadratic, .. } => {
                let k = quadratic.len();
                if quadratic.iter().flatten().all(|&v| v == 0.0) {
                    return true;
                }
                let sym = nalgebra::DMatrix::from_fn(k, k, |r, c| 0.5 * (quadratic[r][c] + quadratic[c][r]));
                let eig = sym.symmetric_eigenvalues();
                eig.iter().all(|&l| l > 0.0) || eig.iter().all(|&l| l < 0.0)
            }
            IntegrandKind::Product { factors } => factors.iter().all(Self::uniformly_continuous),
            IntegrandKind::AffineCombination { terms, .. } => terms.iter().all(Self::uniformly_continuous),
            _ => true,
        }
    }

    fn validate(&self, k: usize) -> Result<(), IntegrandError> {
        match self {
            IntegrandKind::CosLinear { a, b } => {
                expect_len(k, a.len())?;
                finite("cos_linear.a", a)?;
                finite("cos_linear.b", &[*b])
            }
            IntegrandKind::GaussBump { c, m } => {
                expect_len(k, m.len())?;
                finite("gauss_bump.m", m)?;
                if !(*c > 0.0 && c.is_finite()) {
                    return Err(IntegrandError::InvalidParameter(format!(
                        "gauss_bump.c must be positive, got {c}"
                    )));
                }
                Ok(())
            }
            IntegrandKind::RampIndicator { m, axis, center } => {
                if !(*m >= 1.0 && m.is_finite()) {
                    return Err(IntegrandError::InvalidParameter(format!(
                        "ramp_indicator.m must be >= 1, got {m}"
                    )));
                }
                if *axis >= k {
                    return Err(IntegrandError::InvalidParameter(format!(
                        "ramp_indicator.axis {axis} out of range for k = {k}"
                    )));
                }
                finite("ramp_indicator.center", &[*center])
            }
            IntegrandKind::TanhPoly {
                constant,
                linear,
                quadratic,
            } => {
                finite("tanh_poly.constant", &[*constant])?;
                if !linear.is_empty() {
                    expect_len(k, linear.len())?;
                    finite("tanh_poly.linear", linear)?;
                }
                if !quadratic.is_empty() {
                    expect_len(k, quadratic.len())?;
                    for row in quadratic {
                        expect_len(k, row.len())?;
                        finite("tanh_poly.quadratic", row)?;
                    }
                }
                Ok(())
            }
            IntegrandKind::Product { factors } => factors.iter().try_for_each(|f| f.validate(k)),
            IntegrandKind::AffineCombination {
                weights,
                terms,
                offset,
            } => {
                expect_len(terms.len(), weights.len())?;
                finite("affine_combination.weights", weights)?;
                finite("affine_combination.offset", &[*offset])?;
                terms.iter().try_for_each(|f| f.validate(k))
            }
        }
    }

    fn sup_bound(&self) -> f64 {
        match self {
            IntegrandKind::CosLinear { .. }
            | IntegrandKind::GaussBump { .. }
            | IntegrandKind::RampIndicator { .. }
            | IntegrandKind::TanhPoly { .. } => 1.0,
            IntegrandKind::Product { factors } => factors.iter().map(Self::sup_bound).product(),
            IntegrandKind::AffineCombination {
                weights,
                terms,
                offset,
            } => {
                offset.abs()
                    + weights
                        .iter()
                        .zip(terms)
                        .map(|(w, t)| w.abs() * t.sup_bound())
                        .sum::<f64>()
            }
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        match self {
            IntegrandKind::CosLinear { a, b } => (dot(a, &x[..a.len()]) + b).cos(),
            IntegrandKind::GaussBump { c, m } => {
                let d2: f64 = m.iter().zip(x).map(|(mi, xi)| (xi - mi) * (xi - mi)).sum();
                (-c * d2).exp()
            }
            IntegrandKind::RampIndicator { m, axis, center } => ramp(*m, x[*axis] - center),
            IntegrandKind::TanhPoly {
                constant,
                linear,
                quadratic,
            } => {
                let mut q = *constant;
                if !linear.is_empty() {
                    q += dot(linear, &x[..linear.len()]);
                }
                for (i, row) in quadratic.iter().enumerate() {
                    q += x[i] * dot(row, &x[..row.len()]);
                }
                q.tanh()
            }
            IntegrandKind::Product { factors } => factors.iter().map(|f| f.eval(x)).product(),
            IntegrandKind::AffineCombination {
                weights,
                terms,
                offset,
            } => offset + weights.iter().zip(terms).map(|(w, t)| w * t.eval(x)).sum::<f64>(),
        }
    }

    fn translated(&self, s: &[f64]) -> IntegrandKind {
        match self {
            IntegrandKind::CosLinear { a, b } => IntegrandKind::CosLinear {
                a: a.clone(),
                b: b + dot(a, s),
            },
            IntegrandKind::GaussBump { c, m } => IntegrandKind::GaussBump {
                c: *c,
                m: m.iter().zip(s).map(|(mi, si)| mi - si).collect(),
            },
            IntegrandKind::RampIndicator { m, axis, center } => IntegrandKind::RampIndicator {
                m: *m,
                axis: *axis,
                center: center - s[*axis],
            },
            IntegrandKind::TanhPoly {
                constant,
                linear,
                quadratic,
            } => {
                // q(x + s) = q(s) + ⟨linear + (Q + Qᵀ) s, x⟩ + xᵀ Q x
                let k = s.len();
                let mut new_constant = *constant;
                let mut new_linear = if linear.is_empty() {
                    vec![0.0; k]
                } else {
                    linear.clone()
                };
                if !linear.is_empty() {
                    new_constant += dot(linear, s);
                }
                for (i, row) in quadratic.iter().enumerate() {
                    new_constant += s[i] * dot(row, s);
                    for (j, qij) in row.iter().enumerate() {
                        new_linear[j] += qij * s[i];
                        new_linear[i] += qij * s[j];
                    }
                }
                IntegrandKind::TanhPoly {
                    constant: new_constant,
                    linear: new_linear,
                    quadratic: quadratic.clone(),
                }
            }
            IntegrandKind::Product { factors } => IntegrandKind::Product {
                factors: factors.iter().map(|f| f.translated(s)).collect(),
            },
            IntegrandKind::AffineCombination {
                weights,
                terms,
                offset,
            } => IntegrandKind::AffineCombination {
                weights: weights.clone(),
                terms: terms.iter().map(|t| t.translated(s)).collect(),
                offset: *offset,
            },
        }
    }

    fn exp_quadratic_terms(&self, k: usize) -> Option<Vec<ExpQuadTerm>> {
        match self {
            IntegrandKind::CosLinear { a, b } => {
                let plus = ExpQuadTerm {
                    weight: 0.5,
                    quad: vec![0.0; k * k],
                    lin_re: vec![0.0; k],
                    lin_im: a.clone(),
                    const_re: 0.0,
                    const_im: *b,
                };
                let minus = ExpQuadTerm {
                    lin_im: a.iter().map(|v| -v).collect(),
                    const_im: -b,
                    ..plus.clone()
                };
                Some(vec![plus, minus])
            }
            IntegrandKind::GaussBump { c, m } => {
                let mut quad = vec![0.0; k * k];
                for i in 0..k {
                    quad[i * k + i] = *c;
                }
                Some(vec![ExpQuadTerm {
                    weight: 1.0,
                    quad,
                    lin_re: m.iter().map(|mi| 2.0 * c * mi).collect(),
                    lin_im: vec![0.0; k],
                    const_re: -c * dot(m, m),
                    const_im: 0.0,
                }])
            }
            IntegrandKind::RampIndicator { .. } | IntegrandKind::TanhPoly { .. } => None,
            IntegrandKind::Product { factors } => {
                let mut acc = vec![ExpQuadTerm::one(k)];
                for f in factors {
                    let terms = f.exp_quadratic_terms(k)?;
                    if acc.len() * terms.len() > MAX_CLOSED_FORM_TERMS {
                        return None;
                    }
                    acc = acc
                        .iter()
                        .flat_map(|l| terms.iter().map(move |r| l.times(r)))
                        .collect();
                }
                Some(acc)
            }
            IntegrandKind::AffineCombination {
                weights,
                terms,
                offset,
            } => {
                let mut out = vec![ExpQuadTerm {
                    weight: *offset,
                    ..ExpQuadTerm::one(k)
                }];
                for (w, t) in weights.iter().zip(terms) {
                    out.extend(t.exp_quadratic_terms(k)?.into_iter().map(|mut term| {
                        term.weight *= w;
                        term
                    }));
                    if out.len() > MAX_CLOSED_FORM_TERMS {
                        return None;
                    }
                }
                Some(out)
            }
        }
    }
}

/// The piecewise-linear bump equal to 1 on (−m+1, m−1) and 0 off (−m, m).
pub fn ramp(m: f64, t: f64) -> f64 {
    (m - t.abs()).clamp(0.0, 1.0)
}

/// Cap on the number of expanded terms before falling back to numerics.
const MAX_CLOSED_FORM_TERMS: usize = 4096;

/// `weight · exp(−xᵀ Q x + ⟨β, x⟩ + c)` with complex `β` and `c`; the
/// integrand is the real part of the sum of its terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpQuadTerm {
    pub weight: f64,
    /// Row-major k×k symmetric PSD matrix.
    pub quad: Vec<f64>,
    pub lin_re: Vec<f64>,
    pub lin_im: Vec<f64>,
    pub const_re: f64,
    pub const_im: f64,
}

impl ExpQuadTerm {
    fn one(k: usize) -> Self {
        ExpQuadTerm {
            weight: 1.0,
            quad: vec![0.0; k * k],
            lin_re: vec![0.0; k],
            lin_im: vec![0.0; k],
            const_re: 0.0,
            const_im: 0.0,
        }
    }

    fn times(&self, other: &ExpQuadTerm) -> ExpQuadTerm {
        let add = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + y).collect();
        ExpQuadTerm {
            weight: self.weight * other.weight,
            quad: add(&self.quad, &other.quad),
            lin_re: add(&self.lin_re, &other.lin_re),
            lin_im: add(&self.lin_im, &other.lin_im),
            const_re: self.const_re + other.const_re,
            const_im: self.const_im + other.const_im,
        }
    }
}

impl Integrand {
    pub fn new(k: usize, kind: IntegrandKind) -> Result<Self, IntegrandError> {
        if k == 0 {
            return Err(IntegrandError::InvalidParameter("k must be >= 1".into()));
        }
        kind.validate(k)?;
        let sup_bound = kind.sup_bound();
        let uniformly_continuous = kind.uniformly_continuous();
        Ok(Integrand {
            k,
            kind,
            sup_bound,
            uniformly_continuous,
        })
    }

    /// The constant function 1 on ℝ^k.
    pub fn one(k: usize) -> Self {
        Self::new(
            k,
            IntegrandKind::CosLinear {
                a: vec![0.0; k],
                b: 0.0,
            },
        )
        .expect("constant integrand is valid")
    }

    pub fn cos_coordinate(k: usize, axis: usize) -> Self {
        let mut a = vec![0.0; k];
        a[axis] = 1.0;
        Self::new(k, IntegrandKind::CosLinear { a, b: 0.0 }).expect("axis within k")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn kind(&self) -> &IntegrandKind {
        &self.kind
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn uniformly_continuous(&self) -> bool {
        self.uniformly_continuous
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64, IntegrandError> {
        expect_len(self.k, x.len())?;
        Ok(self.kind.eval(x))
    }

    /// Evaluates on the first `k` coordinates of `x` (`x.len() >= k`).
    #[inline]
    pub fn eval_prefix(&self, x: &[f64]) -> f64 {
        debug_assert!(x.len() >= self.k);
        self.kind.eval(&x[..self.k])
    }

    /// `x ↦ f(x + shift)`, with the shift folded into the parameters.
    pub fn translate(&self, shift: &[f64]) -> Result<Integrand, IntegrandError> {
        expect_len(self.k, shift.len())?;
        Integrand::new(self.k, self.kind.translated(shift))
    }

    /// Expansion into exponential-quadratic terms, when one exists.
    pub fn exp_quadratic_terms(&self) -> Option<Vec<ExpQuadTerm>> {
        self.kind.exp_quadratic_terms(self.k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ramp_values() {
        let f = Integrand::new(1, IntegrandKind::RampIndicator { m: 2.0, axis: 0, center: 0.0 }).unwrap();
        assert_eq!(f.evaluate(&[0.0]).unwrap(), 1.0);
        assert_eq!(f.evaluate(&[1.5]).unwrap(), 0.5);
        assert_eq!(f.evaluate(&[-1.5]).unwrap(), 0.5);
        assert_eq!(f.evaluate(&[3.0]).unwrap(), 0.0);
        assert_eq!(f.evaluate(&[1.0]).unwrap(), 1.0);
        assert_eq!(f.evaluate(&[2.0]).unwrap(), 0.0);
    }

    #[test]
    fn simple_values() {
        let one = Integrand::one(3);
        assert_eq!(one.evaluate(&[4.0, -2.0, 9.0]).unwrap(), 1.0);
        let bump = Integrand::new(2, IntegrandKind::GaussBump { c: 1.0, m: vec![0.0, 0.0] }).unwrap();
        let v = bump.evaluate(&[0.6, 0.8]).unwrap();
        assert!((v - (-1f64).exp()).abs() < 1e-15);
        assert!((v - 0.367879).abs() < 1e-6);
    }

    #[test]
    fn dimension_mismatch() {
        let f = Integrand::one(2);
        assert_eq!(
            f.evaluate(&[1.0]),
            Err(IntegrandError::DimensionMismatch { expected: 2, found: 1 })
        );
        assert!(Integrand::new(2, IntegrandKind::CosLinear { a: vec![1.0], b: 0.0 }).is_err());
        assert!(Integrand::new(1, IntegrandKind::RampIndicator { m: 0.5, axis: 0, center: 0.0 }).is_err());
        assert!(Integrand::new(1, IntegrandKind::GaussBump { c: 0.0, m: vec![0.0] }).is_err());
    }

    #[test]
    fn translate_rewrites_parameters() {
        let f = Integrand::new(2, IntegrandKind::CosLinear { a: vec![1.0, 2.0], b: 0.5 }).unwrap();
        let g = f.translate(&[0.25, -1.0]).unwrap();
        assert_eq!(g.kind(), &IntegrandKind::CosLinear { a: vec![1.0, 2.0], b: 0.5 + 0.25 - 2.0 });
        let bump = Integrand::new(1, IntegrandKind::GaussBump { c: 2.0, m: vec![1.0] }).unwrap();
        assert_eq!(
            bump.translate(&[0.5]).unwrap().kind(),
            &IntegrandKind::GaussBump { c: 2.0, m: vec![0.5] }
        );
        let r = Integrand::new(2, IntegrandKind::RampIndicator { m: 3.0, axis: 0, center: 0.0 }).unwrap();
        assert_eq!(r.translate(&[0.0, 7.0]).unwrap(), r);
    }

    #[test]
    fn sup_bounds_compose() {
        let cos = IntegrandKind::CosLinear { a: vec![1.0], b: 0.0 };
        let tanh = IntegrandKind::TanhPoly { constant: 0.0, linear: vec![1.0], quadratic: vec![] };
        let prod = Integrand::new(1, IntegrandKind::Product { factors: vec![cos.clone(), tanh.clone()] }).unwrap();
        assert_eq!(prod.sup_bound(), 1.0);
        let aff = Integrand::new(
            1,
            IntegrandKind::AffineCombination { weights: vec![2.0, -0.5], terms: vec![cos, tanh], offset: 0.25 },
        )
        .unwrap();
        assert_eq!(aff.sup_bound(), 2.75);
    }

    #[test]
    fn json_descriptor_round_trip() {
        let json = r#"{"kind":"product","factors":[{"kind":"cos_linear","a":[1,0],"b":0},{"kind":"ramp_indicator","m":6,"axis":1}]}"#;
        let kind: IntegrandKind = serde_json::from_str(json).unwrap();
        let f = Integrand::new(2, kind.clone()).unwrap();
        let back: IntegrandKind = serde_json::from_str(&serde_json::to_string(f.kind()).unwrap()).unwrap();
        assert_eq!(back, kind);
        assert!(serde_json::from_str::<IntegrandKind>(r#"{"kind":"cos_linear","a":[1],"b":0,"x":1}"#).is_err());
    }

    fn random_kind(rng: &mut ChaCha8Rng, k: usize, depth: u32) -> IntegrandKind {
        let vec = |rng: &mut ChaCha8Rng| (0..k).map(|_| rng.random_range(-2.0..2.0)).collect::<Vec<f64>>();
        match rng.random_range(0..if depth == 0 { 4 } else { 6 }) {
            0 => IntegrandKind::CosLinear { a: vec(rng), b: rng.random_range(-3.0..3.0) },
            1 => IntegrandKind::GaussBump { c: rng.random_range(0.1..2.0), m: vec(rng) },
            2 => IntegrandKind::RampIndicator {
                m: rng.random_range(1.0..4.0),
                axis: rng.random_range(0..k),
                center: rng.random_range(-1.0..1.0),
            },
            3 => IntegrandKind::TanhPoly {
                constant: rng.random_range(-1.0..1.0),
                linear: vec(rng),
                quadratic: (0..k).map(|_| vec(rng)).collect(),
            },
            4 => IntegrandKind::Product {
                factors: (0..2).map(|_| random_kind(rng, k, depth - 1)).collect(),
            },
            _ => IntegrandKind::AffineCombination {
                weights: vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
                terms: (0..2).map(|_| random_kind(rng, k, depth - 1)).collect(),
                offset: rng.random_range(-1.0..1.0),
            },
        }
    }

    #[test]
    fn translation_identity_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let k = rng.random_range(1..4);
            let f = Integrand::new(k, random_kind(&mut rng, k, 2)).unwrap();
            let s: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
            let x: Vec<f64> = (0..k).map(|_| rng.random_range(-3.0..3.0)).collect();
            let xs: Vec<f64> = x.iter().zip(&s).map(|(a, b)| a + b).collect();
            let lhs = f.translate(&s).unwrap().evaluate(&x).unwrap();
            let rhs = f.evaluate(&xs).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn values_respect_sup_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let k = rng.random_range(1..4);
            let f = Integrand::new(k, random_kind(&mut rng, k, 2)).unwrap();
            for _ in 0..10_000 {
                let x: Vec<f64> = (0..k).map(|_| rng.random_range(-20.0..20.0)).collect();
                assert!(f.evaluate(&x).unwrap().abs() <= f.sup_bound() + 1e-15);
            }
        }
    }

    #[test]
    fn ramp_is_monotone_in_m() {
        for i in 0..2000 {
            let t = -10.0 + i as f64 * 0.01;
            for m in 1..8 {
                assert!(ramp(m as f64, t) <= ramp(m as f64 + 1.0, t));
            }
        }
    }

    #[test]
    fn exp_quadratic_expansion_reproduces_values() {
        let kind = IntegrandKind::AffineCombination {
            weights: vec![0.7, -1.2],
            terms: vec![
                IntegrandKind::Product {
                    factors: vec![
                        IntegrandKind::CosLinear { a: vec![1.0, -0.5], b: 0.3 },
                        IntegrandKind::GaussBump { c: 0.4, m: vec![0.2, 1.0] },
                        IntegrandKind::CosLinear { a: vec![0.0, 2.0], b: -1.0 },
                    ],
                },
                IntegrandKind::GaussBump { c: 1.5, m: vec![-1.0, 0.0] },
            ],
            offset: 0.1,
        };
        let f = Integrand::new(2, kind).unwrap();
        let terms = f.exp_quadratic_terms().unwrap();
        for x in [[0.0, 0.0], [1.0, -2.0], [0.3, 0.7]] {
            let mut total = 0.0;
            for t in &terms {
                let q = x[0] * (t.quad[0] * x[0] + t.quad[1] * x[1]) + x[1] * (t.quad[2] * x[0] + t.quad[3] * x[1]);
                let re = -q + dot(&t.lin_re, &x) + t.const_re;
                let im = dot(&t.lin_im, &x) + t.const_im;
                total += t.weight * re.exp() * im.cos();
            }
            assert!((total - f.evaluate(&x).unwrap()).abs() < 1e-14);
        }
        let ramp = Integrand::new(1, IntegrandKind::RampIndicator { m: 2.0, axis: 0, center: 0.0 }).unwrap();
        assert!(ramp.exp_quadratic_terms().is_none());
    }

    #[test]
    fn uniform_continuity_flag() {
        let tanh = |quadratic: Vec<Vec<f64>>| {
            Integrand::new(2, IntegrandKind::TanhPoly { constant: 0.0, linear: vec![1.0, 0.0], quadratic }).unwrap()
        };
        assert!(tanh(vec![]).uniformly_continuous());
        assert!(tanh(vec![vec![1.0, 0.0], vec![0.0, 2.0]]).uniformly_continuous());
        assert!(tanh(vec![vec![-1.0, 0.5], vec![0.5, -2.0]]).uniformly_continuous());
        assert!(!tanh(vec![vec![0.0, 1.0], vec![0.0, 0.0]]).uniformly_continuous());
        assert!(!tanh(vec![vec![1.0, 0.0], vec![0.0, 0.0]]).uniformly_continuous());
        assert!(Integrand::cos_coordinate(2, 1).uniformly_continuous());
    }
}
