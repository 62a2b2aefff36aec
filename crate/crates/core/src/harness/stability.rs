//! Sensitivity of slice integrals and of Gram–Schmidt to small perturbations
//! of the constraint vectors.

use serde::{Deserialize, Serialize};

use super::report::{Cell, Table};
use super::HarnessError;
use crate::integrands::Integrand;
use crate::linalg::{self, norm};
use crate::rng;
use crate::slice_geometry::{SliceGeometry, SliceSpec};
use crate::stats::{self, Accumulator};
use crate::vectors::{gram_schmidt, gram_schmidt_unchecked, separation};

const DIRECTION_STREAM: u64 = 0x6469_7265;
/// Base families less separated than this are rejected by the GS study.
pub const GS_SEPARATION_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationMode {
    /// `v_i + ε d_i` with random unit `d_i` in ℝⁿ.
    #[default]
    Random,
    /// `v_i + ε Σ_j c_ij v_j`, with `p` moved the same way so the
    /// constraint set is unchanged.
    InSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotationStudy {
    pub spec: SliceSpec,
    pub f: Integrand,
    pub epsilons: Vec<f64>,
    pub count: usize,
    pub seed: u64,
    pub mode: PerturbationMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationRow {
    pub epsilon: f64,
    /// `|a_f(v) − a_f(v')|` under common random numbers.
    pub difference: f64,
    /// Standard error of the paired difference.
    pub std_error: f64,
    /// Standard error of the unperturbed estimate alone.
    pub base_std_error: f64,
}

impl RotationRow {
    pub fn table(rows: &[RotationRow]) -> Table {
        Table {
            header: vec!["epsilon", "difference", "std_error"],
            rows: rows
                .iter()
                .map(|r| vec![Cell::Float(r.epsilon), Cell::Float(r.difference), Cell::Float(r.std_error)])
                .collect(),
        }
    }
}

fn directions(seed: u64, count: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| rng::unit_vector(&mut rng::stream(rng::derive_seed(seed, DIRECTION_STREAM), i as u64), dim))
        .collect()
}

fn check_separation(base: &[Vec<f64>], perturbed: &[Vec<f64>]) -> Result<(), HarnessError> {
    let floor = 0.5 * separation(base);
    let measured = separation(perturbed);
    if measured < floor {
        return Err(HarnessError::SeparationLost { measured, floor });
    }
    Ok(())
}

/// Common-random-number differences between the slice integral for the
/// truncations `v` and for perturbed vectors `v'` at each `ε`.
pub fn rotation_stability_study(study: &RotationStudy) -> Result<Vec<RotationRow>, HarnessError> {
    let spec = &study.spec;
    let (n, k, gamma) = (spec.n, spec.k, spec.gamma());
    if study.f.k() != k {
        return Err(HarnessError::InvalidInput(format!("integrand dimension {} differs from k = {k}", study.f.k())));
    }
    if !study.f.uniformly_continuous() {
        return Err(HarnessError::InvalidInput("rotation study needs a uniformly continuous integrand".into()));
    }
    let base = spec.family.truncations(n);
    let geometry = SliceGeometry::from_constraints(base.clone(), &spec.p, n, k)?;
    let random_dirs = directions(study.seed, gamma, n);
    let span_coeffs = directions(study.seed, gamma, gamma.max(1));

    let mut rows = Vec::with_capacity(study.epsilons.len());
    for &eps in &study.epsilons {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(HarnessError::InvalidInput(format!("epsilon {eps} must be finite and non-negative")));
        }
        let mut columns = base.clone();
        let mut p = spec.p.clone();
        match study.mode {
            PerturbationMode::Random => {
                for (c, d) in columns.iter_mut().zip(&random_dirs) {
                    linalg::axpy(eps, d, c);
                }
            }
            PerturbationMode::InSpan => {
                for i in 0..gamma {
                    for j in 0..gamma {
                        let w = eps * span_coeffs[i][j];
                        linalg::axpy(w, &base[j], &mut columns[i]);
                        p[i] += w * spec.p[j];
                    }
                }
            }
        }
        check_separation(&base, &columns)?;
        let perturbed = SliceGeometry::from_constraints(columns, &p, n, k)?;
        rows.push(paired_difference(&geometry, &perturbed, &study.f, study.count, study.seed, eps));
    }
    Ok(rows)
}

fn paired_difference(
    a: &SliceGeometry,
    b: &SliceGeometry,
    f: &Integrand,
    count: usize,
    seed: u64,
    epsilon: f64,
) -> RotationRow {
    let (n, k) = (a.n(), a.k());
    let (diff, base) = stats::chunked(
        count,
        |range| {
            let mut scratch = vec![0.0; n];
            let (mut x, mut y) = (vec![0.0; k], vec![0.0; k]);
            let (mut diff, mut base) = (Accumulator::default(), Accumulator::default());
            for i in range {
                a.sample_prefix(seed, i as u64, &mut scratch, &mut x);
                b.sample_prefix(seed, i as u64, &mut scratch, &mut y);
                let fx = f.eval_prefix(&x);
                diff.push(fx - f.eval_prefix(&y));
                base.push(fx);
            }
            (diff, base)
        },
        |l, r| (l.0.merge(r.0), l.1.merge(r.1)),
    )
    .unwrap_or_default();
    let d = diff.estimate();
    RotationRow {
        epsilon,
        difference: d.value.abs(),
        std_error: d.std_error,
        base_std_error: base.estimate().std_error,
    }
}

/// Each difference exceeds the previous one by at most `slack_se` times the
/// larger of the two paired standard errors.
pub fn monotone_within(rows: &[RotationRow], slack_se: f64) -> bool {
    rows.windows(2)
        .all(|w| w[1].difference <= w[0].difference + slack_se * w[0].std_error.max(w[1].std_error))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GsStudy {
    pub base: Vec<Vec<f64>>,
    pub epsilons: Vec<f64>,
    pub seed: u64,
    /// Fixed perturbation directions (one per member); random unit vectors
    /// when absent.
    pub directions: Option<Vec<Vec<f64>>>,
    /// Skip the separation checks and the independence check inside
    /// Gram–Schmidt. Only for demonstrating what goes wrong without them.
    pub unchecked: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GsRow {
    pub epsilon: f64,
    pub max_diff: f64,
    /// `max_diff / ε`, reported as 0 at `ε = 0`.
    pub ratio: f64,
}

impl GsRow {
    pub fn table(rows: &[GsRow]) -> Table {
        Table {
            header: vec!["epsilon", "max_diff", "ratio"],
            rows: rows
                .iter()
                .map(|r| vec![Cell::Float(r.epsilon), Cell::Float(r.max_diff), Cell::Float(r.ratio)])
                .collect(),
        }
    }
}

/// `max_i ‖w_i − z_i‖` between Gram–Schmidt of the base and of
/// `base + ε · directions`.
pub fn gs_perturbation_study(study: &GsStudy) -> Result<Vec<GsRow>, HarnessError> {
    let base = &study.base;
    let dim = base.first().map_or(0, Vec::len);
    if base.is_empty() || base.iter().any(|v| v.len() != dim) {
        return Err(HarnessError::InvalidInput("base must be a non-empty list of equal-length vectors".into()));
    }
    let dirs = match &study.directions {
        Some(d) if d.len() == base.len() && d.iter().all(|v| v.len() == dim) => d.clone(),
        Some(_) => return Err(HarnessError::InvalidInput("one direction of matching length per base vector".into())),
        None => directions(study.seed, base.len(), dim),
    };
    let orthonormalize = |vs: &[Vec<f64>]| -> Result<Vec<Vec<f64>>, HarnessError> {
        if study.unchecked {
            Ok(gram_schmidt_unchecked(vs))
        } else {
            gram_schmidt(vs).map_err(|_| HarnessError::SeparationLost {
                measured: separation(vs),
                floor: GS_SEPARATION_FLOOR,
            })
        }
    };
    if !study.unchecked {
        let measured = separation(base);
        if measured < GS_SEPARATION_FLOOR {
            return Err(HarnessError::SeparationLost {
                measured,
                floor: GS_SEPARATION_FLOOR,
            });
        }
    }
    let w = orthonormalize(base)?;
    let mut rows = Vec::with_capacity(study.epsilons.len());
    for &eps in &study.epsilons {
        let perturbed: Vec<Vec<f64>> = base
            .iter()
            .zip(&dirs)
            .map(|(b, d)| {
                let mut v = b.clone();
                linalg::axpy(eps, d, &mut v);
                v
            })
            .collect();
        if !study.unchecked {
            check_separation(base, &perturbed)?;
        }
        let z = orthonormalize(&perturbed)?;
        let max_diff = w
            .iter()
            .zip(&z)
            .map(|(a, b)| norm(&linalg::sub(a, b)))
            .fold(0.0, f64::max);
        let ratio = if eps > 0.0 { max_diff / eps } else { 0.0 };
        rows.push(GsRow {
            epsilon: eps,
            max_diff,
            ratio,
        });
    }
    Ok(rows)
}

/// `max ratio / min ratio` over rows with `ε > 0`.
pub fn ratio_band(rows: &[GsRow]) -> f64 {
    let ratios: Vec<f64> = rows.iter().filter(|r| r.epsilon > 0.0).map(|r| r.ratio).collect();
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    if ratios.is_empty() {
        1.0
    } else {
        max / min
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrands::IntegrandKind;
    use crate::vectors::{OrthonormalFamily, SequenceVector};

    fn rotation(mode: PerturbationMode, epsilons: Vec<f64>) -> RotationStudy {
        let family = OrthonormalFamily::new(vec![SequenceVector::explicit(vec![0.6, 0.8]).unwrap()]).unwrap();
        RotationStudy {
            spec: SliceSpec::new(family, vec![1.0], 2, 256).unwrap(),
            f: Integrand::cos_coordinate(2, 0),
            epsilons,
            count: 4000,
            seed: 3,
            mode,
        }
    }

    #[test]
    fn zero_perturbation_is_exactly_zero() {
        let rows = rotation_stability_study(&rotation(PerturbationMode::Random, vec![0.0])).unwrap();
        assert_eq!(rows[0].difference.to_bits(), 0f64.to_bits());
        assert_eq!(rows[0].std_error, 0.0);
    }

    #[test]
    fn in_span_perturbation_keeps_the_slice() {
        let rows = rotation_stability_study(&rotation(PerturbationMode::InSpan, vec![0.1, 0.01])).unwrap();
        for r in rows {
            assert!(r.difference <= 2.0 * r.base_std_error, "{r:?}");
        }
    }

    #[test]
    fn random_differences_shrink() {
        let rows = rotation_stability_study(&rotation(PerturbationMode::Random, vec![1e-1, 1e-2, 1e-3])).unwrap();
        assert!(monotone_within(&rows, 2.0), "{rows:?}");
    }

    #[test]
    fn non_uniformly_continuous_integrand_is_rejected() {
        let mut s = rotation(PerturbationMode::Random, vec![0.1]);
        s.f = Integrand::new(
            2,
            IntegrandKind::TanhPoly {
                constant: 0.0,
                linear: vec![],
                quadratic: vec![vec![0.0, 1.0], vec![0.0, 0.0]],
            },
        )
        .unwrap();
        assert!(!s.f.uniformly_continuous());
        assert!(matches!(rotation_stability_study(&s), Err(HarnessError::InvalidInput(_))));
    }

    #[test]
    fn separation_floor_is_half_the_base() {
        let base = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        let close = vec![vec![1.0, 0.0, 0.0], vec![1.0, 1e-3, 0.0]];
        assert!(matches!(check_separation(&base, &close), Err(HarnessError::SeparationLost { .. })));
        let tilted = vec![vec![1.0, 0.0, 0.0], vec![0.5, 1.0, 0.0]];
        assert!(check_separation(&base, &tilted).is_ok());
    }

    /// Directional derivative of the Gram–Schmidt map by central differences.
    fn gs_derivative_norm(base: &[Vec<f64>], dirs: &[Vec<f64>]) -> f64 {
        let h = 1e-5;
        let shifted = |s: f64| -> Vec<Vec<f64>> {
            let vs: Vec<Vec<f64>> = base
                .iter()
                .zip(dirs)
                .map(|(b, d)| b.iter().zip(d).map(|(x, y)| x + s * y).collect())
                .collect();
            gram_schmidt(&vs).unwrap()
        };
        let (plus, minus) = (shifted(h), shifted(-h));
        plus.iter()
            .zip(&minus)
            .map(|(a, b)| norm(&linalg::sub(a, b)) / (2.0 * h))
            .fold(0.0, f64::max)
    }

    #[test]
    fn orthogonal_perturbation_has_unit_ratio() {
        let base = vec![vec![1.0, 0.0, 0.0]];
        let dirs = vec![vec![0.0, 1.0, 0.0]];
        let oracle = gs_derivative_norm(&base, &dirs);
        assert!((oracle - 1.0).abs() < 1e-6);
        let rows = gs_perturbation_study(&GsStudy {
            base,
            epsilons: vec![0.0, 1e-3, 1e-5],
            seed: 0,
            directions: Some(dirs),
            unchecked: false,
        })
        .unwrap();
        assert_eq!((rows[0].max_diff, rows[0].ratio), (0.0, 0.0));
        for r in &rows[1..] {
            assert!((r.ratio - oracle).abs() < 1e-3, "{r:?}");
        }
    }

    #[test]
    fn separated_family_is_lipschitz() {
        let base = vec![vec![1.0, 0.2, 0.0, 0.1], vec![0.3, 1.0, 0.5, 0.0], vec![0.0, 0.4, 1.0, 0.7]];
        assert!(separation(&base) >= 0.3);
        let rows = gs_perturbation_study(&GsStudy {
            base,
            epsilons: vec![1e-2, 1e-4, 1e-6],
            seed: 5,
            directions: None,
            unchecked: false,
        })
        .unwrap();
        assert!(ratio_band(&rows) <= 4.0, "{rows:?}");
    }

    #[test]
    fn nearly_parallel_base_fails_or_does_not_shrink() {
        let delta: f64 = 1e-9;
        let base = vec![vec![1.0, 0.0], vec![delta.cos(), delta.sin()]];
        let dirs = vec![vec![0.0, 0.0], vec![0.0, -1.0]];
        let mut study = GsStudy {
            base,
            epsilons: vec![1e-2, 1e-4, 1e-6],
            seed: 0,
            directions: Some(dirs),
            unchecked: false,
        };
        assert!(matches!(gs_perturbation_study(&study), Err(HarnessError::SeparationLost { .. })));
        study.unchecked = true;
        let rows = gs_perturbation_study(&study).unwrap();
        // the second basis vector flips sign for every ε ≫ δ
        for r in &rows {
            assert!(r.max_diff > 1.0, "{r:?}");
        }
        assert!(ratio_band(&rows) > 4.0);
    }
}
