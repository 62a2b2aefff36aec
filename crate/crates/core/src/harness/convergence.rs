use serde::{Deserialize, Serialize};

use super::report::{Cell, Table};
use super::{fingerprint, HarnessError};
use crate::gaussian::{covariance_from_family, gaussian_expectation, ExpectationMethod, GaussianError};
use crate::integrands::{Integrand, IntegrandKind};
use crate::rng;
use crate::slice_geometry::{build_geometry, integrate_geometry, SliceError, SliceSpec};
use crate::stats::Estimate;
use crate::vectors::{OrthonormalFamily, SequenceVector};

const REFERENCE_STREAM: u64 = 0x7265_6665;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefMethod {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

impl RefMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            RefMethod::ClosedForm => "closed_form",
            RefMethod::Quadrature => "quadrature",
            RefMethod::MonteCarlo => "monte_carlo",
        }
    }
}

/// How the Gaussian reference is computed. `Auto` tries closed form, then
/// Gauss–Hermite, then Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceChoice {
    #[default]
    Auto,
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

/// Inputs of a convergence sweep. Serialized to JSON for the fingerprint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub family: Vec<SequenceVector>,
    pub p: Vec<f64>,
    pub k: usize,
    pub integrand: IntegrandKind,
    pub n_schedule: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    pub reference: ReferenceChoice,
    pub bias_budget: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub gaussian_ref: f64,
    pub ref_method: RefMethod,
    pub abs_error: f64,
}

/// An `n` whose slice could not be built.
#[derive(Debug, Clone, PartialEq)]
pub struct RowFailure {
    pub n: usize,
    pub error: SliceError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub failures: Vec<RowFailure>,
    pub fingerprint: String,
    pub seed: u64,
    pub reference: Estimate,
    pub ref_method: RefMethod,
    pub bias_budget: f64,
}

impl ConvergenceReport {
    /// `3·SE + bias_budget` for a row, with the reference error folded into SE.
    pub fn tolerance(&self, row: &ConvergenceRow) -> f64 {
        3.0 * row.std_error.hypot(self.reference.std_error) + self.bias_budget
    }

    /// Whether the last scheduled `n` produced a row within tolerance.
    pub fn passed(&self, final_n: usize) -> bool {
        match self.rows.last() {
            Some(row) if row.n == final_n => row.abs_error <= self.tolerance(row),
            _ => false,
        }
    }

    /// `abs_error` at the largest `n` is at most the one at the smallest `n`
    /// plus `2·SE` of the two rows.
    pub fn error_decreased(&self) -> bool {
        match (self.rows.first(), self.rows.last()) {
            (Some(a), Some(b)) => b.abs_error <= a.abs_error + 2.0 * a.std_error.hypot(b.std_error),
            _ => false,
        }
    }

    pub fn to_table(&self) -> Table {
        Table {
            header: vec!["n", "estimate", "std_error", "gaussian_ref", "ref_method", "abs_error"],
            rows: self
                .rows
                .iter()
                .map(|r| {
                    vec![
                        Cell::Int(r.n as u64),
                        Cell::Float(r.estimate),
                        Cell::Float(r.std_error),
                        Cell::Float(r.gaussian_ref),
                        Cell::Text(r.ref_method.as_str().into()),
                        Cell::Float(r.abs_error),
                    ]
                })
                .collect(),
        }
    }
}

fn reference(
    family: &OrthonormalFamily,
    sweep: &Sweep,
    f: &Integrand,
) -> Result<(Estimate, RefMethod), HarnessError> {
    let spec = covariance_from_family(family, sweep.k, &sweep.p)?;
    let mc = ExpectationMethod::MonteCarlo {
        count: sweep.samples,
        seed: rng::derive_seed(sweep.seed, REFERENCE_STREAM),
    };
    let attempt = |method, tag| gaussian_expectation(&spec, f, method).map(|e| (e, tag));
    let result = match sweep.reference {
        ReferenceChoice::ClosedForm => attempt(ExpectationMethod::ClosedForm, RefMethod::ClosedForm),
        ReferenceChoice::Quadrature => attempt(ExpectationMethod::Quadrature, RefMethod::Quadrature),
        ReferenceChoice::MonteCarlo => attempt(mc, RefMethod::MonteCarlo),
        ReferenceChoice::Auto => match attempt(ExpectationMethod::ClosedForm, RefMethod::ClosedForm) {
            Err(GaussianError::UnsupportedClosedForm) => {
                match attempt(ExpectationMethod::Quadrature, RefMethod::Quadrature) {
                    Err(GaussianError::RankTooHighForQuadrature(_)) => attempt(mc, RefMethod::MonteCarlo),
                    other => other,
                }
            }
            other => other,
        },
    };
    Ok(result?)
}

/// Slice Monte Carlo estimates along `n_schedule` against one Gaussian
/// reference. Slices that cannot be built become row failures.
pub fn convergence_sweep(sweep: &Sweep) -> Result<ConvergenceReport, HarnessError> {
    if sweep.n_schedule.is_empty() || sweep.n_schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HarnessError::InvalidInput("n_schedule must be non-empty and strictly increasing".into()));
    }
    if sweep.samples == 0 {
        return Err(HarnessError::InvalidInput("samples must be positive".into()));
    }
    let family = OrthonormalFamily::new(sweep.family.clone())
        .map_err(|e| HarnessError::InvalidInput(format!("family: {e}")))?;
    let f = Integrand::new(sweep.k, sweep.integrand.clone())
        .map_err(|e| HarnessError::InvalidInput(format!("integrand: {e}")))?;
    let (reference, ref_method) = reference(&family, sweep, &f)?;

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &n in &sweep.n_schedule {
        let built = SliceSpec::new(family.clone(), sweep.p.clone(), sweep.k, n).and_then(|s| build_geometry(&s));
        let geometry = match built {
            Ok(g) => g,
            Err(error) => {
                failures.push(RowFailure { n, error });
                continue;
            }
        };
        let est = integrate_geometry(&geometry, &f, sweep.samples, sweep.seed)?;
        rows.push(ConvergenceRow {
            n,
            estimate: est.value,
            std_error: est.std_error,
            gaussian_ref: reference.value,
            ref_method,
            abs_error: (est.value - reference.value).abs(),
        });
    }
    let json = serde_json::to_vec(sweep).expect("sweep serializes");
    Ok(ConvergenceReport {
        rows,
        failures,
        fingerprint: fingerprint(&json),
        seed: sweep.seed,
        reference,
        ref_method,
        bias_budget: sweep.bias_budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sweep(family: Vec<SequenceVector>, p: Vec<f64>, k: usize, integrand: IntegrandKind) -> Sweep {
        Sweep {
            family,
            p,
            k,
            integrand,
            n_schedule: vec![64, 256],
            samples: 2000,
            seed: 7,
            reference: ReferenceChoice::Auto,
            bias_budget: super::super::DEFAULT_BIAS_BUDGET,
        }
    }

    fn cos_x1(k: usize) -> IntegrandKind {
        let mut a = vec![0.0; k];
        a[0] = 1.0;
        IntegrandKind::CosLinear { a, b: 0.0 }
    }

    #[test]
    fn constant_integrand_rows_are_exact() {
        let s = sweep(
            vec![SequenceVector::explicit(vec![0.6, 0.8]).unwrap()],
            vec![1.0],
            2,
            IntegrandKind::CosLinear { a: vec![0.0, 0.0], b: 0.0 },
        );
        let r = convergence_sweep(&s).unwrap();
        assert_eq!(r.rows.len(), 2);
        for row in &r.rows {
            assert_eq!((row.estimate, row.abs_error, row.gaussian_ref), (1.0, 0.0, 1.0));
        }
        assert!(r.passed(256));
    }

    #[test]
    fn degenerate_reference_is_closed_form() {
        let s = sweep(vec![SequenceVector::explicit(vec![0.6, 0.8]).unwrap()], vec![1.0], 2, cos_x1(2));
        let r = convergence_sweep(&s).unwrap();
        assert_eq!(r.ref_method, RefMethod::ClosedForm);
        assert!((r.reference.value - 0.6f64.cos() * (-0.32f64).exp()).abs() < 1e-14);
        assert!(r.rows.windows(2).all(|w| w[0].n < w[1].n));
        for row in &r.rows {
            assert_eq!(row.abs_error, (row.estimate - row.gaussian_ref).abs());
        }
    }

    #[test]
    fn classical_reference() {
        let r = convergence_sweep(&sweep(vec![], vec![], 1, cos_x1(1))).unwrap();
        assert!((r.reference.value - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn reference_falls_back() {
        let ramp = IntegrandKind::RampIndicator { m: 2.0, axis: 0, center: 0.0 };
        let r = convergence_sweep(&sweep(vec![], vec![], 2, ramp.clone())).unwrap();
        assert_eq!(r.ref_method, RefMethod::Quadrature);
        let r = convergence_sweep(&sweep(vec![], vec![], 4, ramp)).unwrap();
        assert_eq!(r.ref_method, RefMethod::MonteCarlo);
        assert!(r.reference.std_error > 0.0);
    }

    #[test]
    fn infeasible_rows_are_recorded() {
        let mut s = sweep(vec![SequenceVector::basis(0)], vec![11.0], 1, cos_x1(1));
        s.n_schedule = vec![100, 200];
        let r = convergence_sweep(&s).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].n, 200);
        assert_eq!(r.failures.len(), 1);
        assert!(matches!(r.failures[0].error, SliceError::EmptySlice { .. }));
    }

    #[test]
    fn schedule_must_increase() {
        let mut s = sweep(vec![], vec![], 1, cos_x1(1));
        s.n_schedule = vec![64, 64];
        assert!(matches!(convergence_sweep(&s), Err(HarnessError::InvalidInput(_))));
    }

    #[test]
    fn reports_are_reproducible() {
        let s = sweep(vec![], vec![], 1, cos_x1(1));
        let a = convergence_sweep(&s).unwrap();
        let b = convergence_sweep(&s).unwrap();
        assert_eq!(a, b);
        let mut other = s.clone();
        other.seed = 8;
        assert_ne!(convergence_sweep(&other).unwrap().fingerprint, a.fingerprint);
    }
}
