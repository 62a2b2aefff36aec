use serde::Serialize;

use super::report::{Cell, Table};
use super::HarnessError;
use crate::slice_geometry::{build_geometry, SliceSpec};
use crate::stats;

#[derive(Debug, Clone, PartialEq)]
pub struct TailStudy {
    pub spec: SliceSpec,
    pub thresholds: Vec<f64>,
    pub count: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailRow {
    pub t: f64,
    /// Fraction of samples with `|x₁| > t`.
    pub fraction: f64,
    /// Binomial standard error `√(f(1 − f)/count)`.
    pub std_error: f64,
    /// `2 e^{−t²/4} + 5·SE`.
    pub envelope: f64,
    pub within_envelope: bool,
}

impl TailRow {
    pub fn table(rows: &[TailRow]) -> Table {
        Table {
            header: vec!["t", "fraction", "std_error", "envelope", "within_envelope"],
            rows: rows
                .iter()
                .map(|r| {
                    vec![
                        Cell::Float(r.t),
                        Cell::Float(r.fraction),
                        Cell::Float(r.std_error),
                        Cell::Float(r.envelope),
                        Cell::Bool(r.within_envelope),
                    ]
                })
                .collect(),
        }
    }
}

/// Empirical `P(|x₁| > t)` on the slice for each threshold, all from one
/// set of samples.
pub fn tail_study(study: &TailStudy) -> Result<Vec<TailRow>, HarnessError> {
    let t = &study.thresholds;
    if t.iter().any(|v| !v.is_finite()) || t.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HarnessError::InvalidInput("thresholds must be finite and strictly increasing".into()));
    }
    if study.count == 0 {
        return Err(HarnessError::InvalidInput("count must be positive".into()));
    }
    let geometry = build_geometry(&study.spec)?;
    let n = geometry.n();
    let exceed = stats::chunked(
        study.count,
        |range| {
            let mut scratch = vec![0.0; n];
            let mut x = [0.0];
            let mut counts = vec![0u64; t.len()];
            for i in range {
                geometry.sample_prefix(study.seed, i as u64, &mut scratch, &mut x);
                let a = x[0].abs();
                for (c, &ti) in counts.iter_mut().zip(t) {
                    *c += u64::from(a > ti);
                }
            }
            counts
        },
        |l, r| l.iter().zip(&r).map(|(a, b)| a + b).collect(),
    )
    .unwrap_or_else(|| vec![0; t.len()]);

    let count = study.count as f64;
    Ok(t.iter()
        .zip(exceed)
        .map(|(&ti, c)| {
            let fraction = c as f64 / count;
            let std_error = (fraction * (1.0 - fraction) / count).sqrt();
            let envelope = 2.0 * (-ti * ti / 4.0).exp() + 5.0 * std_error;
            TailRow {
                t: ti,
                fraction,
                std_error,
                envelope,
                within_envelope: fraction <= envelope,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm;
    use crate::vectors::{OrthonormalFamily, SequenceVector};

    fn spec(n: usize) -> SliceSpec {
        let family = OrthonormalFamily::new(vec![SequenceVector::explicit(vec![0.6, 0.8]).unwrap()]).unwrap();
        SliceSpec::new(family, vec![1.0], 2, n).unwrap()
    }

    #[test]
    fn fractions_are_monotone_and_bounded() {
        let s = spec(256);
        let g = build_geometry(&s).unwrap();
        let edge = g.radius() + norm(g.center());
        let rows = tail_study(&TailStudy {
            spec: s,
            thresholds: vec![0.0, 2.0, 3.0, 4.0, 6.0, edge],
            count: 20_000,
            seed: 4,
        })
        .unwrap();
        assert_eq!(rows[0].fraction, 1.0);
        assert_eq!(rows.last().unwrap().fraction, 0.0);
        assert!(rows.windows(2).all(|w| w[1].fraction <= w[0].fraction));
        assert!(rows.iter().all(|r| r.within_envelope), "{rows:?}");
    }

    #[test]
    fn thresholds_must_increase() {
        let study = TailStudy {
            spec: spec(64),
            thresholds: vec![2.0, 1.0],
            count: 10,
            seed: 0,
        };
        assert!(matches!(tail_study(&study), Err(HarnessError::InvalidInput(_))));
    }
}
