//! Log-space Gamma helpers.
//!
//! `ln Γ` itself comes from `statrs`. Ratios `Γ(x + h) / (Γ(x) x^h)` with
//! large `x` are evaluated from the difference of two Stirling expansions so
//! the `O(x ln x)` parts cancel analytically instead of numerically.

use std::f64::consts::PI;

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Stirling remainder `ln Γ(z) - [(z - 1/2) ln z - z + ln(2π)/2]` for `z >= 10`.
fn stirling_tail(z: f64) -> f64 {
    let z2 = z * z;
    let inv = 1.0 / z;
    let inv2 = 1.0 / z2;
    inv * (1.0 / 12.0
        - inv2
            * (1.0 / 360.0
                - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 * (1.0 / 1188.0)))))
}

const STIRLING_MIN: f64 = 10.0;

/// `ln[Γ(x + h) / (Γ(x) · x^h)]` for `x > 0`, `x + h > 0`.
///
/// Tends to 0 as `x → ∞` for fixed `h`.
pub fn ln_gamma_ratio_scaled(x: f64, h: f64) -> f64 {
    assert!(x > 0.0 && x + h > 0.0, "ln_gamma_ratio_scaled: x={x}, h={h}");
    if h == 0.0 {
        return 0.0;
    }
    // shift both arguments up by an integer s with Γ(z + 1) = z Γ(z)
    let shift = if x.min(x + h) < STIRLING_MIN {
        (STIRLING_MIN - x.min(x + h)).ceil()
    } else {
        0.0
    };
    let mut correction = 0.0;
    let mut j = 0.0;
    while j < shift {
        correction += ((x + j) / (x + h + j)).ln();
        j += 1.0;
    }
    let y = x + shift;
    // (y + h - 1/2) ln(1 + h/y) - h + [tail(y + h) - tail(y)]
    let core = (y + h - 0.5) * (h / y).ln_1p() - h + (stirling_tail(y + h) - stirling_tail(y));
    core + h * (y / x).ln() + correction
}

/// `ln c_d` where `c_d = 2 π^{(d+1)/2} / Γ((d+1)/2)` is the area of the unit `d`-sphere.
pub fn ln_unit_sphere_area(d: u64) -> f64 {
    let half = (d as f64 + 1.0) / 2.0;
    2f64.ln() + half * PI.ln() - ln_gamma(half)
}
