//! The invariant suite behind `slice-gauss check`. Sample counts are kept
//! small enough for the whole suite to finish in well under a minute on one
//! core.

use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use slice_gauss::gaussian::projection_complement;
use slice_gauss::harness::{
    convergence_sweep, gs_perturbation_study, monotone_within, ratio_band, rotation_stability_study, tail_study,
    GsStudy, PerturbationMode, ReferenceChoice, RotationStudy, Sweep, TailStudy,
};
use slice_gauss::linalg::{dot, max_abs_diff, norm, sub};
use slice_gauss::quadrature::MAX_BALL_DIMENSION;
use slice_gauss::rng;
use slice_gauss::slice_geometry::integrate_geometry;
use slice_gauss::{
    build_geometry, covariance_from_family, disintegrate_sphere_integral, disintegration_coefficients,
    gaussian_expectation, gram_schmidt, great_circle_integral_quadrature, marginal_covariance, sample_slice,
    slice_integral_mc, sphere_surface_area, ExpectationMethod, GaussianSpec, Integrand, IntegrandKind,
    DMatrix, OrthonormalFamily, SequenceVector, SliceSpec,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// An orthonormal family of `gamma` vectors supported in the first `m`
/// coordinates, from Gram–Schmidt of a Gaussian matrix.
pub fn random_family(seed: u64, index: u64, m: usize, gamma: usize) -> OrthonormalFamily {
    let mut r = rng::stream(seed, index);
    loop {
        let raw: Vec<Vec<f64>> = (0..gamma)
            .map(|_| {
                let mut v = vec![0.0; m];
                rng::fill_normal(&mut r, &mut v);
                v
            })
            .collect();
        if let Ok(basis) = gram_schmidt(&raw) {
            let members = basis.into_iter().map(|v| SequenceVector::explicit(v).expect("finite")).collect();
            return OrthonormalFamily::new(members).expect("Gram-Schmidt output is orthonormal");
        }
    }
}

fn uniform(r: &mut ChaCha8Rng, lo: usize, hi: usize) -> usize {
    r.random_range(lo..=hi)
}

fn marginal_identity() -> Outcome {
    let mut r = rng::stream(1, 0);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let m = uniform(&mut r, 1, 12);
        let gamma = uniform(&mut r, 0, 3.min(m));
        let k = uniform(&mut r, 1, m);
        let family = random_family(11, i, m, gamma);
        let sigma = projection_complement(&family.truncations(m), m);
        let p = vec![0.0; gamma];
        let spec = covariance_from_family(&family, k, &p).map_err(|e| e.to_string())?;
        worst = worst.max(max_abs_diff(&marginal_covariance(&sigma, k), spec.covariance()));
    }
    ensure(worst <= 1e-12, || format!("max entry difference {worst:e}"))?;
    Ok(format!("100 families, max entry difference {worst:e}"))
}

fn covariance_psd() -> Outcome {
    let mut r = rng::stream(2, 0);
    let mut worst = f64::INFINITY;
    for i in 0..500 {
        let gamma = uniform(&mut r, 1, 5);
        let m = uniform(&mut r, gamma, 14);
        let k = uniform(&mut r, 1, 10);
        let family = random_family(12, i, m, gamma);
        let spec = covariance_from_family(&family, k, &vec![0.5; gamma]).map_err(|e| e.to_string())?;
        worst = worst.min(spec.min_eigenvalue());
    }
    ensure(worst >= -1e-10, || format!("min eigenvalue {worst:e}"))?;
    Ok(format!("500 families, min eigenvalue {worst:e}"))
}

fn closed_form_catalog(k: usize) -> Vec<Integrand> {
    let kinds = vec![
        IntegrandKind::CosLinear { a: (0..k).map(|i| 0.5 + 0.3 * i as f64).collect(), b: 0.3 },
        IntegrandKind::GaussBump { c: 0.4, m: (0..k).map(|i| 0.2 * i as f64).collect() },
        IntegrandKind::Product {
            factors: vec![
                IntegrandKind::CosLinear { a: vec![1.0; k], b: -0.2 },
                IntegrandKind::GaussBump { c: 0.25, m: vec![0.1; k] },
            ],
        },
    ];
    kinds.into_iter().map(|kind| Integrand::new(k, kind).expect("valid")).collect()
}

fn closed_form_vs_mc() -> Outcome {
    let family = random_family(13, 0, 3, 1);
    let spec = covariance_from_family(&family, 3, &[0.7]).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (i, f) in closed_form_catalog(3).iter().enumerate() {
        let cf = gaussian_expectation(&spec, f, ExpectationMethod::ClosedForm).map_err(|e| e.to_string())?;
        let mc = gaussian_expectation(&spec, f, ExpectationMethod::MonteCarlo { count: 100_000, seed: i as u64 })
            .map_err(|e| e.to_string())?;
        let z = (cf.value - mc.value).abs() / mc.std_error;
        worst = worst.max(z);
    }
    ensure(worst <= 4.0, || format!("largest deviation {worst:.2} SE"))?;
    Ok(format!("largest deviation {worst:.2} SE"))
}

fn gf_continuity() -> Outcome {
    let family = random_family(14, 0, 3, 1);
    let base = covariance_from_family(&family, 3, &[0.0]).map_err(|e| e.to_string())?;
    let f = &closed_form_catalog(3)[0];
    let a_sq = match f.kind() {
        IntegrandKind::CosLinear { a, .. } => dot(a, a),
        _ => unreachable!(),
    };
    let g0 = gaussian_expectation(&base, f, ExpectationMethod::ClosedForm).map_err(|e| e.to_string())?.value;
    let mut previous = f64::INFINITY;
    for eps in [1e-2, 1e-3, 1e-4] {
        // (1 − ε)L + εI stays PSD and is within ε of L in operator norm
        let l = base.covariance() * (1.0 - eps) + DMatrix::identity(3, 3) * eps;
        let spec = GaussianSpec::new(vec![0.0; 3], l).map_err(|e| e.to_string())?;
        let g = gaussian_expectation(&spec, f, ExpectationMethod::ClosedForm).map_err(|e| e.to_string())?.value;
        let d = (g - g0).abs();
        ensure(d < previous, || format!("difference did not decrease at eps={eps:e}"))?;
        ensure(d <= a_sq * eps.sqrt(), || format!("difference {d:e} above envelope at eps={eps:e}"))?;
        previous = d;
    }
    Ok(format!("smallest difference {previous:e}"))
}

fn disintegration_areas() -> Outcome {
    let mut worst = 0.0f64;
    for big_n in 3..=12usize {
        for k in 1..=3usize.min(big_n - 1) {
            for a in [1.0, (big_n as f64).sqrt()] {
                let fiber = (big_n - k - 1) as u64;
                let inner = |x: &[f64]| {
                    let ax = (a * a - x.iter().map(|v| v * v).sum::<f64>()).max(0.0).sqrt();
                    sphere_surface_area(fiber, ax).value
                };
                let v = disintegrate_sphere_integral(big_n, k, a, inner, 1e-10).map_err(|e| e.to_string())?;
                let exact = sphere_surface_area(big_n as u64 - 1, a).value;
                worst = worst.max(((v - exact) / exact).abs());
            }
        }
    }
    let s2 = disintegrate_sphere_integral(3, 1, 1.0, |x| 2.0 * PI * (1.0 - x[0] * x[0]).sqrt(), 1e-10)
        .map_err(|e| e.to_string())?;
    ensure((s2 - 4.0 * PI).abs() <= 1e-6 * 4.0 * PI, || format!("S^2 area {s2}"))?;
    ensure(worst <= 1e-6, || format!("max relative error {worst:e}"))?;
    Ok(format!("N in 3..=12, k <= 3, max relative error {worst:e}"))
}

fn axis_family(k: usize, gamma: usize) -> OrthonormalFamily {
    OrthonormalFamily::new((0..gamma).map(|i| SequenceVector::explicit(unit(k, i)).expect("finite")).collect())
        .expect("axes are orthonormal")
}

fn unit(k: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; k];
    v[i] = 1.0;
    v
}

fn normalization() -> Outcome {
    let mut worst = 0.0f64;
    for n in [64, 256, 1024] {
        for k in 1..=4usize {
            for gamma in 0..=2usize.min(k) {
                if k - gamma > MAX_BALL_DIMENSION {
                    continue;
                }
                let v = great_circle_integral_quadrature(n, &axis_family(k, gamma), &Integrand::one(k), 1e-12)
                    .map_err(|e| e.to_string())?;
                worst = worst.max((v - 1.0).abs());
            }
        }
    }
    ensure(worst <= 1e-8, || format!("max deviation {worst:e}"))?;
    Ok(format!("max |integral of 1 - 1| = {worst:e}"))
}

fn kernel_domination() -> Outcome {
    for k in 1..=4usize {
        for n in [2 * (k + 2), 2 * (k + 2) + 3, 100, 4096] {
            let r = (n as f64).sqrt();
            for i in 0..=2000 {
                let rho = r * i as f64 / 2000.0;
                let t = rho * rho;
                let kernel = (1.0 - t / n as f64).max(0.0).powf((n - k - 2) as f64 / 2.0);
                ensure(kernel <= (-t / 4.0).exp() + 1e-15, || format!("n={n} k={k} rho={rho}"))?;
            }
        }
    }
    Ok("n >= 2(k+2), k <= 4".into())
}

fn coefficient_limits() -> Outcome {
    let mut worst = 0.0f64;
    for k in 1..=4usize {
        for gamma in 0..=2usize.min(k) {
            for n in [100 * k, 10_000, 1_000_000] {
                let c = disintegration_coefficients(n, k, gamma).map_err(|e| e.to_string())?;
                ensure(c.a_nk > 0.0 && c.a_nk < 2.0 && c.b_nk > 0.0 && c.b_nk <= 1.0, || {
                    format!("out of range at n={n} k={k} gamma={gamma}")
                })?;
                let dev = (c.a_nk * c.b_nk - 1.0).abs();
                ensure(dev <= 10.0 * (k * k) as f64 / n as f64, || format!("n={n} k={k} gamma={gamma}: {dev:e}"))?;
                if n == 10_000 {
                    worst = worst.max(dev);
                }
            }
        }
    }
    ensure(worst <= 0.01, || format!("|ab - 1| = {worst:e} at n = 1e4"))?;
    Ok(format!("max |ab - 1| at n = 1e4: {worst:e}"))
}

fn quadrature_vs_mc() -> Outcome {
    let configs: Vec<(OrthonormalFamily, Integrand)> = vec![
        (OrthonormalFamily::empty(), Integrand::cos_coordinate(1, 0)),
        (random_family(15, 0, 2, 1), closed_form_catalog(2)[1].clone()),
        (random_family(15, 1, 3, 1), closed_form_catalog(3)[0].clone()),
    ];
    let mut worst = 0.0f64;
    for (i, (family, f)) in configs.iter().enumerate() {
        let quad = great_circle_integral_quadrature(512, family, f, 1e-10).map_err(|e| e.to_string())?;
        let spec = SliceSpec::new(family.clone(), vec![0.0; family.gamma()], f.k(), 512).map_err(|e| e.to_string())?;
        let mc = slice_integral_mc(&spec, f, 20_000, 100 + i as u64).map_err(|e| e.to_string())?;
        let z = (quad - mc.value).abs() / mc.std_error.max(1e-300);
        ensure((quad - mc.value).abs() <= 3.0 * mc.std_error + 1e-10, || format!("config {i}: {z:.2} SE"))?;
        worst = worst.max(z);
    }
    Ok(format!("largest deviation {worst:.2} SE"))
}

fn slice_residuals() -> Outcome {
    let family = OrthonormalFamily::new(vec![
        SequenceVector::geometric(vec![], 3f64.sqrt(), 0.5).expect("valid"),
        SequenceVector::geometric(vec![-0.5], 3.0, 0.5).expect("valid"),
    ])
    .map_err(|e| e.to_string())?;
    let n = 256;
    let p = vec![1.5, -0.5];
    let g = build_geometry(&SliceSpec::new(family.clone(), p.clone(), 2, n).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let g0 = build_geometry(&SliceSpec::new(family.clone(), vec![0.0, 0.0], 2, n).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let truncs = family.truncations(n);
    let root = (n as f64).sqrt();
    let radius_rel = (g.radius().powi(2) + dot(g.q(), g.q()) - n as f64).abs() / n as f64;
    ensure(radius_rel <= 1e-12, || format!("radius consistency {radius_rel:e}"))?;
    let mut worst = 0.0f64;
    for (x, y) in sample_slice(&g, 500, 1).iter().zip(sample_slice(&g0, 500, 2)) {
        worst = worst.max((norm(&sub(x, g.center())) - g.radius()).abs() / (1e-9 * root));
        let pushed: Vec<f64> = y.iter().zip(g.center()).map(|(v, c)| g.scale_ratio() * v + c).collect();
        for (u, pi) in truncs.iter().zip(&p) {
            worst = worst.max((dot(x, u) - pi).abs() / (1e-8 * root));
            worst = worst.max((dot(&pushed, u) - pi).abs() / (1e-8 * root));
        }
    }
    ensure(worst <= 1.0, || format!("residual at {worst:.3} of tolerance"))?;
    Ok(format!("largest residual at {worst:.2e} of tolerance"))
}

fn degenerate_family() -> OrthonormalFamily {
    OrthonormalFamily::new(vec![SequenceVector::explicit(vec![0.6, 0.8]).expect("finite")]).expect("unit")
}

fn tails() -> Outcome {
    let spec = SliceSpec::new(degenerate_family(), vec![1.0], 2, 4096).map_err(|e| e.to_string())?;
    let rows = tail_study(&TailStudy {
        spec,
        thresholds: vec![2.0, 3.0, 4.0, 6.0],
        count: 20_000,
        seed: 3,
    })
    .map_err(|e| e.to_string())?;
    ensure(rows.windows(2).all(|w| w[1].fraction <= w[0].fraction), || "not monotone".into())?;
    ensure(rows.iter().all(|r| r.within_envelope), || format!("{rows:?}"))?;
    Ok(format!("P(|x1| > 6) = {:e}", rows[3].fraction))
}

fn gs_stability() -> Outcome {
    let base = vec![vec![1.0, 0.2, 0.0, 0.1], vec![0.3, 1.0, 0.5, 0.0], vec![0.0, 0.4, 1.0, 0.7]];
    let rows = gs_perturbation_study(&GsStudy {
        base,
        epsilons: vec![1e-2, 1e-4, 1e-6],
        seed: 9,
        directions: None,
        unchecked: false,
    })
    .map_err(|e| e.to_string())?;
    let band = ratio_band(&rows);
    ensure(band <= 4.0, || format!("ratio band {band}"))?;
    let delta: f64 = 1e-9;
    let mut control = GsStudy {
        base: vec![vec![1.0, 0.0], vec![delta.cos(), delta.sin()]],
        epsilons: vec![1e-2, 1e-4, 1e-6],
        seed: 0,
        directions: Some(vec![vec![0.0, 0.0], vec![0.0, -1.0]]),
        unchecked: false,
    };
    ensure(gs_perturbation_study(&control).is_err(), || "negative control passed the SP check".into())?;
    control.unchecked = true;
    let bad = gs_perturbation_study(&control).map_err(|e| e.to_string())?;
    ensure(bad.iter().all(|r| r.max_diff > 1.0), || "negative control differences shrank".into())?;
    Ok(format!("ratio band {band:.3}; negative control rejected"))
}

fn rotation() -> Outcome {
    let spec = SliceSpec::new(degenerate_family(), vec![1.0], 2, 1024).map_err(|e| e.to_string())?;
    let rows = rotation_stability_study(&RotationStudy {
        spec,
        f: Integrand::cos_coordinate(2, 0),
        epsilons: vec![0.0, 1e-1, 1e-2, 1e-3],
        count: 20_000,
        seed: 5,
        mode: PerturbationMode::Random,
    })
    .map_err(|e| e.to_string())?;
    ensure(rows[0].difference.to_bits() == 0, || "nonzero difference at eps = 0".into())?;
    ensure(monotone_within(&rows[1..], 2.0), || format!("{rows:?}"))?;
    Ok(format!("difference at eps=1e-3: {:e}", rows[3].difference))
}

fn integrand_properties() -> Outcome {
    let mut r = rng::stream(21, 0);
    let mut draw = |len: usize, scale: f64| {
        let mut v = vec![0.0; len];
        rng::fill_normal(&mut r, &mut v);
        v.iter_mut().for_each(|x| *x *= scale);
        v
    };
    let kinds = [
        IntegrandKind::CosLinear { a: vec![0.7, -1.2], b: 0.4 },
        IntegrandKind::GaussBump { c: 0.8, m: vec![0.3, -0.1] },
        IntegrandKind::RampIndicator { m: 2.0, axis: 1, center: 0.0 },
        IntegrandKind::TanhPoly { constant: 0.1, linear: vec![1.0, 0.5], quadratic: vec![vec![1.0, 0.2], vec![0.0, 0.5]] },
        IntegrandKind::AffineCombination {
            weights: vec![0.5, -2.0],
            terms: vec![
                IntegrandKind::CosLinear { a: vec![1.0, 0.0], b: 0.0 },
                IntegrandKind::Product {
                    factors: vec![
                        IntegrandKind::GaussBump { c: 1.0, m: vec![0.0, 0.0] },
                        IntegrandKind::RampIndicator { m: 1.5, axis: 0, center: 0.0 },
                    ],
                },
            ],
            offset: 0.1,
        },
    ];
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let f = Integrand::new(2, kinds[i % kinds.len()].clone()).expect("valid");
        let s = draw(2, 2.0);
        let x = draw(2, 3.0);
        let shifted: Vec<f64> = x.iter().zip(&s).map(|(a, b)| a + b).collect();
        let g = f.translate(&s).map_err(|e| e.to_string())?;
        let (lhs, rhs) = (g.evaluate(&x).expect("dim"), f.evaluate(&shifted).expect("dim"));
        worst = worst.max((lhs - rhs).abs());
        ensure(rhs.abs() <= f.sup_bound(), || format!("sup bound exceeded: {rhs} > {}", f.sup_bound()))?;
    }
    ensure(worst <= 1e-12, || format!("translation error {worst:e}"))?;
    for t in (0..200).map(|i| -5.0 + 0.05 * i as f64) {
        for m in 1..5 {
            let lo = slice_gauss::integrands::ramp(m as f64, t);
            let hi = slice_gauss::integrands::ramp(m as f64 + 1.0, t);
            ensure(lo <= hi, || format!("ramp not monotone in m at t={t}"))?;
        }
    }
    Ok(format!("1000 translations, max error {worst:e}"))
}

fn determinism() -> Outcome {
    let spec = SliceSpec::new(degenerate_family(), vec![1.0], 2, 512).map_err(|e| e.to_string())?;
    let g = build_geometry(&spec).map_err(|e| e.to_string())?;
    let f = Integrand::cos_coordinate(2, 0);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("pool")
            .install(|| integrate_geometry(&g, &f, 10_000, 77))
    };
    let (a, b) = (run(1).map_err(|e| e.to_string())?, run(4).map_err(|e| e.to_string())?);
    ensure(a == b, || format!("{a:?} vs {b:?}"))?;
    Ok("1 and 4 threads agree bitwise".into())
}

fn convergence() -> Outcome {
    let sweep = Sweep {
        family: degenerate_family().members().to_vec(),
        p: vec![1.0],
        k: 2,
        integrand: IntegrandKind::CosLinear { a: vec![1.0, 0.0], b: 0.0 },
        n_schedule: vec![64, 256, 1024],
        samples: 20_000,
        seed: 8,
        reference: ReferenceChoice::Auto,
        bias_budget: slice_gauss::harness::DEFAULT_BIAS_BUDGET,
    };
    let report = convergence_sweep(&sweep).map_err(|e| e.to_string())?;
    ensure(report.passed(1024), || "final row outside tolerance".into())?;
    ensure(report.error_decreased(), || "error did not decrease".into())?;
    let last = report.rows.last().expect("rows");
    Ok(format!("abs_error at n=1024: {:e}", last.abs_error))
}

/// All checks, in order, with their names.
pub fn suite() -> Vec<(&'static str, fn() -> Outcome)> {
    vec![
        ("marginal identity", marginal_identity),
        ("covariance is PSD", covariance_psd),
        ("closed form agrees with Monte Carlo", closed_form_vs_mc),
        ("G_f continuity envelope", gf_continuity),
        ("disintegration recovers sphere areas", disintegration_areas),
        ("great-circle normalization", normalization),
        ("Gaussian kernel domination", kernel_domination),
        ("coefficient limits", coefficient_limits),
        ("quadrature agrees with slice Monte Carlo", quadrature_vs_mc),
        ("on-slice residuals and scale-translate identity", slice_residuals),
        ("tail finiteness", tails),
        ("Gram-Schmidt stability and negative control", gs_stability),
        ("rotation stability", rotation),
        ("integrand translation and bounds", integrand_properties),
        ("thread-count determinism", determinism),
        ("degenerate-support convergence", convergence),
    ]
}

/// Runs the suite, printing one line per check; returns the exit code.
pub fn run_all() -> i32 {
    let mut failed = 0;
    for (name, check) in suite() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} ({secs:.1}s)");
            }
        }
    }
    if failed == 0 {
        crate::EXIT_OK
    } else {
        println!("{failed} check(s) failed");
        crate::EXIT_NUMERICAL
    }
}
