use decohere_core::matterwave::*;
use decohere_core::qcore::SI;
use num_complex::Complex;

const D: f64 = 1e-6;

fn beam(v: f64) -> BeamParams<f64> {
    BeamParams::from_amu(840.0, v).unwrap()
}

fn coherent() -> ScanOptions<f64> {
    ScanOptions { incoherence: Incoherence::coherent(), ..ScanOptions::default() }
}

/// Intensity behind a binary grating of `n_slits` slits from a direct
/// Fresnel-kernel sum over finely sampled source points.
fn fresnel_sum(lambda: f64, l: f64, n_slits: usize, f: f64, xs: &[f64]) -> Vec<f64> {
    let sub = 128;
    let dxs = D / sub as f64;
    let mut src = Vec::new();
    for m in 0..n_slits {
        let c = (m as f64 - (n_slits as f64 - 1.0) / 2.0) * D;
        for j in 0..sub {
            let x = c - D / 2.0 + (j as f64 + 0.5) * dxs;
            if (x - c).abs() < f * D / 2.0 {
                src.push(x);
            }
        }
    }
    let k = 2.0 * std::f64::consts::PI / lambda;
    xs.iter()
        .map(|&x| {
            let mut acc = Complex::new(0.0, 0.0);
            for &s in &src {
                acc += Complex::from_polar(1.0, k * (x - s).powi(2) / (2.0 * l));
            }
            (acc * dxs).norm_sqr() / (lambda * l)
        })
        .collect()
}

fn oracle_visibility(lambda: f64, l: f64, n_slits: usize, f: f64) -> f64 {
    // Window |x| < n_slits d / 4 sampled at d/64, masked by grating 3.
    let spp = 64;
    let half = (n_slits * spp / 4) as i64;
    let xs: Vec<f64> = (-half + 1..half).map(|j| j as f64 * D / spp as f64).collect();
    let inten = fresnel_sum(lambda, l, n_slits, f, &xs);
    let counts: Vec<f64> = (0..32)
        .map(|k| {
            let s = k as f64 * D / 32.0;
            let off = (n_slits as f64 - 1.0) / 2.0 * D;
            xs.iter()
                .zip(&inten)
                .filter(|(x, _)| {
                    let u = (**x - s + off).rem_euclid(D);
                    u < f * D / 2.0 || u > D - f * D / 2.0
                })
                .map(|(_, i)| *i)
                .sum()
        })
        .collect();
    let max = counts.iter().cloned().fold(f64::MIN, f64::max);
    let min = counts.iter().cloned().fold(f64::MAX, f64::min);
    (max - min) / (max + min)
}

#[test]
fn self_image_at_talbot_length() {
    let b = beam(100.0);
    let stack = GratingStack::at_talbot_length(D, 0.5, b.lambda_db, 16).unwrap();
    let scan = simulate_fringe_scan(&b, &stack, &coherent()).unwrap();
    assert!(scan.visibility > 0.5, "{}", scan.visibility);
    assert!(scan.counts.iter().all(|&c| c >= 0.0));
    let oracle = oracle_visibility(b.lambda_db, stack.l, 16, 0.5);
    assert!((scan.visibility - oracle).abs() < 0.03, "{} vs {}", scan.visibility, oracle);
    let period = scan_period(&b, &stack, &coherent(), 4).unwrap();
    assert!((period / D - 1.0).abs() < 0.02, "{period}");
}

#[test]
fn half_talbot_length_loses_period_d_contrast() {
    let b = beam(100.0);
    let lt = talbot_length(D, b.lambda_db).unwrap();
    let full = simulate_fringe_scan(&b, &GratingStack::new(D, 0.5, lt, 16).unwrap(), &coherent()).unwrap();
    let half = simulate_fringe_scan(&b, &GratingStack::new(D, 0.5, lt / 2.0, 16).unwrap(), &coherent()).unwrap();
    assert!(half.visibility < 0.2 * full.visibility, "{} {}", half.visibility, full.visibility);
    let oracle = oracle_visibility(b.lambda_db, lt / 2.0, 16, 0.5);
    assert!(oracle < 0.2 * full.visibility, "{oracle}");
}

#[test]
fn aperture_converged() {
    let b = beam(100.0);
    let v16 = simulate_fringe_scan(&b, &GratingStack::at_talbot_length(D, 0.5, b.lambda_db, 16).unwrap(), &coherent()).unwrap();
    let v32 = simulate_fringe_scan(&b, &GratingStack::at_talbot_length(D, 0.5, b.lambda_db, 32).unwrap(), &coherent()).unwrap();
    assert!(((v32.visibility - v16.visibility) / v32.visibility).abs() < 0.02);
}

#[test]
fn scan_is_periodic_in_d() {
    let b = beam(100.0);
    let stack = GratingStack::at_talbot_length(D, 0.5, b.lambda_db, 16).unwrap();
    let sim = FringeSimulator::new(&b, &stack, &ScanOptions::default()).unwrap();
    for k in 0..8 {
        let s = k as f64 * D / 8.0;
        let (a, c) = (sim.counts(s), sim.counts(s + D));
        assert!((a - c).abs() <= 1e-9 * a.abs().max(1.0));
    }
}

#[test]
fn moire_shadow_ignores_wavelength() {
    let b1 = beam(100.0);
    let b2 = BeamParams::new(b1.mass, 100.0 / 1.3).unwrap();
    let stack = GratingStack::at_talbot_length(D, 0.5, b1.lambda_db, 16).unwrap();
    let wave = ScanOptions::default();
    let ray = ScanOptions { model: FringeModel::Ray, ..ScanOptions::default() };
    let vw1 = simulate_fringe_scan(&b1, &stack, &wave).unwrap().visibility;
    let vw2 = simulate_fringe_scan(&b2, &stack, &wave).unwrap().visibility;
    let vr1 = simulate_fringe_scan(&b1, &stack, &ray).unwrap().visibility;
    let vr2 = simulate_fringe_scan(&b2, &stack, &ray).unwrap().visibility;
    assert!((vw1 - vw2).abs() > 5.0 * (vr1 - vr2).abs(), "{vw1} {vw2} {vr1} {vr2}");
    assert!((vw1 - vw2).abs() > 0.05);
}

#[test]
fn undersampled_geometry_is_rejected() {
    let b = beam(100.0);
    let lt = talbot_length(D, b.lambda_db).unwrap();
    let short = GratingStack::new(D, 0.5, lt / 100.0, 16).unwrap();
    assert!(matches!(simulate_fringe_scan(&b, &short, &coherent()), Err(decohere_core::Error::Resolution(_))));
}

#[test]
fn de_broglie_band() {
    let fast = de_broglie(840.0 * SI.amu, 220.0).unwrap();
    let slow = de_broglie(840.0 * SI.amu, 80.0).unwrap();
    assert!((fast - 2.159_26e-12).abs() / fast < 1e-4);
    assert!((slow - 5.937_97e-12).abs() / slow < 1e-4);
}
