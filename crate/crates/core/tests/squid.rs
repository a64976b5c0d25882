use decohere_core::qcore::{DensityMatrix, StateVector};
use decohere_core::squid::*;
use std::f64::consts::PI;

fn spectrum(c: f64, n: usize) -> SquidSpectrum<f64> {
    solve_spectrum(&SquidParams::with_window(c, 1.0, 1.0, 0.5, n), 2).unwrap()
}

#[test]
fn splitting_is_grid_converged() {
    let a = spectrum(200.0, 1024).delta_e;
    let b = spectrum(200.0, 2048).delta_e;
    assert!(((a - b) / b).abs() < 1e-3, "{a} {b}");
}

#[test]
fn log_splitting_is_linear_in_sqrt_c() {
    let cs = [100.0f64, 200.0, 400.0, 800.0, 1600.0];
    let pts: Vec<(f64, f64)> = cs.iter().map(|&c| (c.sqrt(), spectrum(c, 1024).delta_e.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let r2 = sxy * sxy / (sxx * syy);
    assert!(sxy < 0.0);
    assert!(r2 > 0.99, "{r2}");
}

#[test]
fn left_state_tunnels_coherently() {
    let s = spectrum(200.0, 1024);
    let period = 2.0 * PI / s.delta_e;
    let times: Vec<f64> = (0..=64).map(|i| period * i as f64 / 64.0).collect();
    let ev = evolve_full(&s, &s.l_state, &times).unwrap();
    let mut sq = 0.0;
    for (t, st) in times.iter().zip(&ev.states) {
        assert!((st.norm_sqr() - 1.0).abs() < 1e-8);
        let p = st.fidelity(&s.l_state).unwrap();
        sq += (p - tunneling_probability(s.delta_e, *t)).powi(2);
    }
    assert!((sq / times.len() as f64).sqrt() < 0.02);
    assert!(ev.states.last().unwrap().fidelity(&s.l_state).unwrap() > 0.99);
}

#[test]
fn strong_dephasing_freezes_tunnelling() {
    let de = spectrum(200.0, 1024).delta_e;
    let model = DephasingModel::new(100.0 * de).unwrap();
    let times: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1 / de).collect();
    let rho0 = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
    let traj = evolve_two_level(de, &model, &rho0, &times).unwrap();
    assert!(traj.p_l.iter().all(|&p| p > 0.9));
    for r in &traj.rho_t {
        assert!((r.trace() - 1.0).abs() < 1e-9);
        assert!(r.eigenvalues().unwrap()[0] > -1e-9);
    }
}

#[test]
fn wigner_fringes_decay_while_peaks_stay() {
    let s = spectrum(800.0, 1024);
    let gamma = 10.0 * s.delta_e;
    let times: Vec<f64> = (0..=5).map(|i| i as f64 / gamma).collect();
    let plus = StateVector::normalized(vec![1.0.into(), 1.0.into()]).unwrap().to_density();
    let traj = evolve_two_level(s.delta_e, &DephasingModel::new(gamma).unwrap(), &plus, &times).unwrap();
    let spec = s.default_wigner_spec(97, 96);
    let grids = wigner_snapshots(&s, SnapshotSource::TwoLevel(&traj), &spec).unwrap();
    let sep = s.mean_flux_r - s.mean_flux_l;
    let diag: Vec<_> = grids.iter().map(|g| cat_diagnostics(g, 0.5, sep)).collect();
    for g in &grids {
        assert!((g.normalization() - 1.0).abs() < 1e-6, "{}", g.normalization());
    }
    assert!(diag[0].min_value < 0.0);
    let last = diag.last().unwrap();
    assert!(last.interference_amplitude <= 0.01 * last.peak_amplitude, "{:?}", last);
    for d in &diag {
        assert!(d.left_peak.0.abs_diff(diag[0].left_peak.0) <= 1);
        assert!(d.right_peak.0.abs_diff(diag[0].right_peak.0) <= 1);
    }
    for w in diag.windows(2) {
        assert!(w[1].interference_amplitude <= w[0].interference_amplitude + 1e-3 * w[0].peak_amplitude);
    }
}
