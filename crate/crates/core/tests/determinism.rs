use decohere_core::bec::{make_cat, phase_damp, PhaseDampingParams};
use decohere_core::parallel::NO_PARALLEL_ENV;
use decohere_core::qcore::{wigner, DensityMatrix, Grid1d, WignerSpec};
use decohere_core::relstate::{redundancy_profile, BranchingState};
use decohere_core::squid::SquidParams;
use decohere_core::StateVectorF64;

fn workload() -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let grid = Grid1d::new(-4.0, 8.0 / 127.0, 128).unwrap();
    let psi = StateVectorF64::normalized(
        grid.nodes().iter().map(|&x| decohere_core::Cplx::new((-(x - 1.0f64).powi(2)).exp() + (-(x + 1.0f64).powi(2)).exp(), 0.0)).collect(),
    )
    .unwrap();
    let w = wigner(&DensityMatrix::from_pure(&psi), &grid, &WignerSpec::covering(&grid, 64, 64)).unwrap();
    let st = BranchingState::<f64>::qubit_records(10, 0.4).unwrap();
    let prof = redundancy_profile(&st, 4, 5).unwrap();
    let rho = make_cat(40, 3, 0.2).unwrap().to_density();
    let damped = phase_damp(&rho, &PhaseDampingParams::new(0.01, 0.5).unwrap(), 0.3).unwrap();
    (w.values.into_iter().collect(), prof.mutual_information, damped.entries().iter().map(|z| z.re + z.im).collect())
}

#[test]
fn serial_and_parallel_runs_agree_bitwise() {
    let parallel = workload();
    std::env::set_var(NO_PARALLEL_ENV, "1");
    let serial = workload();
    std::env::remove_var(NO_PARALLEL_ENV);
    assert_eq!(parallel, serial);
}

#[test]
fn parameters_survive_json() {
    let p = SquidParams::new(400.0, 1.0, 1.0, 0.5, 512).unwrap();
    let text = serde_json::to_string(&p).unwrap();
    assert_eq!(serde_json::from_str::<SquidParams<f64>>(&text).unwrap(), p);
}
