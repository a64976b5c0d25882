use decohere_core::bec::{annihilate, calibrate_tau, damp_cat_block, make_cat, Mode, PhaseDampingParams, TauReference};
use decohere_core::macrometer::builtin_catalog;
use decohere_core::matterwave::{
    decoherence_pressure, simulate_fringe_scan, talbot_length, visibility_with_gas, BeamParams, FringeModel, GasEnvironment, GratingStack,
    Incoherence, ScanOptions,
};
use decohere_core::qcore::DensityMatrix;
use decohere_core::relstate::{
    build_chain, fine_grain, neuron_dephase_estimate, object_coherence, rational_weights, redundancy_profile, BranchingState, ChainOverlaps,
};
use decohere_core::squid::{
    cat_diagnostics, evolve_full, evolve_two_level, solve_spectrum, tunneling_probability, wigner_snapshots, DephasingModel, SnapshotSource,
    SquidParams,
};
use num_rational::Ratio;

use crate::config::{Command, RunConfig};
use crate::envelope::ResultEnvelope;
use crate::CliError;

type Out = Result<ResultEnvelope, CliError>;

pub fn dispatch(cfg: &RunConfig) -> Out {
    let mut env = ResultEnvelope::new(cfg);
    match cfg.command {
        Command::SquidSpectrum => squid_spectrum(cfg, &mut env)?,
        Command::SquidTunnel => squid_tunnel(cfg, &mut env)?,
        Command::SquidWigner => squid_wigner(cfg, &mut env)?,
        Command::TalbotScan => talbot_scan(cfg, &mut env)?,
        Command::TalbotVisibility => talbot_visibility(cfg, &mut env)?,
        Command::BecCat => bec_cat(cfg, &mut env)?,
        Command::BecTau => bec_tau(cfg, &mut env)?,
        Command::Envariance => envariance(cfg, &mut env)?,
        Command::Darwinism => darwinism(cfg, &mut env)?,
        Command::Chain => chain(cfg, &mut env)?,
        Command::MacroTable => macro_table(&mut env),
    }
    env.check()?;
    Ok(env)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn squid_params(cfg: &RunConfig) -> Result<SquidParams<f64>, CliError> {
    let p = SquidParams::with_window(cfg.real("c"), cfg.real("beta_l"), cfg.real("i_c"), cfg.real("phi_ext"), cfg.usize("n_points"));
    if (p.phi_ext - p.grid.phi_min).abs() > 1.5 || !(p.phi_ext.abs() < 1e6) {
        return Err(CliError::param("phi_ext", "outside the flux window"));
    }
    Ok(p)
}

fn squid_spectrum(cfg: &RunConfig, env: &mut ResultEnvelope) -> Result<(), CliError> {
    let sp = solve_spectrum(&squid_params(cfg)?, cfg.usize("n_levels"))?;
    env.real("phi", sp.nodes().nodes()).real("potential", sp.potential());
    for (k, psi) in sp.wavefunctions.iter().enumerate() {
        env.real(&format!("psi{k}"), psi.to_vec());
    }
    for (k, e) in sp.energies.iter().enumerate() {
        env.summary(&format!("energy{k}"), *e);
    }
    env.summary("delta_e", sp.delta_e)
        .summary("barrier", sp.barrier)
        .summary("mean_flux_l", sp.mean_flux_l)
        .summary("mean_flux_r", sp.mean_flux_r);
    Ok(())
}

fn squid_tunnel(cfg: &RunConfig, env: &mut ResultEnvelope) -> Result<(), CliError> {
    let sp = solve_spectrum(&squid_params(cfg)?, cfg.usize("n_levels"))?;
    let de = sp.delta_e;
    let gamma = cfg.real("gamma_ratio") * de;
    let times: Vec<f64> = linspace(0.0, cfg.real("t_max") / de, cfg.usize("n_times"));
    let exact: Vec<f64> = times.iter().map(|&t| tunneling_probability(de, t)).collect();
    let (p_l, coherence) = match cfg.text("method") {
        "full" => {
            if gamma != 0.0 {
                return Err(CliError::param("gamma_ratio", "full evolution is closed; use method = two-level for dephasing"));
            }
            let ev = evolve_full(&sp, &sp.l_state, &times)?;
            env.summary("retained_weight", ev.retained_weight);
            let mut p = Vec::with_capacity(times.len());
            let mut coh = Vec::with_capacity(times.len());
            for s in &ev.states {
                let (l, r) = (sp.l_state.inner(s)?, sp.r_state.inner(s)?);
                p.push(l.norm_sqr());
                coh.push((l * r.conj()).norm());
            }
            (p, coh)
        }
        _ => {
            let tr = evolve_two_level(de, &DephasingModel::new(gamma)?, &DensityMatrix::diagonal(&[1.0, 0.0])?, &times)?;
            let coh = tr.rho_t.iter().map(|r| r.get(0, 1).norm()).collect();
            (tr.p_l, coh)
        }
    };
    let dev = p_l.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    env.real("t", times).real("p_l", p_l).real("p_l_coherent", exact).real("coherence_lr", coherence);
    env.summary("delta_e", de).summary("gamma", gamma).summary("max_deviation_from_coherent", dev);
    Ok(())
}

fn squid_wigner(cfg: &RunConfig, env: &mut ResultEnvelope) -> Result<(), CliError> {
    let params = squid_params(cfg)?;
    let sp = solve_spectrum(&params, 2)?;
    let gamma = cfg.real("gamma_ratio") * sp.delta_e;
    if !(gamma > 0.0) {
        return Err(CliError::param("gamma_ratio", "must be positive to set the snapshot time scale"));
    }
    let n_snap = cfg.usize("n_snapshots");
    let gt: Vec<f64> = if n_snap == 1 { vec![0.0] } else { linspace(0.0, cfg.real("gamma_t_max"), n_snap) };
    let times: Vec<f64> = gt.iter().map(|g| g / gamma).collect();
    let initial = DensityMatrix::from_pure(&decohere_core::qcore::StateVector::from_real(&[std::f64::consts::FRAC_1_SQRT_2; 2])?);
    let tr = evolve_two_level(sp.delta_e, &DephasingModel::new(gamma)?, &initial, &times)?;
    let spec = sp.default_wigner_spec(cfg.usize("nx"), cfg.usize("np"));
    let grids = wigner_snapshots(&sp, SnapshotSource::TwoLevel(&tr), &spec)?;
    let sep = sp.mean_flux_r - sp.mean_flux_l;
    let (mut snap, mut gcol, mut xs, mut ps, mut ws) = (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (k, w) in grids.iter().enumerate() {
        for a in 0..w.nx {
            for b in 0..w.np {
                snap.push(k as f64);
                gcol.push(gt[k]);
                xs.push(w.x_center(a));
                ps.push(w.p_center(b));
                ws.push(w.values[[a, b]]);
            }
        }
    }
    let first = &grids[0];
    let last = grids.last().expect("at least one snapshot");
    let (d0, d1) = (cat_diagnostics(first, params.phi_ext, sep), cat_diagnostics(last, params.phi_ext, sep));
    env.real("snapshot", snap).real("gamma_t", gcol).real("phi", xs).real("p", ps).real("w", ws);
    env.summary("delta_e", sp.delta_e)
        .summary("gamma", gamma)
        .summary("normalization_first", first.normalization())
        .summary("normalization_last", last.normalization())
        .summary("min_first", d0.min_value)
        .summary("interference_first", d0.interference_amplitude)
        .summary("interference_last", d1.interference_amplitude)
        .summary("peak_last", d1.peak_amplitude);
    Ok(())
}

fn talbot_scan(cfg: &RunConfig, env: &mut ResultEnvelope) -> Result<(), CliError> {
    let beam = BeamParams::from_amu(cfg.real("mass_amu"), cfg.real("velocity"))?;
    let (d, f) = (cfg.real("d"), cfg.real("open_fraction"));
    let lt = talbot_length(d, beam.lambda_db)?;
    let l = cfg.real("l_over_talbot") * lt;
    let stack = GratingStack::new(d, f, l, cfg.usize("n_slits"))?;
    let n_angles = cfg.usize("n_angles");
    let spread = if n_angles == 1 { 0.0 } else { cfg.real("spread_factor") * f * d / l };
    let opts = ScanOptions {
        n_scan: cfg.usize("n_scan"),
        incoherence: Incoherence { n_angles, angular_spread: Some(spread) },
        model: if cfg.text("model") == "ray" { FringeModel::Ray } else { FringeModel::Wave },
        samples_per_period: cfg.usize("samples_per_period"),
        pad_factor: cfg.usize("pad_factor"),
    };
    let scan = simulate_fringe_scan(&beam, &stack, &opts)?;
    env.real("shift", scan.shifts).real("counts", scan.counts);
    env.summary("visibility", scan.visibility)
        .summary("lambda", scan.lambda)
        .summary("talbot_length", lt)
        .summary("l", l)
        .summary("angular_spread", scan.angular_spread);
    Ok(())
}

fn talbot_visibility(cfg: &RunConfig, env: &mut ResultEnvelope) -> Result<(), CliError> {
    let gas = GasEnvironment { pressure: 0.0, temperature: cfg.real("temperature"), sigma_eff: cfg.real("sigma_eff") };
    let p0 = decoherence_pressure(&gas, cfg.real("l"))?;
    let v0 = cfg.real("v0");
    let n = cfg.usize("n_pressures");
    let r = cfg.real("p_max_over_p0");
    let p: Vec<f64> = (0..n).map(|i| p0 * (r * i as f64 / (n - 1) as f64)).collect();
    let v = p.iter().map(|&pi| visibility_with_gas(v0, pi, p0)).collect::<Result<Vec<_>, _>>()?;
    let ratio: Vec<f64> = if v0 > 0.0 { v.iter().map(|x| x / v0).collect() } else { vec![0.0; n] };
    env.real("pressure", p).real("visibility", v).real("ratio", ratio);
    env.summary("p0", p0).summary("ratio_at_p0", visibility_with_gas(1.0, p0, p0)?);
    Ok(())
}

fn bec_cat(cfg: &RunConfig, env: &mut ResultEnvelope) -> Result<(), CliError> {
    let (big_n, n) = (cfg.usize("n_atoms"), cfg.usize("n"));
    if 2 * n >= big_n {
        return Err(CliError::param("n", format!("need 2 n < n_atoms = {big_n}")));
    }
    let phi = cfg.real("phi");
    let params = PhaseDampingParams::new(cfg.real("kappa"), cfg.real("omega"))?;
    let times = linspace(0.0, cfg.real("t_max"), cfg.usize("n_times"));
    let k = (big_n - 2 * n) as f64;
    let mut coh = Vec::with_capacity(times.len());
    for &t in &times {
        coh.push(damp_cat_block(big_n as u64, n as u64, phi, &params, t)?.get(0, 1).norm());
    }
    let expected: Vec<f64> = times.iter().map(|t| 0.5 * (-k * k * params.kappa * t).exp()).collect();
    let loss = annihilate(&make_cat(big_n, n, phi)?, Mode::First)?;
    env.real("t", times).real("coherence", coh).real("coherence_expected", expected);
    env.summary("loss_norm", loss.norm).summary("post_loss_components", loss.state.as_ref().map_or(0.0, |s| s.support() as f64));
    Ok(())
}

fn bec_tau(cfg: &RunConfig, env: &mut ResultEnvelope) -> Result<(), CliError> {
    let cal = calibrate_tau(TauReference {
        a: cfg.real("scattering_length"),
        n_nc: cfg.real("ref_n_nc"),
        n: cfg.real("ref_n"),
        tau_d: cfg.real("ref_tau_d"),
    })?;
    let (n_nc, n_target) = (cfg.real("n_nc"), cfg.real("n"));
    let (lo, hi) = (cfg.real("ref_n").log10(), n_target.log10());
    let ns: Vec<f64> = linspace(lo, hi, cfg.usize("n_sweep")).into_iter().map(|e| 10f64.powf(e)).collect();
    let taus = ns.iter().map(|&n| cal.predict_at(n_nc, n)).collect::<Result<Vec<_>, _>>()?;
    let tau = cal.predict_at(n_nc, n_target)?;
    env.real("n", ns).real("tau_d", taus);
    env.summary("c", cal.c).summary("tau_d", tau).summary("log10_tau_d", tau.log10());
    Ok(())
}

fn parse_weights(raw: &str) -> Result<Vec<Ratio<u64>>, CliError> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.iter().all(|p| p.contains('/')) {
        return parts.iter().map(|p| p.parse::<Ratio<u64>>().map_err(|_| CliError::param("weights", format!("bad fraction {p:?}")))).collect();
    }
    let xs = parts.iter().map(|p| p.parse::<f64>().map_err(|_| CliError::param("weights", format!("bad weight {p:?}")))).collect::<Result<Vec<_>, _>>()?;
    rational_weights(&xs).map_err(|e| CliError::param("weights", e.to_string()))
}

fn envariance(cfg: &RunConfig, env: &mut ResultEnvelope) -> Result<(), CliError> {
    let weights = parse_weights(cfg.text("weights"))?;
    let fg = fine_grain::<f64>(&weights)?;
    let probs: Vec<f64> = fg.probabilities.iter().map(|r| *r.numer() as f64 / *r.denom() as f64).collect();
    env.real("branch", (0..weights.len()).map(|i| i as f64).collect())
        .real("count", fg.counts.iter().map(|&m| m as f64).collect())
        .real("probability", probs)
        .text("exact", fg.probabilities.iter().map(|r| r.to_string()).collect());
    env.summary("denominator", fg.denominator as f64).summary_text("expanded_state", if fg.expanded.is_some() { "built" } else { "skipped" });
    Ok(())
}

fn darwinism(cfg: &RunConfig, env: &mut ResultEnvelope) -> Result<(), CliError> {
    let n = cfg.usize("n_fragments");
    let max_size = cfg.usize("max_size");
    if max_size > n {
        return Err(CliError::param("max_size", format!("exceeds n_fragments = {n}")));
    }
    let st = BranchingState::qubit_records(n, cfg.real("record_overlap"))?;
    let prof = redundancy_profile(&st, max_size, cfg.seed)?;
    env.real("fragment_size", prof.fragment_sizes.iter().map(|&k| k as f64).collect())
        .real("mutual_information", prof.mutual_information)
        .real("deficit", prof.deficits)
        .real("subsets", prof.subsets_evaluated.iter().map(|&k| k as f64).collect());
    env.summary("system_entropy", prof.system_entropy);
    Ok(())
}

fn chain(cfg: &RunConfig, env: &mut ResultEnvelope) -> Result<(), CliError> {
    let ov = ChainOverlaps { photon: cfg.real("eps_photon"), rhodopsin: cfg.real("eps_rhodopsin"), neurons: cfg.real("eps_neurons") };
    let coh = object_coherence(&build_chain(ov)?)?;
    let rate = 1.0 / cfg.real("tau");
    let times = linspace(0.0, cfg.real("t_max"), cfg.usize("n_times"));
    let factor = times.iter().map(|&t| neuron_dephase_estimate(rate, t)).collect::<Result<Vec<_>, _>>()?;
    let last = *factor.last().expect("n_times >= 2");
    env.real("t", times).real("neuron_coherence", factor);
    env.summary("object_coherence", coh)
        .summary("object_coherence_predicted", 0.5 * ov.photon * ov.rhodopsin * ov.neurons)
        .summary("neuron_coherence_at_t_max", last);
    Ok(())
}

fn macro_table(env: &mut ResultEnvelope) {
    let cat = builtin_catalog();
    env.text("name", cat.iter().map(|r| r.name.clone()).collect())
        .real("s_ext", cat.iter().map(|r| r.s_ext).collect())
        .real("s_ent", cat.iter().map(|r| r.s_ent).collect())
        .real("product", cat.iter().map(|r| r.product).collect())
        .text("status", cat.iter().map(|r| r.status.as_str().to_string()).collect())
        .text("notes", cat.iter().map(|r| r.notes.clone()).collect());
}
