//! Steady states of the preparation schemes, pinned against an independent
//! dense solve (scipy null space of the same generators).

use bosonet::dynamics::{evolve, fidelity, purity, steady_state, EvolveOptions, SteadyStateOptions};
use bosonet::liouvillian::{
    assemble, bell_full_generator, bell_generator, noon_generator, w_generator, Bath, GeneratorSpec,
};
use bosonet::states::{target_state, thermal_state, Basis, TargetKind, TruncatedSpace};

fn steady(gen: &GeneratorSpec, kind: TargetKind) -> (f64, f64) {
    let l = assemble(gen).unwrap();
    let ss = steady_state(&l, &SteadyStateOptions::default()).unwrap();
    assert!(ss.unique);
    let target = target_state(kind, &gen.space).unwrap();
    (fidelity(&ss.rho, &target.normal).unwrap(), purity(&ss.rho))
}

#[test]
fn bell_steady_fidelity_grows_with_pump() {
    let s = TruncatedSpace::new(vec![4, 4]).unwrap();
    let f: Vec<f64> = [10.0, 25.0, 50.0]
        .iter()
        .map(|&g| steady(&bell_generator(&s, g, Bath::default()).unwrap(), TargetKind::BellPlus).0)
        .collect();
    assert!((f[0] - 0.9083).abs() < 1e-3);
    assert!((f[1] - 0.9340).abs() < 1e-3);
    assert!((f[2] - 0.9431).abs() < 1e-3);
}

#[test]
fn bell_full() {
    let s = TruncatedSpace::new(vec![4, 4]).unwrap();
    let g = bell_full_generator(&s, 50.0, 50.0, 50.0, Bath::default()).unwrap();
    let (f, _) = steady(&g, TargetKind::BellPlus);
    assert!((f - 0.9882).abs() < 1e-3);
}

#[test]
fn noon() {
    let s = TruncatedSpace::new(vec![4, 4]).unwrap();
    let (f, p) = steady(&noon_generator(&s, 50.0, 50.0, None, Bath::default()).unwrap(), TargetKind::Noon);
    assert!((f - 0.9338).abs() < 1e-3 && (p - 0.7646).abs() < 1e-3);
    let (f, p) = steady(
        &noon_generator(&s, 50.0, 50.0, Some((50.0, 50.0)), Bath::default()).unwrap(),
        TargetKind::Noon,
    );
    assert!((f - 0.9775).abs() < 1e-3 && (p - 0.9139).abs() < 1e-3);
}

#[test]
fn w_states() {
    let s = TruncatedSpace::new(vec![4, 3, 3]).unwrap();
    let (f, p) = steady(&w_generator(&s, 3, 50.0, 50.0, Bath::default()).unwrap(), TargetKind::W { n_modes: 3 });
    assert!((f - 0.9480).abs() < 1e-3 && (p - 0.8127).abs() < 1e-3);
    let s = TruncatedSpace::new(vec![4, 3, 3, 3]).unwrap();
    let (f, p) = steady(&w_generator(&s, 4, 50.0, 50.0, Bath::default()).unwrap(), TargetKind::W { n_modes: 4 });
    assert!((f - 0.939).abs() < 5e-3 && (p - 0.785).abs() < 5e-3);
}

#[test]
fn evolution_reaches_the_steady_state() {
    let s = TruncatedSpace::new(vec![4, 4]).unwrap();
    let l = assemble(&bell_generator(&s, 50.0, Bath::default()).unwrap()).unwrap();
    let rho0 = thermal_state(&s, &[0.05, 0.05], Basis::Normal).unwrap();
    let target = target_state(TargetKind::BellPlus, &s).unwrap();
    let opts = EvolveOptions {
        stationary_tol: None,
        ..EvolveOptions::default().with_target(target.normal.clone())
    };
    let traj = evolve(&l, &rho0, 30.0, &opts).unwrap();
    let ss = steady_state(&l, &SteadyStateOptions::default()).unwrap();
    let dist = 2.0 * traj.final_state.trace_distance(&ss.rho).unwrap();
    assert!(dist < 1e-3, "{dist}");
}
