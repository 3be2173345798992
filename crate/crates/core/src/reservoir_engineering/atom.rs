use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::couplings::{effective_couplings, DriveParams};
use crate::error::{Error, Result};
use crate::liouvillian::{ChannelKind, ChannelSpec};

type C = Complex64;

/// Largest `|ζ|τ` accepted by [`repeated_interaction_check`].
pub const MAX_PERTURBATIVE_ZETA_TAU: f64 = 0.3;
/// Smallest acceptable `R²` of the exponential fit.
pub const MIN_R_SQUARED: f64 = 0.95;

/// `exp(-i H t)` for Hermitian `H`.
fn unitary(h: &DMatrix<C>, t: f64) -> DMatrix<C> {
    let eig = h.clone().symmetric_eigen();
    let phases = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&e| C::from_polar(1.0, -e * t)),
    );
    let v = &eig.eigenvectors;
    v * DMatrix::from_diagonal(&phases) * v.adjoint()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomPass {
    /// Probability that the atom left `|e⟩` by the end of the pass.
    pub probability: f64,
    /// Largest such probability at any step of the pass.
    pub max_probability: f64,
    pub steps: usize,
    pub dt: f64,
}

/// Propagate `|e⟩ ⊗ |n⟩` for `duration` under the interaction-picture
/// Hamiltonian `Σ_n ζ_n e^{iφ_n t} |n+1⟩⟨n| σ_ge + h.c.`.
///
/// The drive must already be tuned so that `φ_ℓ = 0`. Steps are
/// midpoint exponentials no longer than `1/(50 f_max)`, where `f_max` is
/// the largest `|φ_n|` or `|ζ_n|` involved.
pub fn simulate_atom_pass(p: &DriveParams, field_n: usize, duration: f64) -> Result<AtomPass> {
    let c = effective_couplings(p)?;
    let phi_ell = c.phi_n(p.ell_target);
    let scale = c.xi.abs().max(c.zeta.norm());
    if phi_ell.abs() > 1e-9 * scale {
        return Err(Error::MissingTuning { phi: phi_ell });
    }
    if !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::invalid("atom pass", format!("duration {duration} must be >= 0")));
    }
    // |g,n⟩ ↦ n, |e,n⟩ ↦ d + n
    let d = field_n + 2;
    let fmax = (0..d - 1)
        .map(|n| c.phi_n(n).abs().max(c.zeta_n(n).norm()))
        .fold(0.0, f64::max);
    let steps = if duration == 0.0 || fmax == 0.0 {
        usize::from(duration > 0.0)
    } else {
        (duration * 50.0 * fmax).ceil() as usize
    };
    let dt = if steps == 0 { 0.0 } else { duration / steps as f64 };

    let mut psi = DVector::<C>::zeros(2 * d);
    psi[d + field_n] = C::new(1.0, 0.0);
    let ground = |psi: &DVector<C>| psi.rows(0, d).norm_squared();
    let mut max_p: f64 = 0.0;
    let mut h = DMatrix::<C>::zeros(2 * d, 2 * d);
    for k in 0..steps {
        let t = (k as f64 + 0.5) * dt;
        for n in 0..d - 1 {
            let v = c.zeta_n(n) * C::from_polar(1.0, c.phi_n(n) * t);
            h[(n + 1, d + n)] = v;
            h[(d + n, n + 1)] = v.conj();
        }
        psi = unitary(&h, dt) * psi;
        max_p = max_p.max(ground(&psi));
    }
    Ok(AtomPass {
        probability: ground(&psi),
        max_probability: max_p,
        steps,
        dt,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatedInteraction {
    /// Fitted decay rate of the initial level.
    pub rate: f64,
    /// `r (gτ)²` for the coupling `g` of the channel.
    pub predicted: f64,
    pub relative_error: f64,
    pub r_squared: f64,
    /// `gτ`.
    pub coupling_tau: f64,
    /// Population of the initial Fock level after each atom, starting at 1.
    pub populations: Vec<f64>,
    /// Field populations after the last atom.
    pub final_populations: Vec<f64>,
}

struct Kernel {
    /// atom level every atom starts in: 0 = g, 1 = e
    atom: usize,
    start: usize,
    d: usize,
    /// coupling of the initial level, which sets the predicted rate
    coupling: f64,
    /// `(n, g)` for each term `g |n+1⟩⟨n| σ_ge + h.c.`
    terms: Vec<(usize, f64)>,
}

fn kernel(p: &DriveParams, channel: &ChannelSpec) -> Result<Kernel> {
    let c = effective_couplings(p)?;
    let z = c.zeta.norm();
    Ok(match channel.kind {
        ChannelKind::SelectiveAbsorption { ell } => Kernel {
            atom: 1,
            start: ell,
            d: ell + 3,
            coupling: z * ((ell + 1) as f64).sqrt(),
            terms: vec![(ell, z * ((ell + 1) as f64).sqrt())],
        },
        ChannelKind::SelectiveEmission { ell } => Kernel {
            atom: 0,
            start: ell + 1,
            d: ell + 3,
            coupling: z * ((ell + 1) as f64).sqrt(),
            terms: vec![(ell, z * ((ell + 1) as f64).sqrt())],
        },
        // resonant two-level atoms in |g⟩: Jaynes-Cummings with g = |ζ|
        ChannelKind::Cooling => Kernel {
            atom: 0,
            start: 1,
            d: 4,
            coupling: z,
            terms: (0..3).map(|n| (n, z * ((n + 1) as f64).sqrt())).collect(),
        },
        ChannelKind::ThermalEmission | ChannelKind::ThermalAbsorption => {
            return Err(Error::Unsupported(
                "thermal channels are not produced by an atomic beam".into(),
            ))
        }
    })
}

/// Send `n_atoms` atoms through the mode one after another, each
/// interacting for `τ` under the selective Hamiltonian of `channel` and
/// then discarded, and fit the decay of the initial Fock level against
/// `t = k / r`.
pub fn repeated_interaction_check(
    p: &DriveParams,
    channel: &ChannelSpec,
    n_atoms: usize,
) -> Result<RepeatedInteraction> {
    p.validate()?;
    if p.r == 0.0 {
        return Err(Error::ZeroParameter("r"));
    }
    if n_atoms < 2 {
        return Err(Error::invalid("repeated interaction", "need at least two atoms"));
    }
    let k = kernel(p, channel)?;
    let x = k.coupling * p.tau;
    if x > MAX_PERTURBATIVE_ZETA_TAU * (1.0 + 1e-12) {
        return Err(Error::invalid(
            "repeated interaction",
            format!("coupling*tau = {x:.3} is outside the perturbative range (<= {MAX_PERTURBATIVE_ZETA_TAU})"),
        ));
    }
    if x == 0.0 {
        return Err(Error::ZeroParameter("zeta"));
    }

    let d = k.d;
    let mut h = DMatrix::<C>::zeros(2 * d, 2 * d);
    for &(n, g) in &k.terms {
        h[(n + 1, d + n)] = C::new(g, 0.0);
        h[(d + n, n + 1)] = C::new(g, 0.0);
    }
    let u = unitary(&h, p.tau);
    let u_dag = u.adjoint();

    let mut field = DMatrix::<C>::zeros(d, d);
    field[(k.start, k.start)] = C::new(1.0, 0.0);
    let mut pops = Vec::with_capacity(n_atoms + 1);
    pops.push(1.0);
    let mut joint = DMatrix::<C>::zeros(2 * d, 2 * d);
    for _ in 0..n_atoms {
        joint.fill(C::new(0.0, 0.0));
        joint
            .view_mut((k.atom * d, k.atom * d), (d, d))
            .copy_from(&field);
        let out = &u * &joint * &u_dag;
        field = out.view((0, 0), (d, d)) + out.view((d, d), (d, d));
        pops.push(field[(k.start, k.start)].re);
    }

    let (slope, r_squared) = log_linear_fit(&pops, p.r);
    if r_squared < MIN_R_SQUARED {
        return Err(Error::NonExponential { r_squared });
    }
    let rate = -slope;
    let predicted = p.r * x * x;
    Ok(RepeatedInteraction {
        rate,
        predicted,
        relative_error: (rate - predicted).abs() / predicted,
        r_squared,
        coupling_tau: x,
        populations: pops,
        final_populations: (0..d).map(|n| field[(n, n)].re).collect(),
    })
}

/// Least-squares slope of `ln p_k` against `t_k = k / r`, and its `R²`.
/// Populations below 1e-12 are left out.
fn log_linear_fit(pops: &[f64], r: f64) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = pops
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 1e-12)
        .map(|(k, &p)| (k as f64 / r, p.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return (f64::NAN, 0.0);
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reservoir_engineering::selectivity_tuning;

    fn regime() -> DriveParams {
        DriveParams::dispersive_regime(1.0).unwrap()
    }

    fn with_zeta_tau(x: f64) -> DriveParams {
        let mut p = regime();
        let z = effective_couplings(&p).unwrap().zeta.norm();
        p.tau = x / z;
        p.r = 1.0 / p.tau;
        p
    }

    #[test]
    fn resonant_pi_pulse() {
        let p = regime();
        let z = effective_couplings(&p).unwrap().zeta.norm();
        let t = std::f64::consts::FRAC_PI_2 / z;
        let pass = simulate_atom_pass(&p, 0, t).unwrap();
        assert!(pass.probability > 0.999_999, "{}", pass.probability);
        assert!(pass.dt <= 1.0 / (50.0 * z) + 1e-12);
    }

    #[test]
    fn resonant_rabi_law() {
        let p = regime();
        let z = effective_couplings(&p).unwrap().zeta.norm();
        for t in [10.0, 50.0, 120.0, 300.0] {
            let pass = simulate_atom_pass(&p, 0, t).unwrap();
            let exact = (z * t).sin().powi(2);
            assert!((pass.probability - exact).abs() < 1e-6, "t = {t}");
        }
    }

    #[test]
    fn short_time_expansion() {
        let p = regime();
        let z = effective_couplings(&p).unwrap().zeta.norm();
        let t = 0.01 / z;
        let pass = simulate_atom_pass(&p, 0, t).unwrap();
        assert!((pass.probability / (z * t).powi(2) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn off_resonant_levels_stay_below_bound() {
        let p = regime();
        let c = effective_couplings(&p).unwrap();
        let t = std::f64::consts::FRAC_PI_2 / c.zeta.norm();
        for n in 1..4 {
            let pass = simulate_atom_pass(&p, n, t).unwrap();
            let bound = 4.0 * (c.zeta_n(n).norm() / c.xi).powi(2);
            assert!(pass.max_probability < bound, "n = {n}");
            // two-level off-resonant amplitude |ζ_n|²/(|ζ_n|² + φ_n²/4)
            let amp = c.zeta_n(n).norm_sqr() / (c.zeta_n(n).norm_sqr() + c.phi_n(n).powi(2) / 4.0);
            assert!(pass.max_probability <= amp * (1.0 + 1e-4), "n = {n}: {} vs {amp}", pass.max_probability);
            assert!(pass.max_probability > 0.9 * amp, "n = {n}");
        }
    }

    #[test]
    fn untuned_drive_is_rejected() {
        let mut p = regime();
        p.delta += 0.01;
        assert!(matches!(simulate_atom_pass(&p, 0, 1.0), Err(Error::MissingTuning { .. })));
    }

    #[test]
    fn repeated_interaction_matches_cosine_law() {
        let p = with_zeta_tau(0.1);
        let ch = ChannelSpec::new(0, ChannelKind::SelectiveAbsorption { ell: 0 }, 0.0);
        let res = repeated_interaction_check(&p, &ch, 200).unwrap();
        let c2 = 0.1f64.cos().powi(2);
        for (k, pk) in res.populations.iter().enumerate() {
            assert!((pk - c2.powi(k as i32)).abs() < 1e-12);
        }
        assert!((res.rate - (-p.r * c2.ln())).abs() < 1e-9 * res.rate);
        assert!(res.relative_error < 0.01);
        assert!(res.r_squared > 0.999_999);
    }

    #[test]
    fn ground_state_atoms_only_move_two_to_one() {
        let mut p = regime();
        p = selectivity_tuning(&p, 1).unwrap().apply(&p);
        let z = effective_couplings(&p).unwrap().zeta.norm() * 2f64.sqrt();
        p.tau = 0.1 / z;
        p.r = 1.0 / p.tau;
        let ch = ChannelSpec::new(0, ChannelKind::SelectiveEmission { ell: 1 }, 0.0);
        let res = repeated_interaction_check(&p, &ch, 300).unwrap();
        let f = &res.final_populations;
        assert!(f[0].abs() < 1e-14 && f[3].abs() < 1e-14);
        assert!((f[1] + f[2] - 1.0).abs() < 1e-12);
        assert!(f[1] > 0.9);
    }

    #[test]
    fn cooling_beam_empties_the_mode() {
        let p = with_zeta_tau(0.2);
        let ch = ChannelSpec::new(0, ChannelKind::Cooling, 0.0);
        let res = repeated_interaction_check(&p, &ch, 400).unwrap();
        assert!(res.final_populations[0] > 0.99);
        assert!(res.relative_error < 0.02);
    }

    #[test]
    fn preconditions() {
        let p = with_zeta_tau(0.5);
        let ch = ChannelSpec::new(0, ChannelKind::SelectiveAbsorption { ell: 0 }, 0.0);
        assert!(repeated_interaction_check(&p, &ch, 10).is_err());
        let p = with_zeta_tau(0.1);
        let th = ChannelSpec::new(0, ChannelKind::ThermalEmission, 1.0);
        assert!(matches!(repeated_interaction_check(&p, &th, 10), Err(Error::Unsupported(_))));
    }

    #[test]
    fn fit_recovers_rate() {
        let pops: Vec<f64> = (0..50).map(|k| (-0.3 * k as f64 / 2.0).exp()).collect();
        let (slope, r2) = log_linear_fit(&pops, 2.0);
        assert!((slope + 0.3).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }
}
