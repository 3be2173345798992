use nalgebra::DMatrix;
use num_complex::Complex64;

use super::observables::{fidelity, purity};
use crate::error::{Error, Result};
use crate::liouvillian::Liouvillian;
use crate::states::{DensityOperator, StateVector};

type C = Complex64;

/// Default step is `DEFAULT_DT_SCALE / ‖L‖₁`.
pub const DEFAULT_DT_SCALE: f64 = 0.1;

const TRACE_DRIFT_TOL: f64 = 1e-8;
const NEGATIVITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    /// Fixed RK4 step. `None` picks `DEFAULT_DT_SCALE / ‖L‖₁`.
    pub dt: Option<f64>,
    /// Spacing of output points in `γt`.
    pub output_interval: f64,
    /// Upper bound on the number of full density matrices kept.
    pub max_stored_states: usize,
    /// Stop once `‖L[ρ]‖∞` drops below this value at an output point.
    pub stationary_tol: Option<f64>,
    /// Target for the fidelity series.
    pub target: Option<StateVector>,
    /// Allowed difference between one step and two half steps at `t = 0`.
    pub accuracy_tol: f64,
    pub max_halvings: u32,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            dt: None,
            output_interval: 0.05,
            max_stored_states: 200,
            stationary_tol: Some(1e-8),
            target: None,
            accuracy_tol: 1e-9,
            max_halvings: 8,
        }
    }
}

impl EvolveOptions {
    pub fn with_target(mut self, target: StateVector) -> Self {
        self.target = Some(target);
        self
    }
}

/// Observables recorded along a run, plus a thinned set of full states.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub fidelity: Option<Vec<f64>>,
    pub purity: Vec<f64>,
    /// `⟨A_m† A_m⟩` per output point and mode.
    pub occupations: Vec<Vec<f64>>,
    pub trace: Vec<f64>,
    pub states: Vec<(f64, DensityOperator)>,
    /// Smallest eigenvalue seen among the stored states.
    pub min_eigenvalue: f64,
    pub final_state: DensityOperator,
    /// `‖L[ρ]‖∞` at the last output point.
    pub final_derivative: f64,
    /// Step actually used.
    pub dt: f64,
    pub halvings: u32,
    /// Time at which the run ended.
    pub horizon: f64,
    /// Whether the run ended on the stationarity criterion.
    pub stationary: bool,
}

impl Trajectory {
    pub fn max_trace_drift(&self) -> f64 {
        self.trace.iter().map(|t| (t - 1.0).abs()).fold(0.0, f64::max)
    }
}

enum Failure {
    Retry(String),
    Fatal(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Fatal(e)
    }
}

/// Integrate `dρ/dt = L[ρ]` with classical fixed-step RK4.
///
/// Before the run, one step is compared against two half steps; the step is
/// halved until they agree to `accuracy_tol`. A run that drifts in trace by
/// more than 1e-8 or develops an eigenvalue below -1e-6 is restarted with
/// half the step, up to `max_halvings` times.
pub fn evolve(
    l: &Liouvillian,
    rho0: &DensityOperator,
    t_final: f64,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    l.check_state(rho0)?;
    rho0.validate()?;
    if !(t_final.is_finite() && t_final > 0.0) {
        return Err(Error::invalid("evolution", format!("t_final = {t_final} must be positive")));
    }
    if !(opts.output_interval.is_finite() && opts.output_interval > 0.0) {
        return Err(Error::invalid("evolution", "output interval must be positive"));
    }
    if let Some(target) = &opts.target {
        if target.amplitudes().len() != l.dim() {
            return Err(Error::DimensionMismatch {
                expected: l.dim(),
                found: target.amplitudes().len(),
            });
        }
    }
    let mut dt = match opts.dt {
        Some(dt) if dt.is_finite() && dt > 0.0 => dt,
        Some(dt) => return Err(Error::invalid("evolution", format!("dt = {dt} must be positive"))),
        None => {
            let norm = l.one_norm();
            if norm > 0.0 {
                DEFAULT_DT_SCALE / norm
            } else {
                opts.output_interval
            }
        }
    };

    let mut halvings = 0;
    loop {
        match run(l, rho0, t_final, dt, opts) {
            Ok(mut traj) => {
                traj.halvings = halvings;
                return Ok(traj);
            }
            Err(Failure::Fatal(e)) => return Err(e),
            Err(Failure::Retry(reason)) => {
                if halvings >= opts.max_halvings {
                    return Err(Error::Integration { dt, reason });
                }
                dt *= 0.5;
                halvings += 1;
            }
        }
    }
}

struct Rk4 {
    k1: Vec<C>,
    k2: Vec<C>,
    k3: Vec<C>,
    k4: Vec<C>,
    tmp: Vec<C>,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        let z = vec![C::new(0.0, 0.0); n];
        Rk4 {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }

    fn step(&mut self, l: &Liouvillian, x: &mut [C], h: f64) {
        let half = C::new(0.5 * h, 0.0);
        let full = C::new(h, 0.0);
        l.apply_vec(x, &mut self.k1);
        for ((t, xi), k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k1) {
            *t = xi + half * k;
        }
        l.apply_vec(&self.tmp, &mut self.k2);
        for ((t, xi), k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k2) {
            *t = xi + half * k;
        }
        l.apply_vec(&self.tmp, &mut self.k3);
        for ((t, xi), k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k3) {
            *t = xi + full * k;
        }
        l.apply_vec(&self.tmp, &mut self.k4);
        let sixth = h / 6.0;
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * sixth;
        }
    }
}

fn run(
    l: &Liouvillian,
    rho0: &DensityOperator,
    t_final: f64,
    dt: f64,
    opts: &EvolveOptions,
) -> std::result::Result<Trajectory, Failure> {
    let d = l.dim();
    let n = d * d;
    let mut rk = Rk4::new(n);

    // step-doubling accuracy check from the initial state
    let x0: Vec<C> = rho0.matrix().as_slice().to_vec();
    let mut single = x0.clone();
    rk.step(l, &mut single, dt);
    let mut double = x0.clone();
    rk.step(l, &mut double, 0.5 * dt);
    rk.step(l, &mut double, 0.5 * dt);
    let err = single
        .iter()
        .zip(&double)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if err > opts.accuracy_tol {
        return Err(Failure::Retry(format!(
            "step-doubling error {err:.3e} exceeds {:.1e}",
            opts.accuracy_tol
        )));
    }

    let n_out = ((t_final / opts.output_interval) - 1e-9).ceil().max(1.0) as usize;
    let interval = t_final / n_out as f64;
    let steps_per = (interval / dt).ceil().max(1.0) as usize;
    let h = interval / steps_per as f64;
    let store_every = (n_out + 1).div_ceil(opts.max_stored_states.max(1));

    let mut traj = Trajectory {
        times: Vec::with_capacity(n_out + 1),
        fidelity: opts.target.as_ref().map(|_| Vec::with_capacity(n_out + 1)),
        purity: Vec::with_capacity(n_out + 1),
        occupations: Vec::with_capacity(n_out + 1),
        trace: Vec::with_capacity(n_out + 1),
        states: Vec::new(),
        min_eigenvalue: f64::INFINITY,
        final_state: rho0.clone(),
        final_derivative: f64::NAN,
        dt: h,
        halvings: 0,
        horizon: 0.0,
        stationary: false,
    };

    let mut x = x0;
    let mut deriv = vec![C::new(0.0, 0.0); n];
    for k in 0..=n_out {
        if k > 0 {
            for _ in 0..steps_per {
                rk.step(l, &mut x, h);
            }
        }
        let t = k as f64 * interval;
        let rho = DensityOperator::new_unchecked(
            rho0.space().clone(),
            DMatrix::from_column_slice(d, d, &x),
            rho0.basis(),
        )?;

        let tr = rho.trace();
        if !tr.is_finite() || (tr - 1.0).abs() > TRACE_DRIFT_TOL {
            return Err(Failure::Retry(format!("trace drifted to {tr} at t = {t}")));
        }
        let last = k == n_out;
        l.apply_vec(&x, &mut deriv);
        let deriv_norm = deriv.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let stationary = opts.stationary_tol.is_some_and(|tol| deriv_norm < tol);

        if k % store_every == 0 || last || stationary {
            let min = rho.min_eigenvalue();
            if min < -NEGATIVITY_TOL {
                return Err(Failure::Retry(format!("eigenvalue {min:.3e} at t = {t}")));
            }
            traj.min_eigenvalue = traj.min_eigenvalue.min(min);
            traj.states.push((t, rho.clone()));
        }

        traj.times.push(t);
        traj.trace.push(tr);
        traj.purity.push(purity(&rho));
        traj.occupations.push(rho.mean_occupations());
        if let (Some(series), Some(target)) = (traj.fidelity.as_mut(), opts.target.as_ref()) {
            series.push(fidelity(&rho, target)?);
        }
        traj.final_derivative = deriv_norm;
        traj.horizon = t;
        if last || stationary {
            traj.stationary = stationary;
            traj.final_state = rho;
            break;
        }
    }
    Ok(traj)
}
