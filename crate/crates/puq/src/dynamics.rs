//! Trajectory integration: the exact jet-space propagator, classical
//! one-step schemes on the jet companion system, symplectic integration in
//! a Darboux chart, and drift diagnostics.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::darboux::{darboux_map, DarbouxMap};
use crate::error::{PuError, Result};
use crate::invariants::{hamiltonian_value, integrals_of_motion, BetaAngle};
use crate::regime::{mode_frequencies, JetState, ModeData, Parameters};

/// One-step integration schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Classical fourth-order Runge-Kutta on the companion system.
    Rk4,
    /// Kick-drift-kick leapfrog on the separable canonical Hamiltonian;
    /// requires a Darboux chart (a beta value).
    Leapfrog,
    /// Implicit midpoint; for this linear flow, the Cayley transform of the
    /// companion matrix.
    ImplicitMidpoint,
    /// Closed-form propagator evaluated at each output time.
    Exact,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::Rk4 => "rk4",
            Method::Leapfrog => "leapfrog",
            Method::ImplicitMidpoint => "implicit-midpoint",
            Method::Exact => "exact",
        };
        f.write_str(s)
    }
}

/// Sampled trajectory in jet coordinates (including the initial state).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub method: Method,
    pub dt: f64,
    pub times: Vec<f64>,
    pub states: Vec<JetState>,
}

/// Conservation and accuracy diagnostics of a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub method: Method,
    pub dt: f64,
    pub steps: usize,
    /// Max |K_i(t) - K_i(0)| over the trajectory, per integral.
    pub integral_drift: [f64; 2],
    /// The same drifts normalized by the running quadratic scale of the
    /// trajectory, so growing (hyperbolic/secular) solutions are judged
    /// against the magnitude the forms are evaluated at.
    pub integral_drift_rel: [f64; 2],
    /// Max |H(t) - H(0)| when a beta was supplied.
    pub energy_drift: Option<f64>,
    pub energy_drift_rel: Option<f64>,
    /// Max componentwise deviation from the closed-form solution.
    pub max_exact_error: f64,
    /// Wall-clock seconds spent integrating; excluded from serialized
    /// output so reports are bit-identical across runs.
    #[serde(skip)]
    pub wall_time: f64,
}

fn check_grid(dt: f64, steps: usize) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(PuError::InvalidIntegration(format!("dt = {dt} must be positive")));
    }
    if steps == 0 {
        return Err(PuError::InvalidIntegration("steps must be at least 1".into()));
    }
    Ok(())
}

/// Companion matrix of the jet flow x' = C x.
pub fn companion_matrix(params: &Parameters) -> Matrix4<f64> {
    let mut c = Matrix4::zeros();
    c[(0, 1)] = 1.0;
    c[(1, 2)] = 1.0;
    c[(2, 3)] = 1.0;
    if params.lambda == 0.0 {
        c[(3, 1)] = -params.omega_sq;
    } else {
        c[(3, 0)] = -params.omega_sq / params.lambda;
        c[(3, 2)] = -1.0 / params.lambda;
    }
    c
}

/// 2x2 evolution of (u, u') with u'' = -wsq u, valid for either sign of wsq.
fn mode_block(wsq: f64, t: f64) -> Matrix2<f64> {
    if wsq > 0.0 {
        let w = wsq.sqrt();
        let (s, c) = (w * t).sin_cos();
        Matrix2::new(c, s / w, -w * s, c)
    } else if wsq < 0.0 {
        let mu = (-wsq).sqrt();
        let (s, c) = ((mu * t).sinh(), (mu * t).cosh());
        Matrix2::new(c, s / mu, mu * s, c)
    } else {
        Matrix2::new(1.0, t, 0.0, 1.0)
    }
}

fn mode_block_complex(w0: Complex64, t: f64) -> [Complex64; 4] {
    let (s, c) = ((w0 * t).sin(), (w0 * t).cos());
    [c, s / w0, -w0 * s, c]
}

/// Jet basis matrix of (cos, sin, t cos, t sin) at frequency w and time t:
/// column j holds the jet of the j-th basis function.
fn degenerate_basis(w: f64, t: f64) -> Matrix4<f64> {
    Matrix4::from_fn(|r, j| {
        // d^r/dt^r of cos/sin with the quarter-turn shift, and the product
        // rule for the secular pair.
        let trig = |k: usize, n: u32| -> f64 {
            let phase = w * t + n as f64 * std::f64::consts::FRAC_PI_2;
            let base = if k == 0 { phase.cos() } else { phase.sin() };
            w.powi(n as i32) * base
        };
        match j {
            0 => trig(0, r as u32),
            1 => trig(1, r as u32),
            j => {
                let k = j - 2;
                t * trig(k, r as u32)
                    + if r > 0 { r as f64 * trig(k, r as u32 - 1) } else { 0.0 }
            }
        }
    })
}

/// Closed-form jet propagator Phi(t), with x(t) = Phi(t) x(0).
pub fn exact_propagator(params: &Parameters, t: f64) -> Result<Matrix4<f64>> {
    if !t.is_finite() {
        return Err(PuError::InvalidIntegration("non-finite propagation time".into()));
    }
    match mode_frequencies(params) {
        md @ (ModeData::OscillatoryDistinct { .. } | ModeData::Hyperbolic { .. }) => {
            let (w1s, w2s) = md.signed_pair().unwrap();
            // Mode variables u_i = q'' + w_j^2 q (j = other mode) evolve
            // independently at their own frequency.
            let w = Matrix4::new(
                w2s, 0.0, 1.0, 0.0,
                0.0, w2s, 0.0, 1.0,
                w1s, 0.0, 1.0, 0.0,
                0.0, w1s, 0.0, 1.0,
            );
            let b1 = mode_block(w1s, t);
            let b2 = mode_block(w2s, t);
            let mut blocks = Matrix4::zeros();
            blocks.fixed_view_mut::<2, 2>(0, 0).copy_from(&b1);
            blocks.fixed_view_mut::<2, 2>(2, 2).copy_from(&b2);
            let w_inv = w.try_inverse().ok_or_else(|| {
                PuError::InvalidParameters("degenerate mode map".into())
            })?;
            Ok(w_inv * blocks * w)
        }
        ModeData::Harmonic { w_sq } => {
            let b = mode_block(w_sq, t);
            // On the constrained jet the slaved pair (q'', q''') equals
            // -w^2 (q, q') and rotates with the same block, so the
            // propagator is block-diagonal and preserves the constraint.
            let mut phi = Matrix4::zeros();
            phi.fixed_view_mut::<2, 2>(0, 0).copy_from(&b);
            phi.fixed_view_mut::<2, 2>(2, 2).copy_from(&b);
            Ok(phi)
        }
        ModeData::Degenerate { w_sq_repeated } => {
            let w = w_sq_repeated.sqrt();
            let b0 = degenerate_basis(w, 0.0);
            let bt = degenerate_basis(w, t);
            let inv = b0.try_inverse().ok_or_else(|| {
                PuError::InvalidParameters("degenerate basis is singular".into())
            })?;
            Ok(bt * inv)
        }
        md @ ModeData::ComplexPair { .. } => {
            let w0_sq = md.w0_sq().unwrap();
            let w0 = w0_sq.sqrt();
            let w0b_sq = w0_sq.conj();
            let blk = mode_block_complex(w0, t);
            // u = q'' + conj(w0^2) q evolves at w0; the conjugate mode is
            // implied, so the real jet is recovered from Im(u)/Im(w0^2).
            let mut phi = Matrix4::zeros();
            for col in 0..4 {
                let mut e = [Complex64::new(0.0, 0.0); 4];
                e[col] = Complex64::new(1.0, 0.0);
                let u0 = e[2] + w0b_sq * e[0];
                let v0 = e[3] + w0b_sq * e[1];
                let u = blk[0] * u0 + blk[1] * v0;
                let v = blk[2] * u0 + blk[3] * v0;
                let q = -u.im / w0_sq.im;
                let dq = -v.im / w0_sq.im;
                let d2q = (u - w0b_sq * q).re;
                let d3q = (v - w0b_sq * dq).re;
                phi[(0, col)] = q;
                phi[(1, col)] = dq;
                phi[(2, col)] = d2q;
                phi[(3, col)] = d3q;
            }
            Ok(phi)
        }
    }
}

fn rk4_step(c: &Matrix4<f64>, x: &Vector4<f64>, dt: f64) -> Vector4<f64> {
    let k1 = c * x;
    let k2 = c * (x + 0.5 * dt * k1);
    let k3 = c * (x + 0.5 * dt * k2);
    let k4 = c * (x + dt * k3);
    x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Cayley one-step matrix of the implicit midpoint rule for x' = C x.
fn midpoint_step_matrix(c: &Matrix4<f64>, dt: f64) -> Result<Matrix4<f64>> {
    let half = 0.5 * dt * c;
    (Matrix4::identity() - half)
        .try_inverse()
        .map(|inv| inv * (Matrix4::identity() + half))
        .ok_or_else(|| {
            PuError::InvalidIntegration("implicit midpoint system is singular at this dt".into())
        })
}

/// Integrate in jet coordinates. Supports every method except leapfrog,
/// which needs a canonical chart.
pub fn integrate_jet(
    params: &Parameters,
    jet0: &JetState,
    dt: f64,
    steps: usize,
    method: Method,
) -> Result<Trajectory> {
    check_grid(dt, steps)?;
    let mut states = Vec::with_capacity(steps + 1);
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    match method {
        Method::Leapfrog => {
            return Err(PuError::MethodIncompatible(
                "leapfrog integrates a canonical chart; supply a beta value".into(),
            ))
        }
        Method::Exact => {
            // Evaluate Phi(t_k) from the origin at every sample instead of
            // compounding one-step products, so roundoff does not
            // accumulate along the trajectory.
            for &t in &times {
                let phi = exact_propagator(params, t)?;
                states.push(JetState::from_vector(&(phi * jet0.as_vector())));
            }
        }
        Method::Rk4 => {
            let c = companion_matrix(params);
            let mut x = jet0.as_vector();
            states.push(*jet0);
            for _ in 0..steps {
                x = rk4_step(&c, &x, dt);
                states.push(JetState::from_vector(&x));
            }
        }
        Method::ImplicitMidpoint => {
            let step = midpoint_step_matrix(&companion_matrix(params), dt)?;
            let mut x = jet0.as_vector();
            states.push(*jet0);
            for _ in 0..steps {
                x = step * x;
                states.push(JetState::from_vector(&x));
            }
        }
    }
    Ok(Trajectory { method, dt, times, states })
}

/// Split the canonical Hamiltonian form into its position and momentum
/// blocks, rejecting charts with position-momentum cross terms (none of the
/// charts built here have any).
fn separable_blocks(map: &DarbouxMap) -> Result<(Matrix2<f64>, Matrix2<f64>)> {
    let s = &map.hamiltonian_form;
    let qi = [0usize, 2];
    let pi = [1usize, 3];
    for &a in &qi {
        for &b in &pi {
            if s[(a, b)].abs() > 1e-10 || s[(b, a)].abs() > 1e-10 {
                return Err(PuError::MethodIncompatible(
                    "canonical Hamiltonian is not separable in this chart".into(),
                ));
            }
        }
    }
    let a = Matrix2::new(s[(0, 0)], s[(0, 2)], s[(2, 0)], s[(2, 2)]);
    let b = Matrix2::new(s[(1, 1)], s[(1, 3)], s[(3, 1)], s[(3, 3)]);
    Ok((a, b))
}

/// Integrate in the Darboux chart at beta and map samples back to jets.
pub fn integrate_canonical(
    params: &Parameters,
    beta: BetaAngle,
    jet0: &JetState,
    dt: f64,
    steps: usize,
    method: Method,
) -> Result<Trajectory> {
    check_grid(dt, steps)?;
    let map = darboux_map(params, beta)?;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    let mut states = Vec::with_capacity(steps + 1);
    match method {
        Method::Leapfrog => {
            // H(q, p) = q^T A q + p^T B p: kick with -2 A q, drift with 2 B p.
            let (a, b) = separable_blocks(&map)?;
            let z0 = map.to_canonical(jet0);
            let mut q = Vector2::new(z0.q1, z0.q2);
            let mut p = Vector2::new(z0.p1, z0.p2);
            let push = |states: &mut Vec<JetState>, q: &Vector2<f64>, p: &Vector2<f64>| {
                let z = crate::darboux::CanonicalState::new(q[0], p[0], q[1], p[1]);
                states.push(map.from_canonical(&z));
            };
            push(&mut states, &q, &p);
            for _ in 0..steps {
                p -= dt * (a * q);
                q += dt * 2.0 * (b * p);
                p -= dt * (a * q);
                states.push({
                    let z = crate::darboux::CanonicalState::new(q[0], p[0], q[1], p[1]);
                    map.from_canonical(&z)
                });
            }
        }
        Method::Exact => {
            // Conjugate the jet propagator into the chart; equivalent to
            // jet-space exact evolution.
            for &t in &times {
                let phi = map.forward * exact_propagator(params, t)? * map.inverse;
                let z0 = map.to_canonical(jet0);
                let z = phi * z0.as_vector();
                states.push(map.from_canonical(&crate::darboux::CanonicalState::from_vector(&z)));
            }
        }
        Method::Rk4 | Method::ImplicitMidpoint => {
            let c_can = map.forward * companion_matrix(params) * map.inverse;
            let mut z = map.to_canonical(jet0).as_vector();
            states.push(*jet0);
            let step = match method {
                Method::ImplicitMidpoint => Some(midpoint_step_matrix(&c_can, dt)?),
                _ => None,
            };
            for _ in 0..steps {
                z = match &step {
                    Some(s) => s * z,
                    None => rk4_step(&c_can, &z, dt),
                };
                states.push(map.from_canonical(&crate::darboux::CanonicalState::from_vector(&z)));
            }
        }
    }
    Ok(Trajectory { method, dt, times, states })
}

/// Dispatch on whether a chart is requested.
pub fn integrate(
    params: &Parameters,
    beta: Option<BetaAngle>,
    jet0: &JetState,
    dt: f64,
    steps: usize,
    method: Method,
) -> Result<Trajectory> {
    match beta {
        Some(b) => integrate_canonical(params, b, jet0, dt, steps, method),
        None => integrate_jet(params, jet0, dt, steps, method),
    }
}

/// Conservation and accuracy diagnostics for a computed trajectory.
pub fn drift_report(
    params: &Parameters,
    beta: Option<BetaAngle>,
    traj: &Trajectory,
) -> Result<DriftReport> {
    let start = std::time::Instant::now();
    let first = traj
        .states
        .first()
        .ok_or_else(|| PuError::InvalidIntegration("empty trajectory".into()))?;
    let base = integrals_of_motion(params, first)?;
    let base_h = match beta {
        Some(b) => Some(hamiltonian_value(params, b, first)?),
        None => None,
    };
    let mut integral_drift = [0.0f64; 2];
    let mut energy_drift = base_h.map(|_| 0.0f64);
    let mut max_exact_error = 0.0f64;
    let mut max_norm_sq = 0.0f64;
    for (t, state) in traj.times.iter().zip(&traj.states) {
        let pair = integrals_of_motion(params, state)?;
        integral_drift[0] = integral_drift[0].max((pair.k1 - base.k1).abs());
        integral_drift[1] = integral_drift[1].max((pair.k2 - base.k2).abs());
        if let (Some(b), Some(h0), Some(drift)) = (beta, base_h, energy_drift.as_mut()) {
            *drift = drift.max((hamiltonian_value(params, b, state)? - h0).abs());
        }
        max_norm_sq = max_norm_sq.max(state.as_vector().norm_squared());
        let exact = exact_propagator(params, *t)? * first.as_vector();
        for i in 0..4 {
            max_exact_error = max_exact_error.max((state.as_array()[i] - exact[i]).abs());
        }
    }
    // Normalize drifts by the largest magnitude each quadratic form was
    // evaluated at, so unbounded trajectories are judged fairly.
    let (f1, f2) = crate::invariants::integral_forms(params)?;
    let scale = |form: &nalgebra::Matrix4<f64>, base_val: f64| {
        (form.norm() * max_norm_sq).max(base_val.abs()).max(f64::MIN_POSITIVE)
    };
    let integral_drift_rel = [
        integral_drift[0] / scale(&f1, base.k1),
        integral_drift[1] / scale(&f2, base.k2),
    ];
    let energy_drift_rel = match (beta, energy_drift, base_h) {
        (Some(b), Some(d), Some(h0)) => {
            let hf = crate::invariants::hamiltonian_form_jet(params, b)?;
            Some(d / scale(&hf, h0))
        }
        _ => None,
    };
    Ok(DriftReport {
        method: traj.method,
        dt: traj.dt,
        steps: traj.states.len() - 1,
        integral_drift,
        integral_drift_rel,
        energy_drift,
        energy_drift_rel,
        max_exact_error,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Sup-norm discrepancy between jet-space and canonical-chart integration
/// of the same initial state with the same method. With `Method::Exact`
/// this compares the propagator with its chart conjugation.
pub fn cross_check(
    params: &Parameters,
    beta: BetaAngle,
    jet0: &JetState,
    dt: f64,
    steps: usize,
    method: Method,
) -> Result<f64> {
    let canonical = integrate_canonical(params, beta, jet0, dt, steps, method)?;
    let jet_side = match method {
        // Leapfrog has no jet-space counterpart; compare against the
        // closed-form solution instead.
        Method::Leapfrog => integrate_jet(params, jet0, dt, steps, Method::Exact)?,
        m => integrate_jet(params, jet0, dt, steps, m)?,
    };
    let mut sup = 0.0f64;
    for (a, b) in jet_side.states.iter().zip(&canonical.states) {
        for (x, y) in a.as_array().iter().zip(b.as_array()) {
            sup = sup.max((x - y).abs());
        }
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use approx::assert_abs_diff_eq;

    fn beta(b: f64) -> BetaAngle {
        BetaAngle::new(b).unwrap()
    }

    #[test]
    fn propagator_identity_at_zero() {
        for p in fixtures::all() {
            let phi = exact_propagator(&p, 0.0).unwrap();
            let resid = phi - Matrix4::identity();
            assert!(resid.iter().all(|x| x.abs() < 1e-14), "{p:?}");
        }
    }

    #[test]
    fn fix_a_full_period() {
        // Frequencies 2 and 1: the common period is 2 pi.
        let phi = exact_propagator(&fixtures::fix_a(), std::f64::consts::TAU).unwrap();
        let resid = phi - Matrix4::identity();
        assert!(resid.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn propagator_group_law() {
        for p in fixtures::all_nonharmonic() {
            let a = exact_propagator(&p, 0.7).unwrap();
            let b = exact_propagator(&p, 1.9).unwrap();
            let ab = exact_propagator(&p, 2.6).unwrap();
            let resid = a * b - ab;
            let scale = ab.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            assert!(resid.iter().all(|x| x.abs() < 1e-11 * scale), "{p:?}");
        }
    }

    #[test]
    fn propagator_matches_mode_solution() {
        for p in fixtures::all() {
            let jet0 = JetState::new(0.4, -0.8, 0.25, 0.6);
            // The harmonic jet must satisfy the second-order constraints.
            let jet0 = if p.lambda == 0.0 {
                JetState::new(0.4, -0.8, -p.omega_sq * 0.4, p.omega_sq * 0.8)
            } else {
                jet0
            };
            let c = crate::regime::fit_mode_coefficients(&p, &jet0).unwrap();
            for &t in &[0.3, 1.4, 3.9] {
                let via_phi = exact_propagator(&p, t).unwrap() * jet0.as_vector();
                let via_modes = crate::regime::exact_solution(&p, &c, t).unwrap();
                for (a, b) in via_modes.as_array().iter().zip(via_phi.iter()) {
                    assert_abs_diff_eq!(*a, *b, epsilon = 1e-10);
                }
            }
        }
    }

    #[test]
    fn degenerate_secular_growth() {
        // Regime (iv) propagator entries grow linearly, not exponentially.
        let p = fixtures::fix_b();
        let n10 = exact_propagator(&p, 10.0).unwrap().iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let n100 =
            exact_propagator(&p, 100.0).unwrap().iter().fold(0.0f64, |a, x| a.max(x.abs()));
        assert!(n100 < 20.0 * n10);
    }

    #[test]
    fn hyperbolic_growth_rate() {
        // FIX-D leading mode grows like e^{nu t}, nu = sqrt(1 + sqrt 3).
        let p = fixtures::fix_d();
        let nu = (1.0 + 3f64.sqrt()).sqrt();
        let norm = |t: f64| {
            exact_propagator(&p, t).unwrap().iter().fold(0.0f64, |a, x| a.max(x.abs()))
        };
        let rate = (norm(12.0) / norm(10.0)).ln() / 2.0;
        assert_abs_diff_eq!(rate, nu, epsilon = 1e-6);
    }

    #[test]
    fn exact_trajectory_no_drift() {
        let p = fixtures::fix_a();
        let jet0 = JetState::new(1.0, 0.5, -0.5, 0.25);
        let traj = integrate_jet(&p, &jet0, 0.01, 10_000, Method::Exact).unwrap();
        let report = drift_report(&p, Some(beta(std::f64::consts::FRAC_PI_4)), &traj).unwrap();
        assert!(report.max_exact_error < 1e-12);
        assert!(report.integral_drift[0] < 1e-12);
        assert!(report.energy_drift.unwrap() < 1e-12);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let p = fixtures::fix_a();
        let jet0 = JetState::new(1.0, 0.0, 0.0, 0.0);
        let err = |dt: f64, steps: usize| {
            let traj = integrate_jet(&p, &jet0, dt, steps, Method::Rk4).unwrap();
            drift_report(&p, None, &traj).unwrap().max_exact_error
        };
        let ratio = err(0.02, 500) / err(0.01, 1000);
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn leapfrog_bounds_energy() {
        let p = fixtures::fix_a();
        let b = beta(std::f64::consts::FRAC_PI_4);
        let jet0 = JetState::new(0.6, -0.1, 0.8, 0.4);
        let traj = integrate_canonical(&p, b, &jet0, 0.01, 20_000, Method::Leapfrog).unwrap();
        let report = drift_report(&p, Some(b), &traj).unwrap();
        // Symplectic: energy error stays bounded over many periods.
        assert!(report.energy_drift.unwrap() < 1e-3);
        // Non-symplectic RK4 at the same cost dissipates monotonically; the
        // leapfrog state error stays within the usual linear phase drift.
        assert!(report.max_exact_error < 0.5);
    }

    #[test]
    fn midpoint_preserves_quadratic_invariants() {
        let p = fixtures::fix_a();
        let b = beta(std::f64::consts::FRAC_PI_4);
        let jet0 = JetState::new(0.6, -0.1, 0.8, 0.4);
        let traj = integrate_jet(&p, &jet0, 0.05, 2_000, Method::ImplicitMidpoint).unwrap();
        let report = drift_report(&p, Some(b), &traj).unwrap();
        // The midpoint rule conserves all quadratic first integrals exactly
        // (up to roundoff) for linear flows.
        assert!(report.integral_drift[0] < 1e-10);
        assert!(report.integral_drift[1] < 1e-10);
        assert!(report.energy_drift.unwrap() < 1e-10);
    }

    #[test]
    fn canonical_exact_matches_jet_exact() {
        let p = fixtures::fix_c();
        let b = beta(1.3);
        let jet0 = JetState::new(0.2, 0.9, -0.4, 0.1);
        let jet_traj = integrate_jet(&p, &jet0, 0.1, 50, Method::Exact).unwrap();
        let can_traj = integrate_canonical(&p, b, &jet0, 0.1, 50, Method::Exact).unwrap();
        for (a, x) in jet_traj.states.iter().zip(&can_traj.states) {
            for (u, v) in a.as_array().iter().zip(x.as_array()) {
                assert_abs_diff_eq!(*u, v, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn leapfrog_converges_to_exact() {
        // Second-order convergence of the jet-space error.
        let p = fixtures::fix_b();
        let b = beta(2.0);
        let jet0 = JetState::new(0.3, 0.5, -0.2, 0.7);
        let err = |dt: f64, steps: usize| {
            let traj = integrate_canonical(&p, b, &jet0, dt, steps, Method::Leapfrog).unwrap();
            drift_report(&p, Some(b), &traj).unwrap().max_exact_error
        };
        let ratio = err(0.02, 250) / err(0.01, 500);
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn grid_validation() {
        let p = fixtures::fix_a();
        let jet0 = JetState::zero();
        assert!(integrate_jet(&p, &jet0, 0.0, 10, Method::Rk4).is_err());
        assert!(integrate_jet(&p, &jet0, -0.1, 10, Method::Rk4).is_err());
        assert!(integrate_jet(&p, &jet0, 0.1, 0, Method::Rk4).is_err());
        assert!(matches!(
            integrate_jet(&p, &jet0, 0.1, 10, Method::Leapfrog),
            Err(PuError::MethodIncompatible(_))
        ));
    }

    #[test]
    fn drift_report_serializes_without_wall_time() {
        let p = fixtures::fix_a();
        let traj = integrate_jet(&p, &JetState::new(1.0, 0.0, 0.0, 0.0), 0.1, 10, Method::Exact)
            .unwrap();
        let report = drift_report(&p, None, &traj).unwrap();
        let json = serde_json::to_string(&report).unwrap();
        assert!(!json.contains("wall_time"));
    }
}
